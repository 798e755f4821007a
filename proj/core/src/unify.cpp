#include "cdfs/unify.hpp"

#include <cassert>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace cdfs {

namespace {

// Mutable unification graph. Nodes form a union-find forest; Var nodes
// (wildcards) absorb into anything.
struct UNode {
  enum Kind { Var, Leaf, Feat } kind = Var;
  std::string sym;
  std::vector<std::pair<std::string, UNode*>> feats;
  UNode* parent = nullptr;
  std::string preferred_tag;  // original tag name, if the node was tagged

  // readback bookkeeping
  int seen = 0;
  bool emitting = false;
  std::string out_tag;
};

struct Graph {
  std::vector<std::unique_ptr<UNode>> pool;

  UNode* make(UNode::Kind k) {
    pool.push_back(std::make_unique<UNode>());
    pool.back()->kind = k;
    return pool.back().get();
  }
};

UNode* find(UNode* n) {
  while (n->parent != nullptr) {
    if (n->parent->parent != nullptr) n->parent = n->parent->parent;
    n = n->parent;
  }
  return n;
}

// Build a graph from a plain value. `side` prefixes tag names so the two
// operands' tag spaces stay apart. Forward tag uses get placeholder vars.
UNode* build(Graph& g, const Value& v, std::map<std::string, UNode*>& tags,
             const std::string& side) {
  switch (v.kind()) {
    case ValueKind::Anon:
      return g.make(UNode::Var);
    case ValueKind::Atom: {
      UNode* n = g.make(UNode::Leaf);
      n->sym = v.symbol();
      return n;
    }
    case ValueKind::FS: {
      UNode* n = g.make(UNode::Feat);
      for (const auto& [f, sub] : v.features())
        n->feats.emplace_back(f, build(g, sub, tags, side));
      return n;
    }
    case ValueKind::TagDef: {
      const std::string key = side + v.tag();
      UNode* inner = build(g, v.inner(), tags, side);
      inner->preferred_tag = v.tag();
      auto it = tags.find(key);
      if (it != tags.end()) {
        // a use was seen first; alias the placeholder
        find(it->second)->parent = inner;
      }
      tags[key] = inner;
      return inner;
    }
    case ValueKind::TagUse: {
      const std::string key = side + v.tag();
      auto it = tags.find(key);
      if (it == tags.end()) {
        UNode* placeholder = g.make(UNode::Var);
        tags[key] = placeholder;
        return placeholder;
      }
      return it->second;
    }
    default:
      throw std::invalid_argument("unify_plain: operand contains a disjunction node");
  }
}

void absorb(UNode* winner, UNode* loser) {
  if (winner->preferred_tag.empty()) winner->preferred_tag = loser->preferred_tag;
  loser->parent = winner;
}

bool unify_nodes(UNode* a, UNode* b) {
  a = find(a);
  b = find(b);
  if (a == b) return true;
  if (a->kind == UNode::Var) {
    absorb(b, a);
    return true;
  }
  if (b->kind == UNode::Var) {
    absorb(a, b);
    return true;
  }
  if (a->kind == UNode::Leaf && b->kind == UNode::Leaf) {
    if (a->sym != b->sym) return false;
    absorb(a, b);
    return true;
  }
  if (a->kind != UNode::Feat || b->kind != UNode::Feat) return false;
  // Union first so cyclic structures terminate, then merge features.
  // b's feature list is detached before absorbing; a's features keep their
  // order and b's new ones append. Child unification can re-root `a`
  // (reentrancy), so the current root is re-fetched each step.
  std::vector<std::pair<std::string, UNode*>> pending = std::move(b->feats);
  b->feats.clear();
  absorb(a, b);
  for (auto& [f, bn] : pending) {
    UNode* root = find(a);
    UNode* existing = nullptr;
    for (auto& [rf, rn] : root->feats)
      if (rf == f) {
        existing = rn;
        break;
      }
    if (existing == nullptr) {
      root->feats.emplace_back(f, bn);
    } else if (!unify_nodes(existing, bn)) {
      return false;
    }
  }
  return true;
}

void count_visits(UNode* n) {
  n = find(n);
  n->seen++;
  if (n->seen > 1) return;  // shared or cyclic; children already counted once
  if (n->kind == UNode::Feat)
    for (auto& [f, c] : n->feats) count_visits(c);
}

Value readback(UNode* n, int& next_tag, std::set<std::string>& used_tags) {
  n = find(n);
  if (!n->out_tag.empty()) return Value::tag_use(n->out_tag);
  const bool shared = n->seen > 1;
  if (shared) {
    std::string t = n->preferred_tag;
    if (t.empty() || used_tags.count(t) != 0) {
      do {
        t = "t" + std::to_string(next_tag++);
      } while (used_tags.count(t) != 0);
    }
    used_tags.insert(t);
    n->out_tag = t;
  }
  Value body;
  switch (n->kind) {
    case UNode::Var:
      body = Value::anon();
      break;
    case UNode::Leaf:
      body = Value::atom(n->sym);
      break;
    case UNode::Feat: {
      std::vector<Feature> feats;
      feats.reserve(n->feats.size());
      for (auto& [f, c] : n->feats)
        feats.emplace_back(f, readback(c, next_tag, used_tags));
      body = Value::fs(std::move(feats));
      break;
    }
  }
  if (shared) return Value::tag_def(n->out_tag, std::move(body));
  return body;
}

}  // namespace

std::optional<Value> unify_plain(const Value& a, const Value& b) {
  Graph g;
  std::map<std::string, UNode*> tags;
  UNode* na = build(g, a, tags, "L\x01");
  UNode* nb = build(g, b, tags, "R\x01");
  if (!unify_nodes(na, nb)) return std::nullopt;
  UNode* root = find(na);
  count_visits(root);
  int next_tag = 1;
  std::set<std::string> used;
  return readback(root, next_tag, used);
}

}  // namespace cdfs
