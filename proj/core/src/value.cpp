#include "cdfs/value.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cdfs {

struct Value::Node {
  ValueKind kind = ValueKind::Anon;
  std::string sym;         // Atom symbol | Disj/DisjRef/Resid name | tag
  std::string formula_id;  // DisjRef
  std::vector<Feature> feats;  // FS
  std::size_t declared = 0;    // FS: feats[0..declared) are declared
  std::vector<Value> items;    // Disj disjuncts | Ctrl/TagDef inner at [0] | DisjRef require at [0]
  std::vector<CtrlArrow> ctrl_arrows;             // Ctrl
  std::vector<std::pair<Rank, Value>> residuals;  // Resid
};

Value::Value() {
  static const auto shared_anon = std::make_shared<const Node>();
  node_ = shared_anon;
}

Value Value::atom(std::string symbol) {
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::Atom;
  n->sym = std::move(symbol);
  return Value(std::move(n));
}

Value Value::anon() { return Value(); }

Value Value::fs(std::vector<Feature> features) {
  const std::size_t declared = features.size();
  return fs_split(std::move(features), declared);
}

Value Value::fs_split(std::vector<Feature> features, std::size_t declared) {
  assert(declared <= features.size());
#ifndef NDEBUG
  for (std::size_t i = 0; i < features.size(); ++i)
    for (std::size_t j = i + 1; j < features.size(); ++j)
      assert(features[i].first != features[j].first && "duplicate feature");
#endif
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::FS;
  n->feats = std::move(features);
  n->declared = declared;
  return Value(std::move(n));
}

Value Value::disj(std::string name, std::vector<Value> disjuncts) {
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::Disj;
  n->sym = std::move(name);
  n->items = std::move(disjuncts);
  return Value(std::move(n));
}

Value Value::ctrl(Value inner, std::vector<CtrlArrow> arrows) {
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::Ctrl;
  n->items.push_back(std::move(inner));
  n->ctrl_arrows = std::move(arrows);
  return Value(std::move(n));
}

Value Value::disj_ref(std::string name, std::string formula_id) {
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::DisjRef;
  n->sym = std::move(name);
  n->formula_id = std::move(formula_id);
  return Value(std::move(n));
}

Value Value::disj_ref(std::string name, std::string formula_id, Value require) {
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::DisjRef;
  n->sym = std::move(name);
  n->formula_id = std::move(formula_id);
  n->items.push_back(std::move(require));
  return Value(std::move(n));
}

Value Value::resid(std::string name, std::vector<std::pair<Rank, Value>> alternatives) {
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::Resid;
  n->sym = std::move(name);
  n->residuals = std::move(alternatives);
  return Value(std::move(n));
}

Value Value::tag_def(std::string tag, Value inner) {
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::TagDef;
  n->sym = std::move(tag);
  n->items.push_back(std::move(inner));
  return Value(std::move(n));
}

Value Value::tag_use(std::string tag) {
  auto n = std::make_shared<Node>();
  n->kind = ValueKind::TagUse;
  n->sym = std::move(tag);
  return Value(std::move(n));
}

ValueKind Value::kind() const { return node_->kind; }

const std::string& Value::symbol() const {
  assert(is(ValueKind::Atom));
  return node_->sym;
}

const std::string& Value::name() const {
  assert(is(ValueKind::Disj) || is(ValueKind::DisjRef) || is(ValueKind::Resid));
  return node_->sym;
}

const std::string& Value::tag() const {
  assert(is(ValueKind::TagDef) || is(ValueKind::TagUse));
  return node_->sym;
}

const std::string& Value::formula_id() const {
  assert(is(ValueKind::DisjRef));
  return node_->formula_id;
}

const Value* Value::require() const {
  assert(is(ValueKind::DisjRef));
  return node_->items.empty() ? nullptr : &node_->items[0];
}

const std::vector<Feature>& Value::features() const {
  assert(is(ValueKind::FS));
  return node_->feats;
}

std::size_t Value::declared_count() const {
  assert(is(ValueKind::FS));
  return node_->declared;
}

const Value* Value::feature(std::string_view name) const {
  for (const auto& [f, v] : features())
    if (f == name) return &v;
  return nullptr;
}

const std::vector<Value>& Value::disjuncts() const {
  assert(is(ValueKind::Disj));
  return node_->items;
}

const Value& Value::inner() const {
  assert(is(ValueKind::Ctrl) || is(ValueKind::TagDef));
  return node_->items[0];
}

const std::vector<CtrlArrow>& Value::arrows() const {
  assert(is(ValueKind::Ctrl));
  return node_->ctrl_arrows;
}

const std::vector<std::pair<Rank, Value>>& Value::alternatives() const {
  assert(is(ValueKind::Resid));
  return node_->residuals;
}

namespace {

template <typename Pred>
bool any_node(const Value& v, Pred pred) {
  if (pred(v)) return true;
  switch (v.kind()) {
    case ValueKind::FS:
      for (const auto& [f, sub] : v.features())
        if (any_node(sub, pred)) return true;
      return false;
    case ValueKind::Disj:
      for (const auto& d : v.disjuncts())
        if (any_node(d, pred)) return true;
      return false;
    case ValueKind::Ctrl:
    case ValueKind::TagDef:
      return any_node(v.inner(), pred);
    case ValueKind::DisjRef:
      return v.require() != nullptr && any_node(*v.require(), pred);
    case ValueKind::Resid:
      for (const auto& [r, alt] : v.alternatives())
        if (any_node(alt, pred)) return true;
      return false;
    default:
      return false;
  }
}

}  // namespace

bool Value::has_inline_disj() const {
  return any_node(*this, [](const Value& v) {
    return v.is(ValueKind::Disj) || v.is(ValueKind::Ctrl);
  });
}

bool Value::has_refs() const {
  return any_node(*this, [](const Value& v) { return v.is(ValueKind::DisjRef); });
}

bool Value::is_plain() const {
  return !any_node(*this, [](const Value& v) {
    switch (v.kind()) {
      case ValueKind::Disj:
      case ValueKind::Ctrl:
      case ValueKind::DisjRef:
      case ValueKind::Resid:
        return true;
      default:
        return false;
    }
  });
}

bool equal(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ValueKind::Atom:
      return a.symbol() == b.symbol();
    case ValueKind::Anon:
      return true;
    case ValueKind::FS: {
      if (a.features().size() != b.features().size()) return false;
      for (const auto& [f, av] : a.features()) {
        const Value* bv = b.feature(f);
        if (bv == nullptr || !equal(av, *bv)) return false;
      }
      return true;
    }
    case ValueKind::Disj: {
      if (a.name() != b.name()) return false;
      if (a.disjuncts().size() != b.disjuncts().size()) return false;
      for (std::size_t i = 0; i < a.disjuncts().size(); ++i)
        if (!equal(a.disjuncts()[i], b.disjuncts()[i])) return false;
      return true;
    }
    case ValueKind::Ctrl:
      return a.arrows() == b.arrows() && equal(a.inner(), b.inner());
    case ValueKind::DisjRef: {
      if (a.name() != b.name() || a.formula_id() != b.formula_id()) return false;
      const Value* ra = a.require();
      const Value* rb = b.require();
      if ((ra == nullptr) != (rb == nullptr)) return false;
      return ra == nullptr || equal(*ra, *rb);
    }
    case ValueKind::Resid: {
      if (a.name() != b.name()) return false;
      if (a.alternatives().size() != b.alternatives().size()) return false;
      for (std::size_t i = 0; i < a.alternatives().size(); ++i) {
        if (a.alternatives()[i].first != b.alternatives()[i].first) return false;
        if (!equal(a.alternatives()[i].second, b.alternatives()[i].second)) return false;
      }
      return true;
    }
    case ValueKind::TagDef:
      return a.tag() == b.tag() && equal(a.inner(), b.inner());
    case ValueKind::TagUse:
      return a.tag() == b.tag();
  }
  return false;
}

namespace {

void render(std::ostream& os, const Value& v) {
  switch (v.kind()) {
    case ValueKind::Atom:
      os << v.symbol();
      break;
    case ValueKind::Anon:
      os << '_';
      break;
    case ValueKind::FS: {
      os << "(fs";
      for (const auto& [f, sub] : v.features()) {
        os << " (" << f << ' ';
        render(os, sub);
        os << ')';
      }
      os << ')';
      break;
    }
    case ValueKind::Disj: {
      os << "(disj " << v.name();
      for (const auto& d : v.disjuncts()) {
        os << ' ';
        render(os, d);
      }
      os << ')';
      break;
    }
    case ValueKind::Ctrl: {
      os << "(ctrl ";
      render(os, v.inner());
      for (const auto& a : v.arrows())
        os << " (-> " << a.target_name << ' ' << a.target_rank << ')';
      os << ')';
      break;
    }
    case ValueKind::DisjRef:
      os << "(ref " << v.name() << ' ' << v.formula_id();
      if (v.require() != nullptr) {
        os << ' ';
        render(os, *v.require());
      }
      os << ')';
      break;
    case ValueKind::Resid: {
      os << "(residual " << v.name();
      for (const auto& [r, alt] : v.alternatives()) {
        os << " (" << r << ' ';
        render(os, alt);
        os << ')';
      }
      os << ')';
      break;
    }
    case ValueKind::TagDef:
      os << "(tag " << v.tag() << ' ';
      render(os, v.inner());
      os << ')';
      break;
    case ValueKind::TagUse:
      os << '#' << v.tag();
      break;
  }
}

}  // namespace

std::string to_text(const Value& v) {
  std::ostringstream os;
  render(os, v);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Value& v) {
  render(os, v);
  return os;
}

bool valid_identifier(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::optional<Path> Path::parse(std::string_view text) {
  Path p;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t dot = text.find('.', start);
    std::string_view seg = dot == std::string_view::npos
                               ? text.substr(start)
                               : text.substr(start, dot - start);
    if (!valid_identifier(seg)) return std::nullopt;
    p.segments.emplace_back(seg);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (p.segments.empty()) return std::nullopt;
  return p;
}

std::string Path::str() const {
  std::string s;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i > 0) s += '.';
    s += segments[i];
  }
  return s;
}

Value wrap_path(const Path& p, Value v, std::size_t from) {
  Value out = std::move(v);
  for (std::size_t i = p.segments.size(); i > from; --i)
    out = Value::fs({{p.segments[i - 1], std::move(out)}});
  return out;
}

std::map<std::string, Value> collect_tag_defs(const Value& root) {
  std::map<std::string, Value> out;
  any_node(root, [&](const Value& v) {
    if (v.is(ValueKind::TagDef)) out.emplace(v.tag(), v.inner());
    return false;
  });
  return out;
}

PathResult get_path(const Value& root, const Path& p) {
  const auto tags = collect_tag_defs(root);
  Value cur = root;
  auto deref = [&](Value v) -> std::optional<Value> {
    for (;;) {
      if (v.is(ValueKind::TagDef)) {
        v = v.inner();
      } else if (v.is(ValueKind::TagUse)) {
        auto it = tags.find(v.tag());
        if (it == tags.end()) return std::nullopt;
        v = it->second;
      } else {
        return v;
      }
    }
  };
  for (std::size_t i = 0; i < p.segments.size(); ++i) {
    auto d = deref(cur);
    if (!d) return {PathStatus::Absent, std::nullopt};
    cur = *d;
    switch (cur.kind()) {
      case ValueKind::FS: {
        const Value* next = cur.feature(p.segments[i]);
        if (next == nullptr) return {PathStatus::Absent, std::nullopt};
        cur = *next;
        break;
      }
      case ValueKind::Atom:
      case ValueKind::Anon:
      case ValueKind::Disj:
      case ValueKind::Ctrl:
      case ValueKind::DisjRef:
      case ValueKind::Resid:
        return {PathStatus::ThroughLeaf, std::nullopt};
      default:
        return {PathStatus::Absent, std::nullopt};
    }
  }
  auto d = deref(cur);
  if (!d) return {PathStatus::Absent, std::nullopt};
  return {PathStatus::Found, *d};
}

}  // namespace cdfs
