#include "cdfs/checker.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>

#include "cdfs/unify.hpp"

namespace cdfs {

bool CheckReport::has(std::string_view code) const {
  auto match = [&](const CheckIssue& i) { return i.code == code; };
  return std::any_of(errors.begin(), errors.end(), match) ||
         std::any_of(warnings.begin(), warnings.end(), match);
}

namespace {

// Existential compatibility over raw entry values: a placeholder is
// compatible if some disjunct of its formula is.
bool static_compat(const Entry& e, const Value& a, const Value& b, int depth) {
  if (depth > 32) return true;
  if (a.is(ValueKind::Anon) || b.is(ValueKind::Anon)) return true;
  if (a.is(ValueKind::TagDef)) return static_compat(e, a.inner(), b, depth + 1);
  if (b.is(ValueKind::TagDef)) return static_compat(e, a, b.inner(), depth + 1);
  if (a.is(ValueKind::TagUse) || b.is(ValueKind::TagUse)) {
    const Value& u = a.is(ValueKind::TagUse) ? a : b;
    auto it = e.tag_defs.find(u.tag());
    if (it == e.tag_defs.end()) return true;
    return a.is(ValueKind::TagUse) ? static_compat(e, it->second, b, depth + 1)
                                   : static_compat(e, a, it->second, depth + 1);
  }
  if (a.is(ValueKind::DisjRef)) {
    const Formula* f = e.formula(a.formula_id());
    if (f == nullptr) return true;
    return std::any_of(f->disjuncts.begin(), f->disjuncts.end(),
                       [&](const Value& d) { return static_compat(e, d, b, depth + 1); });
  }
  if (b.is(ValueKind::DisjRef)) return static_compat(e, b, a, depth);
  if (a.is(ValueKind::Atom) && b.is(ValueKind::Atom)) return a.symbol() == b.symbol();
  if (a.is(ValueKind::FS) && b.is(ValueKind::FS)) {
    for (const auto& [f, av] : a.features()) {
      const Value* bv = b.feature(f);
      if (bv != nullptr && !static_compat(e, av, *bv, depth + 1)) return false;
    }
    return true;
  }
  return false;
}

void collect_ref_ids(const Value& v, std::vector<std::string>& out) {
  switch (v.kind()) {
    case ValueKind::DisjRef:
      out.push_back(v.formula_id());
      break;
    case ValueKind::FS:
      for (const auto& [f, sub] : v.features()) collect_ref_ids(sub, out);
      break;
    case ValueKind::TagDef:
      collect_ref_ids(v.inner(), out);
      break;
    default:
      break;
  }
}

// One concrete cycle through the link graph, node names joined with arrows.
std::string find_cycle(const LinkGraph& g) {
  std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::string cycle;
  std::function<bool(const std::string&)> dfs = [&](const std::string& n) -> bool {
    state[n] = 1;
    stack.push_back(n);
    for (const auto& [from, to] : g.edges) {
      if (from != n) continue;
      if (state[to] == 1) {
        auto it = std::find(stack.begin(), stack.end(), to);
        for (; it != stack.end(); ++it) cycle += *it + " -> ";
        cycle += to;
        return true;
      }
      if (state[to] == 0 && dfs(to)) return true;
    }
    stack.pop_back();
    state[n] = 2;
    return false;
  };
  for (const auto& n : g.nodes)
    if (state[n] == 0 && dfs(n)) return cycle;
  return {};
}

}  // namespace

CheckReport check(const Entry& e) {
  CheckReport rep;
  auto error = [&](std::string code, std::string msg) {
    rep.errors.push_back({std::move(code), std::move(msg)});
  };
  auto warn = [&](std::string code, std::string msg) {
    rep.warnings.push_back({std::move(code), std::move(msg)});
  };

  const CollectResult groups = collect_formulae(e);
  for (const auto& n : groups.arity_mismatches)
    error("arity-mismatch", "formulae of disjunction " + n + " disagree on arity");

  // Placeholder references must resolve inside the entry.
  std::vector<std::string> ref_ids;
  collect_ref_ids(e.skeleton, ref_ids);
  for (const auto& f : e.formulae)
    for (const auto& d : f.disjuncts) collect_ref_ids(d, ref_ids);
  for (const auto& id : ref_ids)
    if (e.formula(id) == nullptr)
      error("dangling-ref", "placeholder references unknown formula " + id);

  std::set<ControlLink> seen;
  for (const auto& l : e.links) {
    if (!seen.insert(l).second) error("duplicate-link", "duplicate link " + l.str());
    if (l.source_name == l.target_name) {
      error("self-link", "link " + l.str() + " targets its own disjunction");
      continue;
    }
    bool names_ok = true;
    for (const auto& n : {l.source_name, l.target_name})
      if (!e.has_name(n)) {
        error("dangling-name", "link " + l.str() + " mentions unknown disjunction " + n);
        names_ok = false;
      }
    if (!names_ok) continue;
    if (l.source_rank < 1 || l.source_rank > e.arity(l.source_name))
      error("rank-out-of-range", "link " + l.str() + ": rank " +
                                     std::to_string(l.source_rank) + " outside 1.." +
                                     std::to_string(e.arity(l.source_name)) + " of " +
                                     l.source_name);
    if (l.target_rank < 1 || l.target_rank > e.arity(l.target_name))
      error("rank-out-of-range", "link " + l.str() + ": rank " +
                                     std::to_string(l.target_rank) + " outside 1.." +
                                     std::to_string(e.arity(l.target_name)) + " of " +
                                     l.target_name);
  }

  // Exclusivity: two non-wildcard disjuncts that could both hold make
  // first-match and all-match constraint readings diverge.
  for (const auto& f : e.formulae) {
    for (std::size_t i = 0; i < f.disjuncts.size(); ++i) {
      for (std::size_t j = i + 1; j < f.disjuncts.size(); ++j) {
        if (f.disjuncts[i].is(ValueKind::Anon) || f.disjuncts[j].is(ValueKind::Anon))
          continue;
        if (static_compat(e, f.disjuncts[i], f.disjuncts[j], 0)) {
          warn("non-exclusive", "disjuncts " + std::to_string(i + 1) + " and " +
                                    std::to_string(j + 1) + " of formula " + f.id +
                                    " (at " + f.position.str() +
                                    ") are not mutually exclusive");
        }
      }
    }
  }

  const std::string cycle = find_cycle(link_graph(e));
  if (!cycle.empty()) warn("link-cycle", "control links form a cycle: " + cycle);

  // Anchor reachability: a nested formula whose anchor chain never grounds
  // out in the skeleton can never be selected.
  std::set<std::string> reachable;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& f : e.formulae) {
      if (reachable.count(f.id) != 0) continue;
      if (f.anchor.is_root() || reachable.count(f.anchor.outer_formula_id) != 0) {
        reachable.insert(f.id);
        grew = true;
      }
    }
  }
  for (const auto& f : e.formulae)
    if (reachable.count(f.id) == 0)
      warn("unreachable-formula", "formula " + f.id + " can never be reached");

  return rep;
}

}  // namespace cdfs
