#include "cdfs/oracle.hpp"

#include <cassert>

#include "cdfs/unify.hpp"

namespace cdfs {

namespace {

using Assignment = std::map<std::string, Rank>;

bool realized(const Entry& e, const Formula& f, const Assignment& asg) {
  if (f.anchor.is_root()) return true;
  const Formula* host = e.formula(f.anchor.outer_formula_id);
  if (host == nullptr) return false;
  auto it = asg.find(host->name);
  if (it == asg.end() || it->second != f.anchor.outer_rank) return false;
  return realized(e, *host, asg);
}

std::vector<std::string> pending_names(const Entry& e, const Assignment& asg) {
  std::vector<std::string> out;
  for (const auto& n : e.disjunction_names()) {
    if (asg.count(n) != 0) continue;
    for (const Formula* f : e.formulae_of(n))
      if (realized(e, *f, asg)) {
        out.push_back(n);
        break;
      }
  }
  return out;
}

bool links_ok(const Entry& e, const Assignment& asg) {
  for (const auto& l : e.links) {
    auto src = asg.find(l.source_name);
    if (src == asg.end() || src->second != l.source_rank) continue;
    auto tgt = asg.find(l.target_name);
    if (tgt == asg.end()) continue;  // inactive target: vacuous
    if (tgt->second != l.target_rank) return false;
  }
  return true;
}

Value substitute(const Entry& e, const Value& v, const Assignment& asg) {
  switch (v.kind()) {
    case ValueKind::FS: {
      std::vector<Feature> feats;
      feats.reserve(v.features().size());
      for (const auto& [f, sub] : v.features())
        feats.emplace_back(f, substitute(e, sub, asg));
      return Value::fs(std::move(feats));
    }
    case ValueKind::TagDef:
      return Value::tag_def(v.tag(), substitute(e, v.inner(), asg));
    case ValueKind::DisjRef: {
      const Formula* f = e.formula(v.formula_id());
      assert(f != nullptr);
      auto it = asg.find(f->name);
      assert(it != asg.end());
      return substitute(e, f->disjuncts[static_cast<std::size_t>(it->second) - 1], asg);
    }
    default:
      return v;
  }
}

void enumerate(const Entry& e, Assignment& asg, std::size_t cap, std::size_t& count,
               std::vector<Model>& out) {
  const auto pending = pending_names(e, asg);
  if (pending.empty()) {
    if (++count > cap) throw OracleCapacity{};
    if (!links_ok(e, asg)) return;
    out.push_back(Model{asg, substitute(e, e.skeleton, asg)});
    return;
  }
  const std::string& n = pending.front();
  for (Rank r = 1; r <= e.arity(n); ++r) {
    asg[n] = r;
    enumerate(e, asg, cap, count, out);
  }
  asg.erase(n);
}

}  // namespace

std::vector<Model> expand_dnf(const Entry& e, std::size_t cap) {
  std::vector<Model> out;
  Assignment asg;
  std::size_t count = 0;
  enumerate(e, asg, cap, count, out);
  return out;
}

std::vector<Model> filter_models(const std::vector<Model>& ms,
                                 const std::vector<Constraint>& cs) {
  std::vector<Model> out;
  for (const auto& m : ms) {
    bool ok = true;
    for (const auto& c : cs)
      if (!unify_plain(m.avm, wrap_path(c.path, c.value)).has_value()) {
        ok = false;
        break;
      }
    if (ok) out.push_back(m);
  }
  return out;
}

RankSet project(const std::vector<Model>& ms, const std::string& name) {
  RankSet out;
  for (const auto& m : ms) {
    auto it = m.assignment.find(name);
    if (it != m.assignment.end()) out.insert(it->second);
  }
  return out;
}

std::size_t assignment_space(const Entry& e) {
  std::size_t n = 1;
  for (const auto& name : e.disjunction_names())
    n *= static_cast<std::size_t>(e.arity(name));
  return n;
}

}  // namespace cdfs
