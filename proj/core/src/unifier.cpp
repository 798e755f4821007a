#include "cdfs/unifier.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace cdfs {

std::optional<Constraint> Constraint::parse(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  auto path = Path::parse(text.substr(0, eq));
  if (!path) return std::nullopt;
  const std::string_view rhs = text.substr(eq + 1);
  if (rhs == "_") return Constraint{*path, Value::anon()};
  if (!valid_identifier(rhs)) return std::nullopt;
  return Constraint{*path, Value::atom(std::string(rhs))};
}

std::string Constraint::str() const {
  return path.str() + "=" + (value.is(ValueKind::Anon) ? "_" : to_text(value));
}

namespace {

enum class WalkKind { Updated, Dispatch, NoPath, Clash };

struct WalkOut {
  WalkKind kind = WalkKind::NoPath;
  Value updated;
  std::string formula_id;
  Value fragment;
};

}  // namespace

ConstrainStatus constrain(EngineState& s, const Constraint& c) {
  if (s.failed_) return ConstrainStatus::Failed;
  assert(c.value.is_plain());

  std::function<WalkOut(const Value&, std::size_t)> go =
      [&](const Value& v, std::size_t i) -> WalkOut {
    if (v.is(ValueKind::TagDef) || v.is(ValueKind::TagUse)) {
      auto it = s.tag_values_.find(v.tag());
      if (it == s.tag_values_.end()) return {WalkKind::NoPath, {}, {}, {}};
      WalkOut r = go(it->second, i);
      if (r.kind == WalkKind::Updated) {
        it->second = r.updated;
        r.updated = v;  // the site keeps its tag node; the table holds the merge
      }
      return r;
    }
    if (v.is(ValueKind::DisjRef))
      return {WalkKind::Dispatch, {}, v.formula_id(), wrap_path(c.path, c.value, i)};
    if (i == c.path.segments.size()) {
      auto merged = s.cd_merge(v, c.value, /*dry_run=*/false);
      if (!merged) return {WalkKind::Clash, {}, {}, {}};
      return {WalkKind::Updated, *merged, {}, {}};
    }
    switch (v.kind()) {
      case ValueKind::FS: {
        const auto& feats = v.features();
        for (std::size_t k = 0; k < feats.size(); ++k) {
          if (feats[k].first != c.path.segments[i]) continue;
          WalkOut r = go(feats[k].second, i + 1);
          if (r.kind == WalkKind::Updated) {
            std::vector<Feature> copy = feats;
            copy[k].second = r.updated;
            r.updated = Value::fs_split(std::move(copy), v.declared_count());
          }
          return r;
        }
        return {WalkKind::NoPath, {}, {}, {}};
      }
      case ValueKind::Anon:
        // A wildcard absorbs the whole grafted remainder.
        return {WalkKind::Updated, wrap_path(c.path, c.value, i), {}, {}};
      case ValueKind::Atom:
        return {WalkKind::Clash, {}, {}, {}};
      default:
        assert(false && "unexpected node in working skeleton");
        return {WalkKind::NoPath, {}, {}, {}};
    }
  };

  WalkOut r = go(s.working_, 0);
  switch (r.kind) {
    case WalkKind::NoPath:
      return ConstrainStatus::NoSuchPath;
    case WalkKind::Clash:
      s.failed_ = true;
      s.failure_name_.clear();
      return ConstrainStatus::Failed;
    case WalkKind::Updated:
      s.working_ = r.updated;
      return ConstrainStatus::Applied;
    case WalkKind::Dispatch: {
      const std::string cause = "constraint:" + c.str();
      if (s.apply_fragment(r.formula_id, r.fragment, cause) == Outcome::Failed)
        return ConstrainStatus::Failed;
      return s.fixpoint() == Outcome::Failed ? ConstrainStatus::Failed
                                             : ConstrainStatus::Applied;
    }
  }
  return ConstrainStatus::Failed;
}

ConstrainStatus constrain_all(EngineState& s, const std::vector<Constraint>& cs) {
  for (const auto& c : cs) {
    const ConstrainStatus st = constrain(s, c);
    if (st != ConstrainStatus::Applied) return st;
  }
  return ConstrainStatus::Applied;
}

UnifyEntriesResult unify_entries(const EngineState& a, const EngineState& b) {
  if (a.failed_ || b.failed_) return {std::nullopt, "operand state already failed"};
  for (const auto& n : b.names_)
    if (std::find(a.names_.begin(), a.names_.end(), n) != a.names_.end())
      return {std::nullopt, "disjunction name spaces overlap: " + n};
  for (const auto& [t, v] : b.tag_values_)
    if (a.tag_values_.count(t) != 0)
      return {std::nullopt, "tag name spaces overlap: " + t};

  std::map<std::string, Value> tags = a.tag_values_;
  for (const auto& [t, v] : b.tag_values_) tags.emplace(t, v);

  std::vector<std::pair<std::string, Value>> pendings;  // formula id -> fragment
  std::vector<std::pair<std::string, std::string>> compat_pairs;
  std::string clash;

  std::function<std::optional<Value>(const Value&, const Value&, const std::string&)>
      merge_sk = [&](const Value& va, const Value& vb,
                     const std::string& where) -> std::optional<Value> {
    if (va.is(ValueKind::TagDef) || va.is(ValueKind::TagUse)) {
      auto merged = merge_sk(tags.at(va.tag()), vb, where);
      if (!merged) return std::nullopt;
      tags[va.tag()] = *merged;
      return va;
    }
    if (vb.is(ValueKind::TagDef) || vb.is(ValueKind::TagUse)) {
      auto merged = merge_sk(tags.at(vb.tag()), va, where);
      if (!merged) return std::nullopt;
      tags[vb.tag()] = *merged;
      return vb;
    }
    if (va.is(ValueKind::DisjRef) && vb.is(ValueKind::DisjRef)) {
      compat_pairs.emplace_back(va.formula_id(), vb.formula_id());
      return va;
    }
    if (va.is(ValueKind::DisjRef)) {
      if (!vb.is(ValueKind::Anon)) pendings.emplace_back(va.formula_id(), vb);
      return va;
    }
    if (vb.is(ValueKind::DisjRef)) {
      if (!va.is(ValueKind::Anon)) pendings.emplace_back(vb.formula_id(), va);
      return vb;
    }
    if (va.is(ValueKind::Anon)) return vb;
    if (vb.is(ValueKind::Anon)) return va;
    if (va.is(ValueKind::Atom) && vb.is(ValueKind::Atom)) {
      if (va.symbol() == vb.symbol()) return va;
      clash = "atom clash at " + (where.empty() ? std::string("root") : where) + ": " +
              va.symbol() + " vs " + vb.symbol();
      return std::nullopt;
    }
    if (va.is(ValueKind::FS) && vb.is(ValueKind::FS)) {
      std::vector<Feature> feats = va.features();
      for (const auto& [bf, bv] : vb.features()) {
        auto slot = std::find_if(feats.begin(), feats.end(),
                                 [&](const Feature& x) { return x.first == bf; });
        const std::string sub_where = where.empty() ? bf : where + "." + bf;
        if (slot == feats.end()) {
          feats.emplace_back(bf, bv);
        } else {
          auto merged = merge_sk(slot->second, bv, sub_where);
          if (!merged) return std::nullopt;
          slot->second = *merged;
        }
      }
      return Value::fs(std::move(feats));
    }
    clash = "structure clash at " + (where.empty() ? std::string("root") : where);
    return std::nullopt;
  };

  auto skeleton = merge_sk(a.working_, b.working_, "");
  if (!skeleton) return {std::nullopt, clash};

  Entry merged;
  merged.name = a.entry_.name + "+" + b.entry_.name;
  merged.skeleton = *skeleton;
  merged.formulae = a.entry_.formulae;
  merged.formulae.insert(merged.formulae.end(), b.entry_.formulae.begin(),
                         b.entry_.formulae.end());
  merged.links = a.entry_.links;
  merged.links.insert(merged.links.end(), b.entry_.links.begin(), b.entry_.links.end());
  merged.tag_defs = tags;

  EngineState s;
  s.entry_ = std::move(merged);
  s.opts_ = a.opts_;
  s.names_ = s.entry_.disjunction_names();
  s.domains_ = a.domains_;
  s.domains_.insert(b.domains_.begin(), b.domains_.end());
  s.caches_ = a.caches_;
  s.caches_.insert(b.caches_.begin(), b.caches_.end());
  s.tag_values_ = std::move(tags);
  s.working_ = s.entry_.skeleton;
  for (const auto& [lf, rf] : compat_pairs) {
    s.compat_of_left_[lf] = static_cast<int>(s.compats_.size());
    s.compats_.push_back({lf, rf});
  }
  s.trace_ = a.trace_;
  s.trace_.insert(s.trace_.end(), b.trace_.begin(), b.trace_.end());
  for (std::size_t i = 0; i < s.trace_.size(); ++i)
    s.trace_[i].step = static_cast<int>(i) + 1;

  s.wire_props();
  s.update_activation();
  for (const auto& [fid, frag] : pendings) {
    if (s.apply_fragment(fid, frag, "merge:" + fid) == Outcome::Failed)
      return {std::move(s), ""};
  }
  // Fragments can adopt refs across entries; rebuild the dependency wiring,
  // then run everything once to fixpoint.
  s.wire_props();
  for (std::size_t i = 0; i < s.props_.size(); ++i) s.enqueue(static_cast<int>(i));
  s.fixpoint();
  return {std::move(s), ""};
}

}  // namespace cdfs
