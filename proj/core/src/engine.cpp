#include "cdfs/engine.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

#include "cdfs/unify.hpp"

namespace cdfs {

std::string format_ranks(const RankSet& s) {
  std::string out = "{";
  bool first = true;
  for (Rank r : s) {
    if (!first) out += ',';
    out += std::to_string(r);
    first = false;
  }
  out += '}';
  return out;
}

namespace {

// Refs at the current realization level: descends feature structures and tag
// definitions but not the requires attached to refs (those carry their own
// nested tests).
void refs_at_level(const Value& v, std::vector<Value>& out) {
  switch (v.kind()) {
    case ValueKind::DisjRef:
      out.push_back(v);
      break;
    case ValueKind::FS:
      for (const auto& [f, sub] : v.features()) refs_at_level(sub, out);
      break;
    case ValueKind::TagDef:
      refs_at_level(v.inner(), out);
      break;
    default:
      break;
  }
}

// All refs including those folded into requires.
void refs_deep(const Value& v, std::vector<Value>& out) {
  switch (v.kind()) {
    case ValueKind::DisjRef:
      out.push_back(v);
      if (v.require() != nullptr) refs_deep(*v.require(), out);
      break;
    case ValueKind::FS:
      for (const auto& [f, sub] : v.features()) refs_deep(sub, out);
      break;
    case ValueKind::TagDef:
      refs_deep(v.inner(), out);
      break;
    default:
      break;
  }
}

constexpr int kMergeDepthLimit = 64;

}  // namespace

std::string to_string(DomainStatus s) {
  switch (s) {
    case DomainStatus::Active:
      return "active";
    case DomainStatus::Inactive:
      return "inactive";
    case DomainStatus::Failed:
      return "failed";
  }
  return "?";
}

std::string TraceEvent::str() const {
  std::ostringstream os;
  os << step << ' ' << cause << ' ' << name << ' ' << format_ranks(before) << " -> "
     << format_ranks(after);
  return os.str();
}

EngineState EngineState::init(const Entry& e, EngineOptions opts) {
  EngineState s;
  s.entry_ = e;
  s.opts_ = opts;
  s.names_ = e.disjunction_names();
  for (const auto& n : s.names_) {
    RankDomain d;
    d.name = n;
    d.arity = e.arity(n);
    for (Rank r = 1; r <= d.arity; ++r) d.possible.insert(r);
    s.domains_.emplace(n, std::move(d));
  }
  for (const auto& f : e.formulae) s.caches_.emplace(f.id, f.disjuncts);
  s.tag_values_ = e.tag_defs;
  s.working_ = e.skeleton;
  s.wire_props();
  s.update_activation();
  return s;
}

void EngineState::wire_props() {
  props_.clear();
  wake_on_.clear();
  agenda_.clear();
  auto watch = [&](const std::string& name, int prop) {
    auto& v = wake_on_[name];
    if (std::find(v.begin(), v.end(), prop) == v.end()) v.push_back(prop);
  };
  for (const auto& l : entry_.links) {
    Prop p;
    p.kind = Prop::Selection;
    p.link = l;
    props_.push_back(p);
    watch(l.source_name, static_cast<int>(props_.size()) - 1);
    if (opts_.logical_closure) {
      Prop q;
      q.kind = Prop::Closure;
      q.link = l;
      props_.push_back(q);
      watch(l.target_name, static_cast<int>(props_.size()) - 1);
    }
  }
  for (const auto& f : entry_.formulae) {
    std::vector<Value> refs;
    auto it = caches_.find(f.id);
    if (it != caches_.end())
      for (const auto& c : it->second) refs_deep(c, refs);
    if (refs.empty()) continue;
    Prop p;
    p.kind = Prop::NestedCheck;
    p.formula_id = f.id;
    props_.push_back(p);
    for (const auto& r : refs) watch(r.name(), static_cast<int>(props_.size()) - 1);
  }
  for (const auto& n : names_) {
    const auto outers = entry_.outer_names(n);
    if (outers.empty()) continue;
    Prop p;
    p.kind = Prop::InnerSupport;
    p.name = n;
    props_.push_back(p);
    const int idx = static_cast<int>(props_.size()) - 1;
    for (const auto& o : outers) watch(o, idx);
  }
  for (std::size_t i = 0; i < compats_.size(); ++i) {
    Prop p;
    p.kind = Prop::Compat;
    p.compat_index = static_cast<int>(i);
    props_.push_back(p);
    const int idx = static_cast<int>(props_.size()) - 1;
    const Formula* lf = entry_.formula(compats_[i].left_formula);
    const Formula* rf = entry_.formula(compats_[i].right_formula);
    assert(lf != nullptr && rf != nullptr);
    watch(lf->name, idx);
    watch(rf->name, idx);
  }
}

const RankDomain& EngineState::domain(const std::string& name) const {
  auto it = domains_.find(name);
  assert(it != domains_.end());
  return it->second;
}

std::vector<const RankDomain*> EngineState::domains() const {
  std::vector<const RankDomain*> out;
  out.reserve(names_.size());
  for (const auto& n : names_) out.push_back(&domain(n));
  return out;
}

const Value& EngineState::cache(const std::string& formula_id, Rank r) const {
  auto it = caches_.find(formula_id);
  assert(it != caches_.end());
  assert(r >= 1 && r <= static_cast<Rank>(it->second.size()));
  return it->second[r - 1];
}

void EngineState::enqueue(int prop_index) {
  if (props_[prop_index].queued) return;
  props_[prop_index].queued = true;
  agenda_.push_back(prop_index);
}

void EngineState::wake(const std::string& name) {
  auto it = wake_on_.find(name);
  if (it == wake_on_.end()) return;
  for (int p : it->second) enqueue(p);
}

Outcome EngineState::fail(const std::string& name) {
  failed_ = true;
  failure_name_ = name;
  auto it = domains_.find(name);
  if (it != domains_.end()) it->second.status = DomainStatus::Failed;
  agenda_.clear();
  for (auto& p : props_) p.queued = false;
  return Outcome::Failed;
}

Outcome EngineState::narrow(const std::string& name, const RankSet& keep,
                            const std::string& cause) {
  if (failed_) return Outcome::Failed;
  auto it = domains_.find(name);
  assert(it != domains_.end());
  RankDomain& d = it->second;
  if (!d.active()) return Outcome::Ok;
  RankSet after;
  std::set_intersection(d.possible.begin(), d.possible.end(), keep.begin(), keep.end(),
                        std::inserter(after, after.begin()));
  if (after == d.possible) return Outcome::Ok;
  TraceEvent ev;
  ev.step = static_cast<int>(trace_.size()) + 1;
  ev.cause = cause;
  ev.name = name;
  ev.before = d.possible;
  ev.after = after;
  trace_.push_back(std::move(ev));
  d.possible = after;
  if (after.empty()) return fail(name);
  wake(name);
  update_activation();
  return Outcome::Ok;
}

bool EngineState::formula_possible(const Formula& f) const {
  if (f.anchor.is_root()) return true;
  const Formula* host = entry_.formula(f.anchor.outer_formula_id);
  if (host == nullptr) return false;
  const RankDomain& hd = domain(host->name);
  if (!hd.active() || hd.possible.count(f.anchor.outer_rank) == 0) return false;
  return formula_possible(*host);
}

void EngineState::update_activation() {
  // Activation only ever decays, so a single sweep per narrowing converges
  // within a few rounds (anchor chains are short).
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& n : names_) {
      RankDomain& d = domains_.at(n);
      if (d.status != DomainStatus::Active) continue;
      bool any = false;
      for (const Formula* f : entry_.formulae_of(n))
        if (formula_possible(*f)) {
          any = true;
          break;
        }
      if (!any) {
        d.status = DomainStatus::Inactive;
        changed = true;
      }
    }
  }
}

Outcome EngineState::fixpoint() {
  if (failed_) return Outcome::Failed;
  while (!agenda_.empty()) {
    const int idx = agenda_.front();
    agenda_.pop_front();
    props_[idx].queued = false;
    if (run_prop(idx) == Outcome::Failed) return Outcome::Failed;
  }
  return Outcome::Ok;
}

Outcome EngineState::run_prop(int prop_index) {
  const Prop& p = props_[prop_index];
  switch (p.kind) {
    case Prop::Selection:
      return fire_selection(p.link);
    case Prop::Closure: {
      const RankDomain& src = domain(p.link.source_name);
      const RankDomain& tgt = domain(p.link.target_name);
      if (!src.active() || !tgt.active()) return Outcome::Ok;
      if (tgt.possible.count(p.link.target_rank) != 0) return Outcome::Ok;
      RankSet keep = src.possible;
      keep.erase(p.link.source_rank);
      return narrow(p.link.source_name, keep, "closure:" + p.link.str());
    }
    case Prop::NestedCheck: {
      const Formula* f = entry_.formula(p.formula_id);
      assert(f != nullptr);
      const RankDomain& d = domain(f->name);
      if (!d.active()) return Outcome::Ok;
      RankSet keep;
      for (Rank r : d.possible)
        if (cache_feasible(cache(f->id, r))) keep.insert(r);
      return narrow(f->name, keep, "covariance:" + f->name);
    }
    case Prop::InnerSupport: {
      const RankDomain& d = domain(p.name);
      if (!d.active()) return Outcome::Ok;
      return narrow(p.name, support_of(p.name), "support:" + p.name);
    }
    case Prop::Compat:
      return run_compat(p.compat_index);
  }
  return Outcome::Ok;
}

Outcome EngineState::fire_selection(const ControlLink& link) {
  if (failed_) return Outcome::Failed;
  const RankDomain& src = domain(link.source_name);
  auto tgt = domains_.find(link.target_name);
  if (tgt == domains_.end()) return Outcome::Ok;  // dangling; checker flags it
  if (!src.active() || !tgt->second.active()) return Outcome::Ok;
  if (!src.resolved() || src.only() != link.source_rank) return Outcome::Ok;
  return narrow(link.target_name, RankSet{link.target_rank}, "selection:" + link.str());
}

Outcome EngineState::fire_covariance(const std::string& name) {
  if (failed_) return Outcome::Failed;
  const RankDomain& d = domain(name);
  if (!d.active()) return Outcome::Ok;
  for (const Formula* f : entry_.formulae_of(name)) {
    RankSet keep;
    for (Rank r : domain(name).possible)
      if (cache_feasible(cache(f->id, r))) keep.insert(r);
    if (narrow(name, keep, "covariance:" + name) == Outcome::Failed)
      return Outcome::Failed;
  }
  return Outcome::Ok;
}

RankSet EngineState::match_ranks(const std::string& formula_id, const Value* require) {
  const Formula* f = entry_.formula(formula_id);
  assert(f != nullptr);
  const RankDomain& d = domain(f->name);
  if (!d.active() || require == nullptr) return d.possible;
  RankSet out;
  for (Rank r : d.possible)
    if (cd_test(cache(formula_id, r), *require)) out.insert(r);
  return out;
}

bool EngineState::cd_test(const Value& cache_value, const Value& fragment) {
  return cd_merge(cache_value, fragment, /*dry_run=*/true).has_value();
}

std::optional<Value> EngineState::cd_merge(const Value& a, const Value& b,
                                           bool dry_run) {
  if (merge_depth_ > kMergeDepthLimit) return a;  // give up enriching, stay sound
  merge_depth_++;
  auto out = [&](std::optional<Value> v) {
    merge_depth_--;
    return v;
  };

  // Tag sites update the shared tag table; the node itself stays put.
  if (a.is(ValueKind::TagDef) || a.is(ValueKind::TagUse)) {
    auto it = tag_values_.find(a.tag());
    if (it == tag_values_.end()) return out(a);
    auto merged = cd_merge(it->second, b, dry_run);
    if (!merged) return out(std::nullopt);
    if (!dry_run) it->second = *merged;
    return out(a);
  }
  if (b.is(ValueKind::TagDef)) return out(cd_merge(a, b.inner(), dry_run));
  if (b.is(ValueKind::TagUse)) return out(a);

  if (a.is(ValueKind::Anon)) return out(b);
  if (b.is(ValueKind::Anon)) return out(a);

  if (a.is(ValueKind::DisjRef)) {
    std::optional<Value> new_req;
    if (a.require() != nullptr) {
      new_req = cd_merge(*a.require(), b, dry_run);
      if (!new_req) return out(std::nullopt);
    } else {
      new_req = b;
    }
    if (match_ranks(a.formula_id(), &*new_req).empty()) return out(std::nullopt);
    return out(Value::disj_ref(a.name(), a.formula_id(), std::move(*new_req)));
  }
  if (b.is(ValueKind::DisjRef)) return out(cd_merge(b, a, dry_run));

  if (a.is(ValueKind::Atom) && b.is(ValueKind::Atom))
    return out(a.symbol() == b.symbol() ? std::optional<Value>(a) : std::nullopt);

  if (a.is(ValueKind::FS) && b.is(ValueKind::FS)) {
    std::vector<Feature> feats = a.features();
    const std::size_t declared = a.declared_count();
    for (const auto& [bf, bv] : b.features()) {
      auto slot = std::find_if(feats.begin(), feats.end(),
                               [&](const Feature& x) { return x.first == bf; });
      if (slot != feats.end()) {
        auto merged = cd_merge(slot->second, bv, dry_run);
        if (!merged) return out(std::nullopt);
        slot->second = std::move(*merged);
      } else {
        // Constraint-added features live past the declared prefix, kept
        // sorted so merge order cannot show in output.
        auto pos = feats.begin() + static_cast<std::ptrdiff_t>(declared);
        while (pos != feats.end() && pos->first < bf) ++pos;
        feats.insert(pos, {bf, bv});
      }
    }
    return out(Value::fs_split(std::move(feats), declared));
  }

  return out(std::nullopt);  // atom vs structure clash
}

bool EngineState::cache_feasible(const Value& v) {
  std::vector<Value> refs;
  refs_at_level(v, refs);
  if (refs.empty()) return true;
  // Refs of one name inside one disjunct covary: they must admit a common rank.
  std::map<std::string, RankSet> by_name;
  for (const auto& ref : refs) {
    RankSet m = match_ranks(ref.formula_id(), ref.require());
    auto [it, fresh] = by_name.try_emplace(ref.name(), std::move(m));
    if (!fresh) {
      RankSet inter;
      std::set_intersection(it->second.begin(), it->second.end(), m.begin(), m.end(),
                            std::inserter(inter, inter.begin()));
      it->second = std::move(inter);
    }
  }
  for (const auto& [n, s] : by_name)
    if (s.empty() && domain(n).active()) return false;
  return true;
}

Outcome EngineState::apply_fragment(const std::string& formula_id,
                                    const Value& fragment, const std::string& cause) {
  if (failed_) return Outcome::Failed;
  const Formula* f = entry_.formula(formula_id);
  assert(f != nullptr);
  const RankDomain& d = domain(f->name);
  if (!d.active()) return Outcome::Ok;
  RankSet keep;
  auto& slots = caches_.at(formula_id);
  for (Rank r : d.possible) {
    auto merged = cd_merge(slots[r - 1], fragment, /*dry_run=*/false);
    if (merged && cache_feasible(*merged)) {
      slots[r - 1] = std::move(*merged);
      keep.insert(r);
    }
  }
  if (narrow(f->name, keep, cause) == Outcome::Failed) return Outcome::Failed;
  return propagate_requires(formula_id);
}

Outcome EngineState::propagate_requires(const std::string& formula_id) {
  const Formula* f = entry_.formula(formula_id);
  assert(f != nullptr);
  const RankDomain& d = domain(f->name);
  if (!d.active()) return Outcome::Ok;
  std::vector<std::string> touched;
  for (Rank r : d.possible) {
    std::vector<Value> refs;
    refs_at_level(cache(formula_id, r), refs);
    for (const auto& ref : refs) {
      if (ref.require() == nullptr) continue;
      const Formula* g = entry_.formula(ref.formula_id());
      assert(g != nullptr);
      if (!domain(g->name).active()) continue;
      auto& inner_slots = caches_.at(g->id);
      for (Rank ir : domain(g->name).possible) {
        auto merged = cd_merge(inner_slots[ir - 1], *ref.require(), /*dry_run=*/false);
        // Ranks the require rejects stay untouched; support decides their fate.
        if (merged) inner_slots[ir - 1] = std::move(*merged);
      }
      touched.push_back(g->id);
    }
  }
  for (const auto& gid : touched) {
    // Wake the support pass for the inner name, then recurse one level down.
    const Formula* g = entry_.formula(gid);
    for (std::size_t i = 0; i < props_.size(); ++i)
      if (props_[i].kind == Prop::InnerSupport && props_[i].name == g->name)
        enqueue(static_cast<int>(i));
    if (propagate_requires(gid) == Outcome::Failed) return Outcome::Failed;
  }
  return Outcome::Ok;
}

RankSet EngineState::support_of(const std::string& name) {
  const RankDomain& d = domain(name);
  const bool has_root = entry_.has_root_formula(name);
  const auto hosts = entry_.outer_names(name);
  // Non-root formulae of the name and their anchors.
  struct NestedAnchor {
    const Formula* inner;
    const Formula* host;
  };
  std::vector<NestedAnchor> anchors;
  for (const Formula* f : entry_.formulae_of(name)) {
    if (f->anchor.is_root()) continue;
    const Formula* host = entry_.formula(f->anchor.outer_formula_id);
    assert(host != nullptr);
    anchors.push_back({f, host});
  }
  if (anchors.empty()) return d.possible;

  std::vector<std::string> active_hosts;
  for (const auto& h : hosts)
    if (domain(h).active()) active_hosts.push_back(h);
  if (active_hosts.empty()) return d.possible;  // activation handles orphaning

  RankSet support;
  std::map<std::string, Rank> scenario;
  // Enumerate rank choices for the host names jointly; each choice fixes
  // which nested anchors realize together, and their ref constraints
  // intersect within the scenario but union across scenarios.
  auto consider = [&]() {
    RankSet contribution = d.possible;
    bool any_realized = false;
    for (const auto& na : anchors) {
      auto it = scenario.find(na.host->name);
      if (it == scenario.end() || it->second != na.inner->anchor.outer_rank) continue;
      if (!formula_possible(*na.host)) continue;
      any_realized = true;
      const Value* ref = nullptr;
      std::vector<Value> refs;
      refs_deep(cache(na.host->id, it->second), refs);
      for (const auto& rv : refs)
        if (rv.formula_id() == na.inner->id) {
          ref = &rv;
          break;
        }
      const RankSet m =
          ref != nullptr ? match_ranks(na.inner->id, ref->require()) : d.possible;
      RankSet inter;
      std::set_intersection(contribution.begin(), contribution.end(), m.begin(),
                            m.end(), std::inserter(inter, inter.begin()));
      contribution = std::move(inter);
    }
    if (!any_realized && !has_root) return;  // name inactive in this scenario
    support.insert(contribution.begin(), contribution.end());
  };
  std::function<void(std::size_t)> enumerate = [&](std::size_t i) {
    if (support == d.possible) return;  // cannot grow further
    if (i == active_hosts.size()) {
      consider();
      return;
    }
    for (Rank r : domain(active_hosts[i]).possible) {
      scenario[active_hosts[i]] = r;
      enumerate(i + 1);
    }
    scenario.erase(active_hosts[i]);
  };
  enumerate(0);
  return support;
}

bool EngineState::compat_pair_ok(const Value& left, const Value& right) {
  return cd_test(left, right);
}

Outcome EngineState::run_compat(int index) {
  const CompatBinding& b = compats_[static_cast<std::size_t>(index)];
  const Formula* lf = entry_.formula(b.left_formula);
  const Formula* rf = entry_.formula(b.right_formula);
  assert(lf != nullptr && rf != nullptr);
  const RankDomain& ld = domain(lf->name);
  const RankDomain& rd = domain(rf->name);
  if (!ld.active() || !rd.active()) return Outcome::Ok;
  RankSet keep_left, keep_right;
  for (Rank r : ld.possible)
    for (Rank q : rd.possible)
      if (compat_pair_ok(cache(lf->id, r), cache(rf->id, q))) {
        keep_left.insert(r);
        keep_right.insert(q);
      }
  const std::string cause = "compat:" + lf->name + "~" + rf->name;
  if (narrow(lf->name, keep_left, cause) == Outcome::Failed) return Outcome::Failed;
  return narrow(rf->name, keep_right, cause);
}

Value EngineState::realize_value(const Value& v) const {
  switch (v.kind()) {
    case ValueKind::Atom:
    case ValueKind::Anon:
    case ValueKind::TagUse:
      return v;
    case ValueKind::FS: {
      std::vector<Feature> feats;
      feats.reserve(v.features().size());
      for (const auto& [f, sub] : v.features()) feats.emplace_back(f, realize_value(sub));
      return Value::fs(std::move(feats));
    }
    case ValueKind::TagDef: {
      auto it = tag_values_.find(v.tag());
      return Value::tag_def(v.tag(), realize_value(it == tag_values_.end() ? v.inner()
                                                                           : it->second));
    }
    case ValueKind::DisjRef: {
      const RankDomain& d = domain(v.name());
      if (!d.active()) return Value::anon();
      // Entry-merged positions show both sides' contributions when resolved.
      auto cb = compat_of_left_.find(v.formula_id());
      if (d.resolved()) {
        Value left = realize_value(cache(v.formula_id(), d.only()));
        if (cb != compat_of_left_.end()) {
          const CompatBinding& b = compats_[static_cast<std::size_t>(cb->second)];
          const Formula* rf = entry_.formula(b.right_formula);
          const RankDomain& rd = domain(rf->name);
          if (rd.active() && rd.resolved()) {
            Value right = realize_value(cache(rf->id, rd.only()));
            if (left.is_plain() && right.is_plain()) {
              auto merged = unify_plain(left, right);
              if (merged) return *merged;
            }
          }
        }
        return left;
      }
      std::vector<std::pair<Rank, Value>> alts;
      for (Rank r : d.possible) alts.emplace_back(r, realize_value(cache(v.formula_id(), r)));
      return Value::resid(v.name(), std::move(alts));
    }
    default:
      return v;
  }
}

Value EngineState::realize() const { return realize_value(working_); }

}  // namespace cdfs
