#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdfs/entry.hpp"

namespace cdfs {

struct EngineOptions {
  // Adds contrapositive pruning for control links: when the target domain
  // excludes the target rank, the source rank is removed from the source.
  // Off by default; plain selection fires forward only.
  bool logical_closure = false;
};

enum class DomainStatus { Active, Inactive, Failed };

std::string to_string(DomainStatus s);
std::string format_ranks(const RankSet& s);

/// The set of still-possible ranks for one disjunction name. Shrinks
/// monotonically; a singleton means resolved; empty means failed.
struct RankDomain {
  std::string name;
  int arity = 0;
  RankSet possible;
  DomainStatus status = DomainStatus::Active;

  bool resolved() const { return possible.size() == 1; }
  Rank only() const { return *possible.begin(); }
  bool active() const { return status == DomainStatus::Active; }
};

struct TraceEvent {
  int step = 0;
  std::string cause;
  std::string name;
  RankSet before;
  RankSet after;
  std::string str() const;
};

enum class Outcome { Ok, Failed };

struct Constraint;
enum class ConstrainStatus;
struct UnifyEntriesResult;

/// Runtime state for one entry: one rank domain per disjunction name,
/// per-rank caches of constraint-enriched disjuncts, an agenda of woken
/// propagators and the narrowing trace. Single-threaded; copyable.
class EngineState {
 public:
  static EngineState init(const Entry& e, EngineOptions opts = {});

  /// domain(name) &= keep; wakes watchers. Empty result fails the state.
  Outcome narrow(const std::string& name, const RankSet& keep,
                 const std::string& cause = "external");

  /// Runs woken propagators to quiescence.
  Outcome fixpoint();

  /// Re-checks every formula of `name` against the constraints accumulated
  /// so far, removing ranks whose enriched disjunct is no longer feasible.
  Outcome fire_covariance(const std::string& name);

  /// Forward selection: if the source resolved to the link's source rank,
  /// force the target rank; suspended while the source is unresolved.
  Outcome fire_selection(const ControlLink& link);

  /// Substitute every placeholder: resolved names by their (enriched)
  /// disjunct, unresolved ones by a residual disjunction over the remaining
  /// ranks; inactive positions never surface.
  Value realize() const;

  bool failed() const { return failed_; }
  const std::string& failure_name() const { return failure_name_; }
  const RankDomain& domain(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  const Entry& entry() const { return entry_; }
  const EngineOptions& options() const { return opts_; }
  const Value& cache(const std::string& formula_id, Rank r) const;
  const Value& working_skeleton() const { return working_; }
  const std::map<std::string, Value>& tag_values() const { return tag_values_; }

  /// Domains of all names in declaration order (for reports and JSON).
  std::vector<const RankDomain*> domains() const;

 private:
  EngineState() = default;

  struct Prop {
    enum Kind { Selection, Closure, NestedCheck, InnerSupport, Compat } kind;
    ControlLink link;        // Selection | Closure
    std::string formula_id;  // NestedCheck
    std::string name;        // InnerSupport
    int compat_index = -1;   // Compat
    bool queued = false;
  };

  struct CompatBinding {
    std::string left_formula;   // stays in the merged skeleton
    std::string right_formula;  // superseded placeholder
  };

  // propagation internals
  void wire_props();
  void wake(const std::string& name);
  void enqueue(int prop_index);
  Outcome run_prop(int prop_index);
  Outcome fail(const std::string& name);
  void update_activation();
  bool formula_possible(const Formula& f) const;

  // constraint machinery
  std::optional<Value> cd_merge(const Value& cache_value, const Value& fragment,
                                bool dry_run);
  bool cd_test(const Value& cache_value, const Value& fragment);
  bool cache_feasible(const Value& v);
  RankSet match_ranks(const std::string& formula_id, const Value* require);
  Outcome apply_fragment(const std::string& formula_id, const Value& fragment,
                         const std::string& cause);
  Outcome propagate_requires(const std::string& formula_id);
  RankSet support_of(const std::string& name);
  Outcome run_compat(int index);
  bool compat_pair_ok(const Value& left, const Value& right);
  Value realize_value(const Value& v) const;

  friend ConstrainStatus constrain(EngineState& s, const Constraint& c);
  friend UnifyEntriesResult unify_entries(const EngineState& a, const EngineState& b);

  Entry entry_;
  EngineOptions opts_;
  std::vector<std::string> names_;  // declaration order
  std::map<std::string, RankDomain> domains_;
  std::map<std::string, std::vector<Value>> caches_;  // formula -> per-rank value
  std::map<std::string, Value> tag_values_;
  Value working_;  // skeleton with plain positions merged in place
  std::vector<Prop> props_;
  std::map<std::string, std::vector<int>> wake_on_;
  std::deque<int> agenda_;
  std::vector<CompatBinding> compats_;
  std::map<std::string, int> compat_of_left_;  // left formula id -> binding
  std::vector<TraceEvent> trace_;
  bool failed_ = false;
  std::string failure_name_;
  int merge_depth_ = 0;
};

}  // namespace cdfs
