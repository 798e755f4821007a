#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdfs/engine.hpp"

namespace cdfs {

/// An external path=value requirement. The value is plain (no disjunction
/// nodes, no tags into the target entry).
struct Constraint {
  Path path;
  Value value;

  /// Parses the CLI surface form `PATH=ATOM` (`_` allowed as value).
  static std::optional<Constraint> parse(std::string_view text);
  std::string str() const;
};

enum class ConstrainStatus { Applied, NoSuchPath, Failed };

/// Unifies `c.value` into the state at `c.path`. Disjunction-free positions
/// merge in place; formula positions keep exactly the ranks whose disjunct
/// accepts the value, then propagate to fixpoint. Partial merges are cached
/// per (formula, rank) so realize() reflects them.
ConstrainStatus constrain(EngineState& s, const Constraint& c);

/// Applies a whole sequence; stops at the first non-Applied status.
ConstrainStatus constrain_all(EngineState& s, const std::vector<Constraint>& cs);

struct UnifyEntriesResult {
  // Holds a state even on propagation failure (for its trace); `error` is
  // set instead when the skeletons clash structurally.
  std::optional<EngineState> state;
  std::string error;
  bool ok() const { return state.has_value() && !state->failed(); }
};

/// Feature-wise merge of two entry states under their combined constraint
/// stores. Requires disjoint disjunction-name spaces (see rename_apart).
/// Atom-vs-formula positions narrow the formula's name; formula-vs-formula
/// positions get an arc-consistent rank-pair table instead of expansion.
UnifyEntriesResult unify_entries(const EngineState& a, const EngineState& b);

}  // namespace cdfs
