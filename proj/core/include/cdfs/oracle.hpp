#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "cdfs/entry.hpp"
#include "cdfs/unifier.hpp"

namespace cdfs {

/// One fully resolved reading: a rank per active name plus the realized AVM.
struct Model {
  std::map<std::string, Rank> assignment;  // active names only
  Value avm;
};

struct OracleCapacity : std::exception {
  const char* what() const noexcept override { return "oracle assignment cap exceeded"; }
};

/// Full disjunctive-normal-form expansion by naive enumeration: all rank
/// assignments over active names (inner names enumerated only under their
/// enclosing ranks), filtered by the links read as material implications.
/// Deliberately independent of the propagation engine; throws OracleCapacity
/// past `cap` enumerated assignments.
std::vector<Model> expand_dnf(const Entry& e, std::size_t cap = 100000);

/// Keep the models whose AVM unifies with every constraint at its path.
std::vector<Model> filter_models(const std::vector<Model>& ms,
                                 const std::vector<Constraint>& cs);

/// Ranks a name takes across the models that activate it.
RankSet project(const std::vector<Model>& ms, const std::string& name);

/// Product of all names' arities: the size of the raw assignment space the
/// engine's narrowing avoids visiting.
std::size_t assignment_space(const Entry& e);

}  // namespace cdfs
