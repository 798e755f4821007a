#pragma once

#include <optional>

#include "cdfs/value.hpp"

namespace cdfs {

/// Classical AVM unification over plain values (no disjunction nodes
/// allowed; throws std::invalid_argument on those). Returns the least value
/// subsuming both operands, or nullopt on clash. Anon absorbs anything;
/// feature structures merge feature-wise, with the left operand's features
/// first and the right operand's new features appended; tag identity induces
/// structure sharing, and shared nodes are re-tagged in the result.
std::optional<Value> unify_plain(const Value& a, const Value& b);

}  // namespace cdfs
