#pragma once

#include <string>
#include <vector>

#include "cdfs/entry.hpp"

namespace cdfs {

struct CheckIssue {
  std::string code;     // stable machine tag, e.g. "arity-mismatch"
  std::string message;  // human text
};

struct CheckReport {
  std::vector<CheckIssue> errors;
  std::vector<CheckIssue> warnings;

  bool clean() const { return errors.empty() && warnings.empty(); }
  bool ok(bool strict = false) const {
    return errors.empty() && (!strict || warnings.empty());
  }
  bool has(std::string_view code) const;
};

/// Static consistency tests: hard errors for arity mismatches, dangling
/// names, out-of-range ranks, self-links and duplicate links; warnings for
/// non-exclusive formulae, link cycles (propagation still terminates on
/// monotone domains, and mutual control is legitimate) and unreachable
/// nested formulae. Wildcard disjuncts are deliberate subvariation and do
/// not count against exclusivity.
CheckReport check(const Entry& e);

}  // namespace cdfs
