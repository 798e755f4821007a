#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdfs/value.hpp"

namespace cdfs {

using RankSet = std::set<Rank>;

/// Where a formula's placeholder sits: in the entry skeleton (root), or
/// inside disjunct `outer_rank` of formula `outer_formula_id`.
struct Anchor {
  std::string outer_formula_id;
  Rank outer_rank = 0;
  bool is_root() const { return outer_formula_id.empty(); }
  bool operator==(const Anchor&) const = default;
};

/// One disjunctive formula: an ordered list of disjuncts bound to a
/// disjunction name. Control annotations are peeled off into the entry's
/// link list during extraction.
struct Formula {
  std::string id;    // NAME.ordinal, document order per name
  std::string name;  // disjunction name
  Path position;     // path of the placeholder, assuming enclosing ranks chosen
  Anchor anchor;
  std::vector<Value> disjuncts;

  int arity() const { return static_cast<int>(disjuncts.size()); }
  RankSet full_domain() const;
};

/// Directed rule: if `source_name` resolves to `source_rank` then
/// `target_name` must take `target_rank`.
struct ControlLink {
  std::string source_name;
  Rank source_rank = 0;
  std::string target_name;
  Rank target_rank = 0;

  bool operator==(const ControlLink&) const = default;
  auto operator<=>(const ControlLink&) const = default;
  std::string str() const;
};

/// A named lexical description: skeleton plus its disjunction and link
/// tables. Immutable after construction.
struct Entry {
  std::string name;
  Value skeleton;  // DisjRef nodes at formula positions
  std::vector<Formula> formulae;
  std::vector<ControlLink> links;
  std::map<std::string, Value> tag_defs;

  const Formula* formula(std::string_view id) const;
  std::vector<const Formula*> formulae_of(std::string_view name) const;
  /// Disjunction names in first-appearance order.
  std::vector<std::string> disjunction_names() const;
  bool has_name(std::string_view name) const;
  /// Arity of a name (taken from its first formula).
  int arity(std::string_view name) const;
  /// Names of disjunctions referenced inside a formula's disjuncts.
  std::vector<std::string> inner_names(const Formula& f) const;
  /// Names whose disjuncts anchor some formula of `name`.
  std::vector<std::string> outer_names(std::string_view name) const;
  bool has_root_formula(std::string_view name) const;
};

struct ExtractResult {
  std::optional<Entry> entry;
  std::vector<std::string> errors;
  bool ok() const { return entry.has_value(); }
};

/// Turn an inline value tree (with Disj/Ctrl nodes) into an Entry:
/// formulae numbered in document order, control annotations converted to
/// links, placeholders substituted. Validates arity >= 2, tag placement and
/// absence of raw DisjRef/Resid nodes.
ExtractResult extract_entry(std::string entry_name, const Value& tree);

/// Rebuild the inline tree from an entry (inverse of extract_entry).
Value inline_tree(const Entry& e);

/// Copy with every disjunction name and tag prefixed; link endpoints follow.
Entry rename_apart(const Entry& e, const std::string& prefix);

struct NameInfo {
  int arity = 0;
  std::vector<std::string> formula_ids;
  bool covariant() const { return formula_ids.size() >= 2; }
};

struct CollectResult {
  std::map<std::string, NameInfo> names;
  std::vector<std::string> arity_mismatches;  // offending names
  bool ok() const { return arity_mismatches.empty(); }
};

/// Group formulae by name; flags names whose formulae disagree on arity.
CollectResult collect_formulae(const Entry& e);

/// Directed dependency graph over disjunction names, one edge per control
/// link with parallel edges collapsed.
struct LinkGraph {
  std::vector<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;
};

LinkGraph link_graph(const Entry& e);

bool entries_equal(const Entry& a, const Entry& b);

}  // namespace cdfs
