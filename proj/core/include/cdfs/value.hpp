#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cdfs {

/// 1-based position of a disjunct inside a formula.
using Rank = int;

/// A control arrow attached to a disjunct: selecting the disjunct forces
/// `target_name` to `target_rank`.
struct CtrlArrow {
  std::string target_name;
  Rank target_rank = 0;
  bool operator==(const CtrlArrow&) const = default;
};

enum class ValueKind {
  Atom,     // constant symbol
  Anon,     // anonymous wildcard `_`
  FS,       // feature structure: ordered feature -> value map
  Disj,     // inline disjunction (pre-extraction form only)
  Ctrl,     // control-annotated disjunct (pre-extraction form only)
  DisjRef,  // placeholder for a formula position, resolved via the Entry
  Resid,    // residual disjunction in realize() output
  TagDef,   // reentrancy tag definition
  TagUse,   // reentrancy tag use
};

class Value;
using Feature = std::pair<std::string, Value>;

/// Immutable recursive AVM payload. Cheap to copy (shared nodes); all
/// accessors require the matching kind.
class Value {
 public:
  Value();  // Anon

  static Value atom(std::string symbol);
  static Value anon();
  static Value fs(std::vector<Feature> features);
  // FS whose features split into a declared prefix and a sorted tail of
  // constraint-added features (engine merge representation).
  static Value fs_split(std::vector<Feature> features, std::size_t declared);
  static Value disj(std::string name, std::vector<Value> disjuncts);
  static Value ctrl(Value inner, std::vector<CtrlArrow> arrows);
  static Value disj_ref(std::string name, std::string formula_id);
  static Value disj_ref(std::string name, std::string formula_id, Value require);
  static Value resid(std::string name, std::vector<std::pair<Rank, Value>> alternatives);
  static Value tag_def(std::string tag, Value inner);
  static Value tag_use(std::string tag);

  ValueKind kind() const;
  bool is(ValueKind k) const { return kind() == k; }

  const std::string& symbol() const;     // Atom
  const std::string& name() const;       // Disj | DisjRef | Resid
  const std::string& tag() const;        // TagDef | TagUse
  const std::string& formula_id() const; // DisjRef
  const Value* require() const;          // DisjRef; nullptr when unconstrained

  const std::vector<Feature>& features() const;  // FS
  std::size_t declared_count() const;            // FS
  const Value* feature(std::string_view name) const;

  const std::vector<Value>& disjuncts() const;   // Disj
  const Value& inner() const;                    // Ctrl | TagDef
  const std::vector<CtrlArrow>& arrows() const;  // Ctrl
  const std::vector<std::pair<Rank, Value>>& alternatives() const;  // Resid

  /// True if any Disj or Ctrl node occurs in the tree (pre-extraction form).
  bool has_inline_disj() const;
  /// True if any DisjRef occurs in the tree.
  bool has_refs() const;
  /// True if the tree is plain: atoms, wildcards, feature structures and
  /// reentrancy tags only.
  bool is_plain() const;

 private:
  struct Node;
  explicit Value(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Structural equality. Feature order inside an FS does not matter; disjunct
/// order and ranks do.
bool equal(const Value& a, const Value& b);

/// Render in the lexicon surface syntax (single line).
std::string to_text(const Value& v);
std::ostream& operator<<(std::ostream& os, const Value& v);

/// A dotted feature path such as `cat.head`.
struct Path {
  std::vector<std::string> segments;

  static std::optional<Path> parse(std::string_view text);
  std::string str() const;
  bool empty() const { return segments.empty(); }

  bool operator==(const Path&) const = default;
  auto operator<=>(const Path&) const = default;
};

/// Wrap `v` in nested single-feature structures along `p` (segments from
/// index `from` on): wrap_path(a.b, v) = (fs (a (fs (b v)))).
Value wrap_path(const Path& p, Value v, std::size_t from = 0);

enum class PathStatus { Found, Absent, ThroughLeaf };

struct PathResult {
  PathStatus status = PathStatus::Absent;
  std::optional<Value> value;  // set iff Found
};

/// Sub-value lookup. Follows tag definitions (the tag environment is
/// collected from `root`); stops with ThroughLeaf when a segment would
/// descend into an atom, a wildcard or an unresolved disjunction.
PathResult get_path(const Value& root, const Path& p);

/// All tag definitions in the tree, by tag name.
std::map<std::string, Value> collect_tag_defs(const Value& root);

/// [A-Za-z][A-Za-z0-9_-]*
bool valid_identifier(std::string_view s);

}  // namespace cdfs
