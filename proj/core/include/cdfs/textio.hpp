#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdfs/engine.hpp"
#include "cdfs/entry.hpp"
#include "cdfs/oracle.hpp"

namespace cdfs {

struct Diagnostic {
  int line = 0;
  int col = 0;
  std::string message;
  std::string str() const;
};

/// A parsed lexicon file: uniquely named entries plus their source
/// positions for diagnostics.
struct LexiconFile {
  std::vector<Entry> entries;
  std::vector<std::pair<int, int>> entry_positions;  // parallel to entries

  const Entry* find(std::string_view name) const;
};

struct ParseResult {
  std::optional<LexiconFile> file;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return file.has_value(); }
};

/// Parses the `.cdl` surface syntax:
///   entry := (entry NAME value)
///   value := ATOM | _ | #TAG | (fs (FEAT value)*) | (disj DNAME value value+)
///          | (ctrl value (-> DNAME RANK)+) | (tag TAG value)
/// Whitespace-insensitive; `;` starts a comment to end of line. Ranks are
/// positional and 1-based; covariance is one DNAME across several disj forms.
ParseResult parse_lexicon(std::string_view text);

std::string serialize(const Entry& e);
std::string serialize(const LexiconFile& f);

/// Machine-readable state dump: skeleton, domains, cached merges, trace.
std::string to_json(const EngineState& s);
std::string value_to_json_text(const Value& v);
std::string models_to_json_text(const std::vector<Model>& ms);
std::string report_to_json_text(const struct CheckReport& rep, const std::string& entry);

}  // namespace cdfs
