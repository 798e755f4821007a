#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cdfs/textio.hpp"
#include "cdfs/unifier.hpp"

namespace cdfs::test {

inline std::string fixture_path(const std::string& name) {
  return std::string(CDFS_FIXTURE_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Entry load_fixture(const std::string& file, const std::string& entry) {
  auto parsed = parse_lexicon(slurp(fixture_path(file)));
  if (!parsed.ok()) {
    std::string msg = "fixture " + file + " failed to parse:";
    for (const auto& d : parsed.diagnostics) msg += " " + d.str();
    throw std::runtime_error(msg);
  }
  const Entry* e = parsed.file->find(entry);
  if (e == nullptr) throw std::runtime_error("no entry " + entry + " in " + file);
  return *e;
}

inline Entry parse_entry(const std::string& text) {
  auto parsed = parse_lexicon(text);
  if (!parsed.ok()) {
    std::string msg = "inline entry failed to parse:";
    for (const auto& d : parsed.diagnostics) msg += " " + d.str();
    throw std::runtime_error(msg);
  }
  if (parsed.file->entries.size() != 1)
    throw std::runtime_error("expected exactly one entry");
  return parsed.file->entries.front();
}

inline Constraint con(const std::string& text) {
  auto c = Constraint::parse(text);
  if (!c) throw std::runtime_error("bad constraint: " + text);
  return *c;
}

}  // namespace cdfs::test
