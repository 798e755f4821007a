#include "cdfs/textio.hpp"

#include <cctype>
#include <sstream>

#include <json.hpp>

#include "cdfs/checker.hpp"

namespace cdfs {

using json = nlohmann::ordered_json;

std::string Diagnostic::str() const {
  std::ostringstream os;
  os << line << ':' << col << ": " << message;
  return os.str();
}

const Entry* LexiconFile::find(std::string_view name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

struct Token {
  enum Kind { LParen, RParen, Ident, Number, Underscore, TagRef, Arrow, End } kind;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Token::End;
      return t;
    }
    const char c = text_[pos_];
    if (c == '(') {
      advance();
      t.kind = Token::LParen;
      return t;
    }
    if (c == ')') {
      advance();
      t.kind = Token::RParen;
      return t;
    }
    if (c == '#') {
      advance();
      t.kind = Token::TagRef;
      t.text = read_word();
      return t;
    }
    if (c == '_' && !word_char(peek(1))) {
      advance();
      t.kind = Token::Underscore;
      return t;
    }
    if (c == '-' && peek(1) == '>') {
      advance();
      advance();
      t.kind = Token::Arrow;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Token::Number;
      t.text = read_word();
      return t;
    }
    t.kind = Token::Ident;
    t.text = read_word();
    return t;
  }

 private:
  char peek(std::size_t off) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }
  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }
  void advance() {
    if (text_[pos_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }
  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  std::string read_word() {
    std::string w;
    while (pos_ < text_.size() && word_char(text_[pos_])) {
      w += text_[pos_];
      advance();
    }
    if (w.empty()) {  // lone punctuation; consume so the parser can report it
      w += text_[pos_];
      advance();
    }
    return w;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { bump(); }

  ParseResult run() {
    LexiconFile file;
    while (cur_.kind != Token::End) {
      const int line = cur_.line;
      const int col = cur_.col;
      auto entry_tree = parse_entry_form();
      if (!entry_tree) break;
      auto built = extract_entry(entry_tree->first, entry_tree->second);
      if (!built.ok()) {
        for (const auto& e : built.errors) diag(line, col, e);
        continue;
      }
      if (file.find(built.entry->name) != nullptr) {
        diag(line, col, "duplicate entry name: " + built.entry->name);
        continue;
      }
      file.entries.push_back(std::move(*built.entry));
      file.entry_positions.emplace_back(line, col);
    }
    ParseResult out;
    out.diagnostics = std::move(diags_);
    if (out.diagnostics.empty()) out.file = std::move(file);
    return out;
  }

 private:
  void bump() { cur_ = lex_.next(); }

  void diag(int line, int col, const std::string& msg) {
    diags_.push_back({line, col, msg});
  }
  void diag_here(const std::string& msg) { diag(cur_.line, cur_.col, msg); }

  bool expect(Token::Kind k, const char* what) {
    if (cur_.kind != k) {
      diag_here(std::string("expected ") + what);
      return false;
    }
    return true;
  }

  // Skips to the matching close paren after an error inside a form.
  void recover(int depth) {
    while (cur_.kind != Token::End && depth > 0) {
      if (cur_.kind == Token::LParen) depth++;
      if (cur_.kind == Token::RParen) depth--;
      bump();
    }
  }

  std::optional<std::string> parse_name(const char* what) {
    if (cur_.kind != Token::Ident || !valid_identifier(cur_.text)) {
      diag_here(std::string("expected ") + what);
      return std::nullopt;
    }
    std::string n = cur_.text;
    bump();
    return n;
  }

  std::optional<std::pair<std::string, Value>> parse_entry_form() {
    if (!expect(Token::LParen, "'(' opening an entry")) return std::nullopt;
    bump();
    if (cur_.kind != Token::Ident || cur_.text != "entry") {
      diag_here("expected 'entry'");
      return std::nullopt;
    }
    bump();
    auto name = parse_name("entry name");
    if (!name) {
      recover(1);
      return std::nullopt;
    }
    auto value = parse_value();
    if (!value) {
      recover(1);
      return std::nullopt;
    }
    if (!expect(Token::RParen, "')' closing the entry")) {
      recover(1);
      return std::nullopt;
    }
    bump();
    return std::make_pair(std::move(*name), std::move(*value));
  }

  std::optional<Value> parse_value() {
    switch (cur_.kind) {
      case Token::Underscore:
        bump();
        return Value::anon();
      case Token::TagRef: {
        if (!valid_identifier(cur_.text)) {
          diag_here("invalid tag name: " + cur_.text);
          return std::nullopt;
        }
        Value v = Value::tag_use(cur_.text);
        bump();
        return v;
      }
      case Token::Ident: {
        if (!valid_identifier(cur_.text)) {
          diag_here("invalid atom: " + cur_.text);
          return std::nullopt;
        }
        Value v = Value::atom(cur_.text);
        bump();
        return v;
      }
      case Token::LParen:
        return parse_form();
      default:
        diag_here("expected a value");
        return std::nullopt;
    }
  }

  std::optional<Value> parse_form() {
    bump();  // consume '('
    if (cur_.kind != Token::Ident) {
      diag_here("expected a form head (fs, disj, ctrl or tag)");
      return std::nullopt;
    }
    const std::string head = cur_.text;
    bump();
    if (head == "fs") return parse_fs();
    if (head == "disj") return parse_disj();
    if (head == "ctrl") return parse_ctrl();
    if (head == "tag") return parse_tag();
    diag_here("unknown form head: " + head);
    return std::nullopt;
  }

  std::optional<Value> parse_fs() {
    std::vector<Feature> feats;
    while (cur_.kind == Token::LParen) {
      const int line = cur_.line;
      const int col = cur_.col;
      bump();
      auto feat = parse_name("feature name");
      if (!feat) return std::nullopt;
      auto v = parse_value();
      if (!v) return std::nullopt;
      if (!expect(Token::RParen, "')' closing the feature")) return std::nullopt;
      bump();
      for (const auto& [f, old] : feats)
        if (f == *feat) {
          diag(line, col, "duplicate feature: " + *feat);
          return std::nullopt;
        }
      feats.emplace_back(std::move(*feat), std::move(*v));
    }
    if (!expect(Token::RParen, "')' closing the fs")) return std::nullopt;
    bump();
    return Value::fs(std::move(feats));
  }

  std::optional<Value> parse_disj() {
    const int line = cur_.line;
    const int col = cur_.col;
    auto name = parse_name("disjunction name");
    if (!name) return std::nullopt;
    std::vector<Value> disjuncts;
    while (cur_.kind != Token::RParen && cur_.kind != Token::End) {
      auto v = parse_value();
      if (!v) return std::nullopt;
      disjuncts.push_back(std::move(*v));
    }
    if (!expect(Token::RParen, "')' closing the disjunction")) return std::nullopt;
    bump();
    if (disjuncts.size() < 2) {
      diag(line, col, "disjunction " + *name + " has arity " +
                          std::to_string(disjuncts.size()) + "; at least 2 required");
      return std::nullopt;
    }
    return Value::disj(std::move(*name), std::move(disjuncts));
  }

  std::optional<Value> parse_ctrl() {
    auto inner = parse_value();
    if (!inner) return std::nullopt;
    std::vector<CtrlArrow> arrows;
    while (cur_.kind == Token::LParen) {
      bump();
      if (!expect(Token::Arrow, "'->'")) return std::nullopt;
      bump();
      auto name = parse_name("disjunction name");
      if (!name) return std::nullopt;
      if (cur_.kind != Token::Number) {
        diag_here("expected a rank");
        return std::nullopt;
      }
      const long rank = std::strtol(cur_.text.c_str(), nullptr, 10);
      if (rank < 1) {
        diag_here("rank must be a positive integer");
        return std::nullopt;
      }
      bump();
      if (!expect(Token::RParen, "')' closing the arrow")) return std::nullopt;
      bump();
      arrows.push_back({std::move(*name), static_cast<Rank>(rank)});
    }
    if (arrows.empty()) {
      diag_here("ctrl needs at least one (-> NAME RANK) arrow");
      return std::nullopt;
    }
    if (!expect(Token::RParen, "')' closing the ctrl")) return std::nullopt;
    bump();
    return Value::ctrl(std::move(*inner), std::move(arrows));
  }

  std::optional<Value> parse_tag() {
    auto name = parse_name("tag name");
    if (!name) return std::nullopt;
    auto v = parse_value();
    if (!v) return std::nullopt;
    if (!expect(Token::RParen, "')' closing the tag")) return std::nullopt;
    bump();
    return Value::tag_def(std::move(*name), std::move(*v));
  }

  Lexer lex_;
  Token cur_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

ParseResult parse_lexicon(std::string_view text) { return Parser(text).run(); }

std::string serialize(const Entry& e) {
  return "(entry " + e.name + " " + to_text(inline_tree(e)) + ")";
}

std::string serialize(const LexiconFile& f) {
  std::string out;
  for (const auto& e : f.entries) {
    out += serialize(e);
    out += '\n';
  }
  return out;
}

namespace {

json value_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Atom:
      return json{{"atom", v.symbol()}};
    case ValueKind::Anon:
      return json{{"anon", true}};
    case ValueKind::FS: {
      json feats = json::object();
      for (const auto& [f, sub] : v.features()) feats[f] = value_json(sub);
      return json{{"fs", feats}};
    }
    case ValueKind::Disj: {
      json ds = json::array();
      for (const auto& d : v.disjuncts()) ds.push_back(value_json(d));
      return json{{"disj", v.name()}, {"disjuncts", ds}};
    }
    case ValueKind::Ctrl: {
      json arrows = json::array();
      for (const auto& a : v.arrows())
        arrows.push_back(json{{"name", a.target_name}, {"rank", a.target_rank}});
      return json{{"ctrl", value_json(v.inner())}, {"arrows", arrows}};
    }
    case ValueKind::DisjRef: {
      json j{{"ref", v.name()}, {"formula", v.formula_id()}};
      if (v.require() != nullptr) j["require"] = value_json(*v.require());
      return j;
    }
    case ValueKind::Resid: {
      json alts = json::object();
      for (const auto& [r, alt] : v.alternatives())
        alts[std::to_string(r)] = value_json(alt);
      return json{{"residual", v.name()}, {"alternatives", alts}};
    }
    case ValueKind::TagDef:
      return json{{"tag", v.tag()}, {"value", value_json(v.inner())}};
    case ValueKind::TagUse:
      return json{{"tagref", v.tag()}};
  }
  return json{};
}

json ranks_json(const RankSet& s) {
  json a = json::array();
  for (Rank r : s) a.push_back(r);
  return a;
}

}  // namespace

std::string to_json(const EngineState& s) {
  json j;
  j["cdfs_version"] = "1.0";
  j["entry"] = s.entry().name;
  j["status"] = s.failed() ? "failed" : "ok";
  if (s.failed()) j["failure"] = s.failure_name();
  json domains = json::object();
  for (const RankDomain* d : s.domains()) {
    domains[d->name] = json{{"arity", d->arity},
                            {"possible", ranks_json(d->possible)},
                            {"status", to_string(d->status)}};
  }
  j["domains"] = domains;
  j["skeleton"] = value_json(s.working_skeleton());
  if (!s.failed()) j["realized"] = value_json(s.realize());
  json caches = json::object();
  for (const auto& f : s.entry().formulae) {
    const RankDomain& d = s.domain(f.name);
    json per_rank = json::object();
    for (Rank r : d.possible) per_rank[std::to_string(r)] = value_json(s.cache(f.id, r));
    caches[f.id] = per_rank;
  }
  j["caches"] = caches;
  json trace = json::array();
  for (const auto& ev : s.trace()) {
    trace.push_back(json{{"step", ev.step},
                         {"cause", ev.cause},
                         {"name", ev.name},
                         {"before", ranks_json(ev.before)},
                         {"after", ranks_json(ev.after)}});
  }
  j["trace"] = trace;
  return j.dump(2);
}

std::string value_to_json_text(const Value& v) { return value_json(v).dump(2); }

std::string models_to_json_text(const std::vector<Model>& ms) {
  json j;
  j["count"] = ms.size();
  json models = json::array();
  for (const auto& m : ms) {
    json asg = json::object();
    for (const auto& [n, r] : m.assignment) asg[n] = r;
    models.push_back(json{{"assignment", asg}, {"avm", value_json(m.avm)}});
  }
  j["models"] = models;
  return j.dump(2);
}

std::string report_to_json_text(const CheckReport& rep, const std::string& entry) {
  json j;
  j["entry"] = entry;
  json errs = json::array();
  for (const auto& i : rep.errors) errs.push_back(json{{"code", i.code}, {"message", i.message}});
  json warns = json::array();
  for (const auto& i : rep.warnings)
    warns.push_back(json{{"code", i.code}, {"message", i.message}});
  j["errors"] = errs;
  j["warnings"] = warns;
  return j.dump(2);
}

}  // namespace cdfs
