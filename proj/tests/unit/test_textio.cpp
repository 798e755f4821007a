#include <doctest.h>

#include "cdfs/textio.hpp"
#include "cdfs/unifier.hpp"
#include "fixtures.hpp"

using namespace cdfs;

TEST_CASE("the mobile file parses into the expected structure") {
  auto parsed = parse_lexicon(test::slurp(test::fixture_path("mobile.cdl")));
  REQUIRE(parsed.ok());
  const Entry* e = parsed.file->find("mobile");
  REQUIRE(e != nullptr);
  REQUIRE(e->formulae.size() == 3);
  CHECK(e->formulae[0].id == "d1.1");
  CHECK(e->formulae[0].disjuncts.size() == 2);
  CHECK(equal(e->formulae[0].disjuncts[0], Value::atom("noun")));
  CHECK(e->links.size() == 2);
}

TEST_CASE("anonymous values parse") {
  const Entry e = test::parse_entry("(entry t (fs (a _)))");
  auto a = get_path(e.skeleton, *Path::parse("a"));
  REQUIRE(a.status == PathStatus::Found);
  CHECK(a.value->is(ValueKind::Anon));
}

TEST_CASE("unary disjunctions are diagnosed") {
  auto parsed = parse_lexicon("(entry t (fs (a (disj d1 x))))");
  REQUIRE_FALSE(parsed.ok());
  REQUIRE(parsed.diagnostics.size() == 1);
  CHECK(parsed.diagnostics[0].message.find("arity") != std::string::npos);
  CHECK(parsed.diagnostics[0].line == 1);
}

TEST_CASE("diagnostics carry line and column") {
  auto parsed = parse_lexicon("(entry t\n  (fs (a b) (a c)))");
  REQUIRE_FALSE(parsed.ok());
  REQUIRE(parsed.diagnostics.size() == 1);
  CHECK(parsed.diagnostics[0].line == 2);
  CHECK(parsed.diagnostics[0].message.find("duplicate feature") != std::string::npos);
}

TEST_CASE("duplicate entry names are diagnosed") {
  auto parsed = parse_lexicon("(entry t (fs)) (entry t (fs))");
  REQUIRE_FALSE(parsed.ok());
  CHECK(parsed.diagnostics[0].message.find("duplicate entry") != std::string::npos);
}

TEST_CASE("comments and whitespace are free") {
  auto parsed = parse_lexicon("; header\n(entry t ; inline\n  (fs (a b)))\n");
  REQUIRE(parsed.ok());
  CHECK(parsed.file->entries.size() == 1);
}

TEST_CASE("syntax errors name the offender") {
  CHECK_FALSE(parse_lexicon("(entry t (fs (a (disj))))").ok());
  CHECK_FALSE(parse_lexicon("(entry t (wat))").ok());
  CHECK_FALSE(parse_lexicon("(entry t (fs (a b))").ok());
  CHECK_FALSE(parse_lexicon("(entry t (fs (a (ctrl x))))").ok());
  CHECK_FALSE(parse_lexicon("(entry t (fs (a (ctrl x (-> d 0)))))").ok());
}

TEST_CASE("round-trip identity on all fixture files") {
  for (const char* fix :
       {"mobile.cdl", "den.cdl", "suffix.cdl", "suffix_cd.cdl", "taxonomy.cdl"}) {
    CAPTURE(fix);
    auto parsed = parse_lexicon(test::slurp(test::fixture_path(fix)));
    REQUIRE(parsed.ok());
    for (const auto& e : parsed.file->entries) {
      const std::string text = serialize(e);
      auto reparsed = parse_lexicon(text);
      REQUIRE(reparsed.ok());
      REQUIRE(reparsed.file->entries.size() == 1);
      CHECK(entries_equal(e, reparsed.file->entries[0]));
      // And serialization is a fixed point from then on.
      CHECK(serialize(reparsed.file->entries[0]) == text);
    }
  }
}

TEST_CASE("round-trip preserves tag identity") {
  const std::string text =
      "(entry t (fs (subj (tag one (fs (num sing)))) (agr #one)))";
  const Entry e = test::parse_entry(text);
  REQUIRE(e.tag_defs.count("one") == 1);
  auto reparsed = parse_lexicon(serialize(e));
  REQUIRE(reparsed.ok());
  const Entry& r = reparsed.file->entries[0];
  CHECK(entries_equal(e, r));
  auto use = get_path(r.skeleton, *Path::parse("agr.num"));
  REQUIRE(use.status == PathStatus::Found);
  CHECK(equal(*use.value, Value::atom("sing")));
}

TEST_CASE("undefined tag uses are diagnosed") {
  CHECK_FALSE(parse_lexicon("(entry t (fs (a #ghost)))").ok());
}

TEST_CASE("json export carries domains, caches and trace") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  REQUIRE(constrain(s, test::con("index.gen=fem")) == ConstrainStatus::Applied);
  const std::string j = to_json(s);
  CHECK(j.find("\"cdfs_version\": \"1.0\"") != std::string::npos);
  CHECK(j.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(j.find("\"d1\"") != std::string::npos);
  CHECK(j.find("\"trace\"") != std::string::npos);
  CHECK(j.find("selection:d2:2->d1:2") != std::string::npos);
}

TEST_CASE("json export of a failed state says so and keeps the trace") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  REQUIRE(constrain(s, test::con("index.gen=neut")) == ConstrainStatus::Failed);
  const std::string j = to_json(s);
  CHECK(j.find("\"status\": \"failed\"") != std::string::npos);
  CHECK(j.find("\"failure\": \"d2\"") != std::string::npos);
  CHECK(j.find("\"before\"") != std::string::npos);
}

TEST_CASE("serialization is deterministic") {
  const Entry e = test::load_fixture("suffix.cdl", "suffix");
  CHECK(serialize(e) == serialize(e));
  CHECK(serialize(e).find("(disj d1 e st t en)") != std::string::npos);
}
