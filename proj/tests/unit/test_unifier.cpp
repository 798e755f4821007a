#include <doctest.h>

#include "cdfs/oracle.hpp"
#include "cdfs/unify.hpp"
#include "cdfs/unifier.hpp"
#include "fixtures.hpp"

using namespace cdfs;

namespace {

RankSet ranks(std::initializer_list<Rank> rs) { return RankSet(rs); }

}  // namespace

TEST_CASE("constraint surface syntax") {
  auto c = Constraint::parse("index.gen=fem");
  REQUIRE(c.has_value());
  CHECK(c->path.str() == "index.gen");
  CHECK(c->value.symbol() == "fem");
  CHECK(Constraint::parse("a.b=_")->value.is(ValueKind::Anon));
  CHECK_FALSE(Constraint::parse("nopath").has_value());
  CHECK_FALSE(Constraint::parse("=x").has_value());
  CHECK_FALSE(Constraint::parse("a=1x").has_value());
}

TEST_CASE("constrain resolves mobile through the fem link") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  REQUIRE(constrain(s, test::con("index.gen=fem")) == ConstrainStatus::Applied);
  CHECK(s.domain("d1").possible == ranks({2}));
  CHECK(s.domain("d2").possible == ranks({2}));
  auto spr = get_path(s.realize(), *Path::parse("cat.valence.spr"));
  REQUIRE(spr.status == PathStatus::Found);
  CHECK(to_text(*spr.value) == "(fs)");
}

TEST_CASE("constrain den by case picks the covariant column") {
  auto s = EngineState::init(test::load_fixture("den.cdl", "den"));
  REQUIRE(constrain(s, test::con("spec.case=acc")) == ConstrainStatus::Applied);
  CHECK(s.domain("d1").possible == ranks({1}));
  const Value out = s.realize();
  CHECK(equal(*get_path(out, *Path::parse("spec.index.gen")).value, Value::atom("masc")));
  CHECK(equal(*get_path(out, *Path::parse("spec.index.num")).value, Value::atom("sing")));
}

TEST_CASE("constrain failure carries the failing name") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  CHECK(constrain(s, test::con("index.gen=neut")) == ConstrainStatus::Failed);
  CHECK(s.failed());
  CHECK(s.failure_name() == "d2");
}

TEST_CASE("constrain reports missing skeleton paths") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  CHECK(constrain(s, test::con("cat.nothing=x")) == ConstrainStatus::NoSuchPath);
  CHECK_FALSE(s.failed());
}

TEST_CASE("constrain merges into plain positions in place") {
  const Entry e = test::parse_entry("(entry p (fs (a _) (b (fs (k v)))))");
  auto s = EngineState::init(e);
  REQUIRE(constrain(s, test::con("a=x")) == ConstrainStatus::Applied);
  REQUIRE(constrain(s, test::con("b.k=v")) == ConstrainStatus::Applied);
  CHECK(constrain(s, test::con("b.k=w")) == ConstrainStatus::Failed);
}

TEST_CASE("a wildcard in a disjunct absorbs the constraint value") {
  auto s = EngineState::init(test::load_fixture("den.cdl", "den"));
  REQUIRE(constrain(s, test::con("spec.index.gen=fem")) == ConstrainStatus::Applied);
  // fem only fits the anonymous rank-2 slot, so the dative column wins
  CHECK(s.domain("d1").possible == ranks({2}));
  const Value out = s.realize();
  CHECK(equal(*get_path(out, *Path::parse("spec.index.gen")).value, Value::atom("fem")));
  CHECK(equal(*get_path(out, *Path::parse("spec.case")).value, Value::atom("dat")));
}

TEST_CASE("constraint paths may continue inside complex disjuncts") {
  const Entry e = test::parse_entry(
      "(entry cx (fs (agr (disj a (fs (num plu)) (fs (gen fem) (num sing))))))");
  auto s = EngineState::init(e);
  REQUIRE(constrain(s, test::con("agr.gen=fem")) == ConstrainStatus::Applied);
  // rank 1 has no gen feature, so the graft keeps it alive too
  CHECK(s.domain("a").possible == ranks({1, 2}));
  auto s2 = EngineState::init(e);
  REQUIRE(constrain(s2, test::con("agr.num=sing")) == ConstrainStatus::Applied);
  CHECK(s2.domain("a").possible == ranks({2}));
}

TEST_CASE("constrain is order-insensitive in final domains") {
  const Entry e = test::load_fixture("suffix.cdl", "suffix");
  const std::vector<Constraint> cs = {test::con("morph.ending=t"),
                                      test::con("index.per=second")};
  auto fwd = EngineState::init(e);
  REQUIRE(constrain_all(fwd, cs) == ConstrainStatus::Applied);
  auto rev = EngineState::init(e);
  REQUIRE(constrain(rev, cs[1]) == ConstrainStatus::Applied);
  REQUIRE(constrain(rev, cs[0]) == ConstrainStatus::Applied);
  for (const auto& n : {"d1", "d2"}) {
    CHECK(fwd.domain(n).possible == rev.domain(n).possible);
    CHECK(fwd.domain(n).status == rev.domain(n).status);
  }
  CHECK(to_text(fwd.realize()) == to_text(rev.realize()));
}

TEST_CASE("unify_entries mirrors the gen=fem constraint") {
  auto mobile = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  auto ctx = EngineState::init(
      test::parse_entry("(entry ctx (fs (index (fs (gen fem)))))"));
  auto merged = unify_entries(mobile, ctx);
  REQUIRE(merged.ok());
  CHECK(merged.state->domain("d1").possible == ranks({2}));
  CHECK(merged.state->domain("d2").possible == ranks({2}));
  auto head = get_path(merged.state->realize(), *Path::parse("cat.head"));
  CHECK(equal(*head.value, Value::atom("adj")));
}

TEST_CASE("unify_entries leaves unconstrained subvariation anonymous") {
  auto den = EngineState::init(test::load_fixture("den.cdl", "den"));
  auto ctx = EngineState::init(
      test::parse_entry("(entry ctx (fs (spec (fs (index (fs (num plu)))))))"));
  auto merged = unify_entries(den, ctx);
  REQUIRE(merged.ok());
  const Value out = merged.state->realize();
  CHECK(equal(*get_path(out, *Path::parse("spec.case")).value, Value::atom("dat")));
  CHECK(get_path(out, *Path::parse("spec.index.gen")).value->is(ValueKind::Anon));
}

TEST_CASE("formula-vs-formula positions stay arc-consistent") {
  // {a,b} against {b,c}: brute force over the four rank pairs first.
  const Entry left = test::parse_entry("(entry l (fs (x (disj p a b))))");
  const Entry right_raw = test::parse_entry("(entry r (fs (x (disj p b c))))");
  const Entry right = rename_apart(right_raw, "e2-");
  {
    int surviving_left = 0, surviving_right = 0;
    const char* lvals[] = {"a", "b"};
    const char* rvals[] = {"b", "c"};
    for (int i = 0; i < 2; ++i) {
      bool left_ok = false, right_ok = false;
      for (int j = 0; j < 2; ++j) {
        if (std::string(lvals[i]) == rvals[j]) left_ok = true;
        if (std::string(lvals[j]) == rvals[i]) right_ok = true;
      }
      surviving_left += left_ok ? 1 : 0;
      surviving_right += right_ok ? 1 : 0;
    }
    REQUIRE(surviving_left == 1);
    REQUIRE(surviving_right == 1);
  }
  auto merged = unify_entries(EngineState::init(left), EngineState::init(right));
  REQUIRE(merged.ok());
  CHECK(merged.state->domain("p").possible == ranks({2}));
  CHECK(merged.state->domain("e2-p").possible == ranks({1}));
  CHECK(to_text(merged.state->realize()) == "(fs (x b))");
}

TEST_CASE("unify_entries with an empty entry is the identity on domains") {
  auto den = EngineState::init(test::load_fixture("den.cdl", "den"));
  auto empty = EngineState::init(test::parse_entry("(entry nil (fs))"));
  auto merged = unify_entries(den, empty);
  REQUIRE(merged.ok());
  CHECK(merged.state->domain("d1").possible == den.domain("d1").possible);
  CHECK(equal(merged.state->realize(), den.realize()));
}

TEST_CASE("unify_entries fails on structural clashes outside disjunctions") {
  auto a = EngineState::init(test::parse_entry("(entry a (fs (k x)))"));
  auto b = EngineState::init(test::parse_entry("(entry b (fs (k y)))"));
  auto merged = unify_entries(a, b);
  CHECK_FALSE(merged.ok());
  CHECK(merged.error.find("clash") != std::string::npos);
}

TEST_CASE("unify_entries requires renamed-apart operands") {
  auto a = EngineState::init(test::parse_entry("(entry a (fs (x (disj d m n))))"));
  auto b = EngineState::init(test::parse_entry("(entry b (fs (y (disj d m n))))"));
  auto merged = unify_entries(a, b);
  CHECK_FALSE(merged.ok());
  CHECK(merged.error.find("overlap") != std::string::npos);
}

TEST_CASE("entry unification prunes to empty like the oracle") {
  // Oracle route: models of left whose x unifies with models of right.
  const Entry left = test::parse_entry("(entry l (fs (x (disj p a b))))");
  const Entry right = rename_apart(test::parse_entry("(entry r (fs (x c)))"), "e2-");
  const auto lm = expand_dnf(left);
  int compatible = 0;
  for (const auto& m : lm)
    if (unify_plain(m.avm, Value::fs({{"x", Value::atom("c")}})).has_value()) compatible++;
  REQUIRE(compatible == 0);
  auto merged = unify_entries(EngineState::init(left), EngineState::init(right));
  REQUIRE(merged.state.has_value());
  CHECK(merged.state->failed());
}
