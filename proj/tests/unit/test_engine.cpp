#include <doctest.h>

#include "cdfs/engine.hpp"
#include "cdfs/oracle.hpp"
#include "cdfs/unifier.hpp"
#include "fixtures.hpp"

using namespace cdfs;

namespace {

RankSet ranks(std::initializer_list<Rank> rs) { return RankSet(rs); }

int narrowing_bound(const Entry& e) {
  int total = 0;
  for (const auto& n : e.disjunction_names()) total += e.arity(n) - 1;
  return total;
}

}  // namespace

TEST_CASE("init gives every name its full domain") {
  const Entry mobile = test::load_fixture("mobile.cdl", "mobile");
  auto s = EngineState::init(mobile);
  CHECK(s.domain("d1").possible == ranks({1, 2}));
  CHECK(s.domain("d2").possible == ranks({1, 2}));
  CHECK(s.trace().empty());

  const Entry den = test::load_fixture("den.cdl", "den");
  auto sd = EngineState::init(den);
  CHECK(sd.domain("d1").possible == ranks({1, 2}));
}

TEST_CASE("init of the suffix fixture matches the oracle's rank spaces") {
  const Entry e = test::load_fixture("suffix.cdl", "suffix");
  auto s = EngineState::init(e);
  CHECK(s.domain("d1").possible == ranks({1, 2, 3, 4}));
  CHECK(s.domain("d2").possible == ranks({1, 2}));
  CHECK(s.domain("d3").possible == ranks({1, 2}));
  // Independent confirmation by enumeration.
  const auto models = expand_dnf(e);
  CHECK(project(models, "d1") == s.domain("d1").possible);
  CHECK(project(models, "d2") == s.domain("d2").possible);
  CHECK(project(models, "d3") == s.domain("d3").possible);
}

TEST_CASE("narrowing the gender to fem resolves the whole entry") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  REQUIRE(s.narrow("d2", ranks({2})) == Outcome::Ok);
  REQUIRE(s.fixpoint() == Outcome::Ok);
  CHECK(s.domain("d1").possible == ranks({2}));
  CHECK(s.domain("d2").possible == ranks({2}));
}

TEST_CASE("narrowing the gender to masc decides nothing") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  REQUIRE(s.narrow("d2", ranks({1})) == Outcome::Ok);
  REQUIRE(s.fixpoint() == Outcome::Ok);
  CHECK(s.domain("d1").possible == ranks({1, 2}));
  CHECK(s.domain("d2").possible == ranks({1}));
}

TEST_CASE("narrowing to the empty set fails with a trace") {
  auto s = EngineState::init(test::load_fixture("den.cdl", "den"));
  CHECK(s.narrow("d1", RankSet{}) == Outcome::Failed);
  CHECK(s.failed());
  CHECK(s.failure_name() == "d1");
  REQUIRE(s.trace().size() == 1);
  CHECK(s.trace().back().after.empty());
}

TEST_CASE("selection suspends while the source is unresolved") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  // both links registered, neither source resolved
  for (const auto& l : s.entry().links) CHECK(s.fire_selection(l) == Outcome::Ok);
  CHECK(s.domain("d1").possible == ranks({1, 2}));
  CHECK(s.domain("d2").possible == ranks({1, 2}));
}

TEST_CASE("selection fires on exact resolution") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  REQUIRE(s.narrow("d1", ranks({1})) == Outcome::Ok);  // noun
  REQUIRE(s.fixpoint() == Outcome::Ok);
  CHECK(s.domain("d2").possible == ranks({1}));  // masc
}

TEST_CASE("covariance wake with no constraints changes nothing") {
  auto s = EngineState::init(test::load_fixture("den.cdl", "den"));
  REQUIRE(s.fire_covariance("d1") == Outcome::Ok);
  CHECK(s.trace().empty());
  CHECK(s.domain("d1").possible == ranks({1, 2}));
}

TEST_CASE("fixpoint on an empty agenda is the identity") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  const auto before = s.domain("d1").possible;
  REQUIRE(s.fixpoint() == Outcome::Ok);
  CHECK(s.domain("d1").possible == before);
  CHECK(s.trace().empty());
}

TEST_CASE("realize on the untouched den entry lists every disjunct") {
  auto s = EngineState::init(test::load_fixture("den.cdl", "den"));
  const Value out = s.realize();
  const Value expected = Value::fs(
      {{"spec",
        Value::fs({{"case", Value::resid("d1", {{1, Value::atom("acc")},
                                                {2, Value::atom("dat")}})},
                   {"index",
                    Value::fs({{"gen", Value::resid("d1", {{1, Value::atom("masc")},
                                                           {2, Value::anon()}})},
                               {"num", Value::resid("d1", {{1, Value::atom("sing")},
                                                           {2, Value::atom("plu")}})}})}})}});
  CHECK(equal(out, expected));
}

TEST_CASE("realize keeps residual disjunctions after partial resolution") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  REQUIRE(s.narrow("d2", ranks({1})) == Outcome::Ok);
  REQUIRE(s.fixpoint() == Outcome::Ok);
  const Value out = s.realize();
  auto head = get_path(out, *Path::parse("cat.head"));
  REQUIRE(head.status == PathStatus::Found);
  REQUIRE(head.value->is(ValueKind::Resid));
  CHECK(head.value->name() == "d1");
  CHECK(head.value->alternatives().size() == 2);
  auto gen = get_path(out, *Path::parse("index.gen"));
  CHECK(equal(*gen.value, Value::atom("masc")));
}

TEST_CASE("fully resolved mobile realizes the adjective reading") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"));
  REQUIRE(constrain(s, test::con("index.gen=fem")) == ConstrainStatus::Applied);
  const Value out = s.realize();
  CHECK(to_text(out) ==
        "(fs (cat (fs (head adj) (valence (fs (spr (fs)))))) (index (fs (gen fem))))");
}

TEST_CASE("orphaned inner names flip inactive instead of failing") {
  auto s = EngineState::init(test::load_fixture("suffix.cdl", "suffix"));
  REQUIRE(constrain(s, test::con("morph.ending=e")) == ConstrainStatus::Applied);
  CHECK(s.domain("d1").possible == ranks({1}));
  CHECK(s.domain("d2").status == DomainStatus::Inactive);
  CHECK(s.domain("d3").status == DomainStatus::Inactive);
  CHECK_FALSE(s.failed());
  // narrowing an inactive name is a no-op
  CHECK(s.narrow("d2", RankSet{}) == Outcome::Ok);
  CHECK_FALSE(s.failed());
  // and the realized AVM shows no trace of the dead subvariations
  CHECK(to_text(s.realize()) ==
        "(fs (morph (fs (stemm _) (ending e))) (index (fs (per first) (num sing))))");
}

TEST_CASE("trace events shrink strictly and respect the termination bound") {
  const Entry e = test::load_fixture("suffix_cd.cdl", "suffix-cd");
  auto s = EngineState::init(e);
  REQUIRE(constrain(s, test::con("morph.ending=t")) == ConstrainStatus::Applied);
  REQUIRE(constrain(s, test::con("index.per=second")) == ConstrainStatus::Applied);
  CHECK(s.domain("d4").possible == ranks({2}));
  for (const auto& ev : s.trace()) {
    CHECK(ev.after.size() < ev.before.size());
    for (Rank r : ev.after) CHECK(ev.before.count(r) == 1);
  }
  CHECK(static_cast<int>(s.trace().size()) <= narrowing_bound(e));
}

TEST_CASE("forward-only selection: pruning the target leaves the source alone") {
  const Entry e = test::parse_entry(
      "(entry fw (fs (x (disj s (ctrl a (-> t 2)) b)) (y (disj t m n))))");
  auto s = EngineState::init(e);
  REQUIRE(s.narrow("t", ranks({1})) == Outcome::Ok);  // excludes the link target rank
  REQUIRE(s.fixpoint() == Outcome::Ok);
  CHECK(s.domain("s").possible == ranks({1, 2}));

  auto closed = EngineState::init(e, {.logical_closure = true});
  REQUIRE(closed.narrow("t", ranks({1})) == Outcome::Ok);
  REQUIRE(closed.fixpoint() == Outcome::Ok);
  CHECK(closed.domain("s").possible == ranks({2}));
}

TEST_CASE("logical closure does not change the masc case") {
  auto s = EngineState::init(test::load_fixture("mobile.cdl", "mobile"),
                             {.logical_closure = true});
  REQUIRE(constrain(s, test::con("index.gen=masc")) == ConstrainStatus::Applied);
  CHECK(s.domain("d1").possible == ranks({1, 2}));
}

TEST_CASE("selection into an already-narrowed target fails cleanly") {
  const Entry e = test::parse_entry(
      "(entry fw (fs (x (disj s (ctrl a (-> t 2)) b)) (y (disj t m n))))");
  auto s = EngineState::init(e);
  REQUIRE(s.narrow("t", ranks({1})) == Outcome::Ok);
  REQUIRE(s.narrow("s", ranks({1})) == Outcome::Ok);  // resolves the source
  CHECK(s.fixpoint() == Outcome::Failed);
  CHECK(s.failure_name() == "t");
}
