#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "taboo/chain.hpp"

using namespace taboo;

namespace {

const char* kTwoState = R"(# two-state chain
states: a b
conservative: true
rate: a b 1
rate: b a 2
)";

const char* kTriangle = R"(states: 0 1 2
conservative: true
rate: 0 1 0.5
rate: 0 2 0.5
rate: 1 0 0.5
rate: 1 2 0.5
rate: 2 0 0.5
rate: 2 1 0.5
)";

}  // namespace

TEST_CASE("parse derives diagonals for conservative chains") {
  const Generator gen = parse_chain(kTwoState);
  REQUIRE(gen.size() == 2);
  CHECK(gen.conservative());
  CHECK(gen.diagonal(gen.states().index("a")) == Catch::Approx(-1.0));
  CHECK(gen.diagonal(gen.states().index("b")) == Catch::Approx(-2.0));
  CHECK(gen.rate(0, 1) == 1.0);
  CHECK(gen.rate(1, 0) == 2.0);
}

TEST_CASE("parse rejects malformed files") {
  CHECK_THROWS_AS(parse_chain("states: a a\nconservative: true\nrate: a a 1\n"), ParseError);
  CHECK_THROWS_WITH(parse_chain("states: a b\nconservative: true\nrate: a b -0.5\nrate: b a 1\n"),
                    Catch::Matchers::ContainsSubstring("negative rate"));
  CHECK_THROWS_AS(parse_chain("states: a b\nconservative: true\nrate: a c 1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_chain("states: a b\nconservative: true\nrate: a b 1\ndiag: a 0\nrate: b a 1\n"),
                  ParseError);
  // row sum violation: declared conservative with an explicit defective diag
  CHECK_THROWS_AS(parse_chain("states: a b\nconservative: true\nrate: a b 1\ndiag: a -2\nrate: b a 1\n"),
                  ParseError);
  // declared non-conservative but all rows balance
  CHECK_THROWS_AS(parse_chain("states: a b\nconservative: false\nrate: a b 1\nrate: b a 1\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_chain("states: a\nconservative: true\n"), ParseError);
}

TEST_CASE("complete 3-graph has unit diagonals") {
  const Generator gen = parse_chain(kTriangle);
  for (std::size_t x = 0; x < 3; ++x) CHECK(gen.diagonal(x) == Catch::Approx(-1.0));
}

TEST_CASE("validate reports irreducibility and defect rows") {
  SECTION("directed 3-cycle is irreducible") {
    const Generator gen = parse_chain(
        "states: a b c\nconservative: true\nrate: a b 1\nrate: b c 1\nrate: c a 1\n");
    CHECK(validate(gen).irreducible);
    CHECK(validate(gen).defect_rows.empty());
  }
  SECTION("absorbing-boundary row is flagged") {
    const Generator gen = parse_chain(
        "states: a b\nconservative: false\nrate: a b 1\nrate: b a 1\ndiag: b -2\n");
    const auto report = validate(gen);
    CHECK_FALSE(report.conservative);
    REQUIRE(report.defect_rows.size() == 1);
    CHECK(gen.states().label(report.defect_rows[0]) == "b");
  }
  SECTION("two disconnected 2-cycles are reducible") {
    const Generator gen = parse_chain(
        "states: a b c d\nconservative: true\nrate: a b 1\nrate: b a 1\nrate: c d 1\nrate: d c 1\n");
    CHECK_FALSE(validate(gen).irreducible);
  }
}

TEST_CASE("embedded chain normalizes rows and exposes defect") {
  SECTION("single exit") {
    const Generator gen = parse_chain("states: x y\nconservative: false\nrate: x y 2\ndiag: y -1\n");
    const JumpKernel kernel = embedded_chain(gen);
    REQUIRE(kernel.rows[0].size() == 1);
    CHECK(kernel.rows[0][0].second == Catch::Approx(1.0));
    CHECK(kernel.defect[0] == Catch::Approx(0.0));
  }
  SECTION("half the mass escapes") {
    const Generator gen =
        parse_chain("states: x y\nconservative: false\nrate: x y 0.5\ndiag: x -1\nrate: y x 1\n");
    const JumpKernel kernel = embedded_chain(gen);
    CHECK(kernel.rows[0][0].second == Catch::Approx(0.5));
    CHECK(kernel.defect[0] == Catch::Approx(0.5));
  }
  SECTION("complete 3-graph splits evenly") {
    const Generator gen = parse_chain(kTriangle);
    const JumpKernel kernel = embedded_chain(gen);
    for (const auto& [_, p] : kernel.rows[0]) CHECK(p == Catch::Approx(0.5));
  }
}

TEST_CASE("kernel rows of conservative chains sum to one") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Generator gen = oracle::random_conservative_chain(seed, 5 + seed % 30);
    const JumpKernel kernel = embedded_chain(gen);
    for (std::size_t x = 0; x < gen.size(); ++x) {
      double sum = 0.0;
      for (const auto& [_, p] : kernel.rows[x]) sum += p;
      CHECK(sum == Catch::Approx(1.0).margin(1e-12));
      CHECK(kernel.defect[x] == 0.0);
    }
  }
}

TEST_CASE("restriction keeps off-taboo rates and diagonals") {
  const Generator gen = parse_chain(kTriangle);
  SECTION("empty taboo round-trips") {
    CHECK(restricted(gen, TabooSet{}) == gen);
  }
  SECTION("dropping one state leaves a defective pair") {
    const Generator sub = restricted(gen, TabooSet({"2"}));
    REQUIRE(sub.size() == 2);
    CHECK_FALSE(sub.conservative());
    CHECK(sub.rate(0, 1) == Catch::Approx(0.5));
    CHECK(sub.diagonal(0) == Catch::Approx(-1.0));
    CHECK(sub.defect_rate(0) == Catch::Approx(0.5));
    CHECK(sub.defect_rate(1) == Catch::Approx(0.5));
  }
  SECTION("taboo covering everything is rejected") {
    CHECK_THROWS_AS(restricted(gen, TabooSet({"0", "1", "2"})), std::invalid_argument);
  }
  SECTION("3-cycle keeps surviving edges") {
    const Generator cyc = parse_chain(
        "states: 0 1 2\nconservative: true\nrate: 0 1 1\nrate: 1 2 1\nrate: 2 0 1\n");
    const Generator sub = restricted(cyc, TabooSet({"2"}));
    CHECK(sub.rate(0, 1) == Catch::Approx(1.0));
    CHECK(sub.rate(1, 0) == 0.0);
    CHECK(sub.diagonal(1) == Catch::Approx(-1.0));
  }
}

TEST_CASE("exit time distribution") {
  const Generator gen = parse_chain(kTriangle);
  CHECK(exit_time_cdf(gen, "0", 0.0) == 0.0);
  CHECK(exit_time_cdf(gen, "0", 1e9) == Catch::Approx(1.0));
  const Generator two = parse_chain("states: a b\nconservative: true\nrate: a b 2\nrate: b a 1\n");
  CHECK(exit_time_cdf(two, "a", std::log(2.0) / 2.0) == Catch::Approx(0.5));
  CHECK_THROWS_AS(exit_time_cdf(gen, "0", -1.0), std::invalid_argument);
}

TEST_CASE("serialize then parse is the identity") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Generator gen = oracle::random_substochastic_chain(seed, 4 + seed % 12);
    const std::string text = serialize_chain(gen);
    const Generator reparsed = parse_chain(text);
    CHECK(reparsed == gen);
    CHECK(serialize_chain(reparsed) == text);
  }
}

TEST_CASE("query normalization drops the target from the taboo") {
  const Generator gen = parse_chain(kTriangle);
  const ResolvedQuery q = resolve(gen, HittingQuery{"0", "1", TabooSet({"1", "2"})});
  CHECK(q.target_dropped_from_taboo);
  REQUIRE(q.taboo.size() == 1);
  CHECK(gen.states().label(q.taboo[0]) == "2");
}
