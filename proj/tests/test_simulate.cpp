#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "taboo/hitting.hpp"
#include "taboo/lattice.hpp"
#include "taboo/philox.hpp"
#include "taboo/simulate.hpp"

using namespace taboo;

TEST_CASE("philox known-answer blocks") {
  // Reference vectors for the 10-round 4x32 configuration.
  const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);

  const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                               {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("substreams are independent of draw interleaving") {
  TrialStream a(42, 7);
  TrialStream b(42, 7);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
  TrialStream c(42, 8);
  CHECK(c.next_u64() != TrialStream(42, 7).next_u64());
  // uniforms stay inside their half-open ranges
  TrialStream d(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = d.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = d.uniform_positive();
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("trajectories") {
  SECTION("pure death escapes at an exponential time") {
    const Generator gen = parse_chain("states: x\nconservative: false\ndiag: x -1\n");
    const TrajectorySample sample = simulate_trajectory(gen, "x", 9, 1e9);
    CHECK(sample.terminal == TrajectorySample::Terminal::Escaped);
    CHECK(sample.terminal_time > 0.0);
    REQUIRE(sample.jumps.size() == 1);
    CHECK(sample.jumps[0].second == 0);
  }
  SECTION("conservative 2-state chain alternates") {
    const Generator gen = parse_chain("states: a b\nconservative: true\nrate: a b 1\nrate: b a 2\n");
    const TrajectorySample sample = simulate_trajectory(gen, "a", 5, 200.0);
    REQUIRE(sample.jumps.size() > 10);
    for (std::size_t i = 0; i + 1 < sample.jumps.size(); ++i) {
      CHECK(sample.jumps[i].second != sample.jumps[i + 1].second);
      CHECK(sample.jumps[i].first < sample.jumps[i + 1].first);
    }
  }
  SECTION("fixed seed replays bit-identical paths") {
    const Generator gen = oracle::complete_graph(3, 0.5);
    const TrajectorySample a = simulate_trajectory(gen, "0", 1234, 50.0);
    const TrajectorySample b = simulate_trajectory(gen, "0", 1234, 50.0);
    REQUIRE(a.jumps.size() == b.jumps.size());
    for (std::size_t i = 0; i < a.jumps.size(); ++i) {
      CHECK(a.jumps[i].first == b.jumps[i].first);
      CHECK(a.jumps[i].second == b.jumps[i].second);
    }
  }
}

TEST_CASE("hitting estimates against exact values") {
  SECTION("complete 3-graph under taboo") {
    const Generator gen = oracle::complete_graph(3, 0.5);
    const Estimate est = estimate_hitting(gen, {"0", "1", TabooSet({"2"})}, 100000, 7);
    CHECK(std::abs(est.mean - 0.5) <= 3.0 * est.std_error);
    CHECK(est.horizon_censored == 0);
  }
  SECTION("no trajectory can return through a full taboo") {
    const Generator gen = oracle::complete_graph(3, 0.5);
    const Estimate est = estimate_hitting(gen, {"0", "0", TabooSet({"1", "2"})}, 20000, 3);
    CHECK(est.mean == 0.0);
  }
  SECTION("gambler's ruin from 3") {
    const Generator ruin = build_birth_death(10, std::vector<double>(10, 0.5),
                                             std::vector<double>(10, 0.5));
    const Estimate est =
        estimate_hitting(ruin, {"3", "10", TabooSet({"0"})}, 100000, 11, 2000.0);
    CHECK(std::abs(est.mean - 0.3) <= 3.0 * est.std_error);
  }
  SECTION("identical inputs give bit-identical estimates") {
    const Generator gen = oracle::complete_graph(3, 0.5);
    const Estimate a = estimate_hitting(gen, {"0", "1", TabooSet({"2"})}, 5000, 99);
    const Estimate b = estimate_hitting(gen, {"0", "1", TabooSet({"2"})}, 5000, 99);
    CHECK(a.mean == b.mean);
    CHECK(a.horizon_censored == b.horizon_censored);
  }
  SECTION("doubling the horizon moves the mean less than two stderr") {
    const Generator gen = oracle::complete_graph(3, 0.5);
    const Estimate short_run = estimate_hitting(gen, {"0", "1", TabooSet({"2"})}, 50000, 5, 50.0);
    const Estimate long_run = estimate_hitting(gen, {"0", "1", TabooSet({"2"})}, 50000, 5, 100.0);
    CHECK(std::abs(short_run.mean - long_run.mean) < 2.0 * short_run.std_error + 1e-12);
  }
}

TEST_CASE("after-exit estimates") {
  const Generator gen = oracle::complete_graph(3, 0.5);
  SECTION("same success events as the absolute clock") {
    const Estimate absolute = estimate_hitting(gen, {"0", "1", TabooSet({"2"})}, 50000, 17);
    const AfterExitEstimate shifted =
        estimate_hitting_after_exit(gen, {"0", "1", TabooSet({"2"})}, 50000, 17);
    const double sigma = std::hypot(absolute.std_error, shifted.estimate.std_error);
    CHECK(std::abs(absolute.mean - shifted.estimate.mean) <= 3.0 * sigma + 1e-12);
  }
  SECTION("atom at zero matches the one-jump probability") {
    const AfterExitEstimate est =
        estimate_hitting_after_exit(gen, {"0", "1", TabooSet{}}, 100000, 23);
    // first jump lands on the target with probability rate(0,1)/exit(0) = 1/2
    const double p = 0.5;
    const double sigma = std::sqrt(p * (1.0 - p) / 100000.0);
    CHECK(std::abs(est.zero_time_fraction - p) <= 3.0 * sigma);
  }
  SECTION("no zero atom on return queries") {
    const AfterExitEstimate est =
        estimate_hitting_after_exit(gen, {"0", "0", TabooSet({"2"})}, 20000, 29);
    CHECK(est.zero_time_fraction == 0.0);
  }
}

TEST_CASE("value iteration") {
  SECTION("recurrent chains converge to one") {
    const Generator gen = oracle::random_conservative_chain(50, 12);
    const auto vi = value_iteration_hitting(gen, "4", TabooSet{});
    REQUIRE(vi.converged);
    for (std::size_t x = 0; x < gen.size(); ++x)
      CHECK(vi.values[x] == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("matches the exact solve under taboo") {
    const Generator gen = oracle::complete_graph(3, 0.5);
    const auto vi = value_iteration_hitting(gen, "1", TabooSet({"2"}));
    REQUIRE(vi.converged);
    CHECK(vi.values[0] == Catch::Approx(0.5).margin(1e-10));
  }
  SECTION("unreachable targets stay at zero") {
    const Generator gen = parse_chain(
        "states: a b c\nconservative: false\nrate: a b 1\nrate: b a 0.5\ndiag: b -1\n"
        "rate: c a 1\ndiag: c -1\n");
    // nothing flows from {a,b} into c
    const auto vi = value_iteration_hitting(gen, "c", TabooSet{});
    REQUIRE(vi.converged);
    CHECK(vi.values[0] == 0.0);
    CHECK(vi.values[1] == 0.0);
  }
  SECTION("default horizon scales with the slowest state") {
    const Generator gen = parse_chain("states: a b\nconservative: true\nrate: a b 0.5\nrate: b a 4\n");
    CHECK(default_horizon(gen) == Catch::Approx(100.0));
  }
}
