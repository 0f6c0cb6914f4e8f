#pragma once

// Trajectory simulation and seeded Monte-Carlo estimation of hitting
// probabilities under taboo. Holding times are exponential with the row
// exit rate, jumps follow the embedded kernel, and row defect realizes as
// escape through the truncated boundary. The taboo binds strictly after
// the first exit from the start state: only landed states are checked.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "taboo/chain.hpp"
#include "taboo/philox.hpp"
#include "taboo/value_iteration.hpp"

namespace taboo {

struct TrajectorySample {
  enum class Terminal { HitTarget, HitTaboo, Escaped, HorizonExceeded };

  std::uint64_t seed = 0;
  std::vector<std::pair<double, std::size_t>> jumps;  // (time, state index); starts at (0, from)
  Terminal terminal = Terminal::HorizonExceeded;
  double terminal_time = 0.0;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t horizon_censored = 0;
};

/// Estimate for the after-first-exit clock, with the empirical mass of the
/// zero hitting time (first jump straight onto the target).
struct AfterExitEstimate {
  Estimate estimate;
  double zero_time_fraction = 0.0;
};

inline double default_horizon(const Generator& gen) {
  double slowest = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < gen.size(); ++x) slowest = std::min(slowest, gen.exit_rate(x));
  return 50.0 / slowest;
}

namespace detail {

struct KernelRows {
  // Per row: (cumulative probability, target), ordered by target index.
  std::vector<std::vector<std::pair<double, std::size_t>>> cumulative;

  explicit KernelRows(const Generator& gen) {
    const JumpKernel kernel = embedded_chain(gen);
    cumulative.resize(kernel.rows.size());
    for (std::size_t x = 0; x < kernel.rows.size(); ++x) {
      double cum = 0.0;
      for (const auto& [z, p] : kernel.rows[x]) {
        cum += p;
        cumulative[x].emplace_back(cum, z);
      }
      // zero-defect rows never escape: absorb summation roundoff
      if (kernel.defect[x] == 0.0 && !cumulative[x].empty())
        cumulative[x].back().first = std::max(cumulative[x].back().first, 1.0);
    }
  }
};

struct TrialOutcome {
  TrajectorySample::Terminal terminal = TrajectorySample::Terminal::HorizonExceeded;
  double time = 0.0;             // terminal time on the absolute clock
  double first_exit_time = 0.0;  // time of the first jump
  bool first_jump_on_target = false;
};

// One query trial. With `after_exit_clock` the horizon counts from the
// first exit instead of from zero.
inline TrialOutcome run_trial(const Generator& gen, const KernelRows& rows, std::size_t from,
                              std::size_t to, const std::vector<char>& in_taboo,
                              TrialStream& stream, double horizon, bool after_exit_clock) {
  TrialOutcome outcome;
  std::size_t cur = from;
  double t = 0.0;
  double deadline = after_exit_clock ? std::numeric_limits<double>::infinity() : horizon;
  bool first = true;
  while (true) {
    t += stream.exponential(gen.exit_rate(cur));
    if (first && after_exit_clock) deadline = t + horizon;
    if (t > deadline) {
      outcome.terminal = TrajectorySample::Terminal::HorizonExceeded;
      outcome.time = deadline;
      return outcome;
    }
    const double u = stream.uniform();
    std::size_t next = gen.size();  // sentinel: escaped
    for (const auto& [cum, z] : rows.cumulative[cur]) {
      if (u < cum) {
        next = z;
        break;
      }
    }
    if (first) {
      outcome.first_exit_time = t;
      outcome.first_jump_on_target = next == to;
      first = false;
    }
    if (next == gen.size()) {
      outcome.terminal = TrajectorySample::Terminal::Escaped;
      outcome.time = t;
      return outcome;
    }
    if (next == to) {
      outcome.terminal = TrajectorySample::Terminal::HitTarget;
      outcome.time = t;
      return outcome;
    }
    if (in_taboo[next]) {
      outcome.terminal = TrajectorySample::Terminal::HitTaboo;
      outcome.time = t;
      return outcome;
    }
    cur = next;
  }
}

}  // namespace detail

/// Raw trajectory from a fixed seed: runs to the horizon, no target or
/// taboo stopping. Fixed seeds replay bit-identical paths.
inline TrajectorySample simulate_trajectory(const Generator& gen, const std::string& from,
                                            std::uint64_t seed, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const detail::KernelRows rows(gen);
  TrialStream stream(seed, 0);
  TrajectorySample sample;
  sample.seed = seed;
  std::size_t cur = gen.states().index(from);
  sample.jumps.emplace_back(0.0, cur);
  double t = 0.0;
  while (true) {
    t += stream.exponential(gen.exit_rate(cur));
    if (t > horizon) {
      sample.terminal = TrajectorySample::Terminal::HorizonExceeded;
      sample.terminal_time = horizon;
      return sample;
    }
    const double u = stream.uniform();
    std::size_t next = gen.size();
    for (const auto& [cum, z] : rows.cumulative[cur]) {
      if (u < cum) {
        next = z;
        break;
      }
    }
    if (next == gen.size()) {
      sample.terminal = TrajectorySample::Terminal::Escaped;
      sample.terminal_time = t;
      return sample;
    }
    sample.jumps.emplace_back(t, next);
    cur = next;
  }
}

/// Seeded estimator of the probability that the hitting time is finite.
/// Censored trials count as failures, so with nonzero censoring the mean
/// is a lower bound; the censored count is reported alongside.
inline Estimate estimate_hitting(const Generator& gen, const HittingQuery& query,
                                 std::uint64_t trials, std::uint64_t seed, double horizon = 0.0) {
  if (trials == 0) throw std::invalid_argument("at least one trial required");
  if (horizon <= 0.0) horizon = default_horizon(gen);
  const ResolvedQuery q = resolve(gen, query);
  const detail::KernelRows rows(gen);

  std::uint64_t successes = 0;
  std::uint64_t censored = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    TrialStream stream(seed, trial);
    const auto outcome = detail::run_trial(gen, rows, q.from, q.to, q.in_taboo, stream, horizon, false);
    if (outcome.terminal == TrajectorySample::Terminal::HitTarget) ++successes;
    if (outcome.terminal == TrajectorySample::Terminal::HorizonExceeded) ++censored;
  }
  Estimate est;
  est.trials = trials;
  est.horizon_censored = censored;
  est.mean = static_cast<double>(successes) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(trials));
  return est;
}

/// Same success events on the clock started at the first exit, plus the
/// empirical frequency of an immediate hit (first jump lands on the target).
inline AfterExitEstimate estimate_hitting_after_exit(const Generator& gen, const HittingQuery& query,
                                                     std::uint64_t trials, std::uint64_t seed,
                                                     double horizon = 0.0) {
  if (trials == 0) throw std::invalid_argument("at least one trial required");
  if (horizon <= 0.0) horizon = default_horizon(gen);
  const ResolvedQuery q = resolve(gen, query);
  const detail::KernelRows rows(gen);

  std::uint64_t successes = 0;
  std::uint64_t censored = 0;
  std::uint64_t zero_hits = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    TrialStream stream(seed, trial);
    const auto outcome = detail::run_trial(gen, rows, q.from, q.to, q.in_taboo, stream, horizon, true);
    if (outcome.terminal == TrajectorySample::Terminal::HitTarget) {
      ++successes;
      if (outcome.first_jump_on_target) ++zero_hits;
    }
    if (outcome.terminal == TrajectorySample::Terminal::HorizonExceeded) ++censored;
  }
  AfterExitEstimate result;
  result.estimate.trials = trials;
  result.estimate.horizon_censored = censored;
  result.estimate.mean = static_cast<double>(successes) / static_cast<double>(trials);
  result.estimate.std_error =
      std::sqrt(result.estimate.mean * (1.0 - result.estimate.mean) / static_cast<double>(trials));
  result.zero_time_fraction = static_cast<double>(zero_hits) / static_cast<double>(trials);
  return result;
}

}  // namespace taboo
