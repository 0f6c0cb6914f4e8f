#pragma once

// Fixed-point iteration for the first-step hitting system. Starting from
// zero the iterates increase monotonically to the minimal nonnegative
// solution, which is the hitting probability even when the linear system
// is singular (the recurrent, empty-taboo case).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "taboo/chain.hpp"

namespace taboo {

struct ValueIterationResult {
  std::vector<double> values;  // over all states, declaration order
  std::size_t iterations = 0;
  bool converged = false;
};

constexpr double kValueIterationTol = 1e-12;
constexpr std::size_t kValueIterationMaxIter = 1'000'000;

namespace detail {

inline ValueIterationResult value_iteration_hitting_idx(const Generator& gen, std::size_t y,
                                                        const std::vector<char>& in_taboo,
                                                        double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const std::size_t n = gen.size();
  const JumpKernel kernel = embedded_chain(gen);

  // Per row: probability of jumping straight to the target, and the
  // off-taboo transitions feeding the fixed point.
  std::vector<double> direct(n, 0.0);
  std::vector<std::vector<std::pair<std::size_t, double>>> feed(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (const auto& [z, p] : kernel.rows[x]) {
      if (z == y) {
        if (x != y) direct[x] = p;
      } else if (!in_taboo[z]) {
        feed[x].emplace_back(z, p);
      }
    }
  }

  ValueIterationResult result;
  result.values.assign(n, 0.0);
  std::vector<double> next(n, 0.0);
  for (std::size_t iter = 1; iter <= max_iter; ++iter) {
    double max_diff = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      double v = direct[x];
      for (const auto& [z, p] : feed[x]) v += p * result.values[z];
      if (v < result.values[x] - 1e-13 || v > 1.0 + 1e-12)
        throw NumericalError("value iteration left the monotone envelope");
      next[x] = v;
      max_diff = std::max(max_diff, v - result.values[x]);
    }
    result.values.swap(next);
    result.iterations = iter;
    if (max_diff <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace detail

/// Minimal nonnegative solution of the first-step system for hitting `to`
/// under `taboo`, by monotone iteration from zero.
inline ValueIterationResult value_iteration_hitting(const Generator& gen, const std::string& to,
                                                    const TabooSet& taboo,
                                                    double tol = kValueIterationTol,
                                                    std::size_t max_iter = kValueIterationMaxIter) {
  const std::size_t y = gen.states().index(to);
  std::vector<char> in_taboo(gen.size(), 0);
  for (const auto& label : taboo.members()) {
    const std::size_t i = gen.states().index(label);
    if (i != y) in_taboo[i] = 1;  // the target never stays in the taboo
  }
  return detail::value_iteration_hitting_idx(gen, y, in_taboo, tol, max_iter);
}

}  // namespace taboo
