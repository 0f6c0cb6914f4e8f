#pragma once

// The probability that the hitting time of a target under a taboo set is
// finite, by each closed-form route: occupation-time ratios for nonempty
// taboos, the first-step linear system, the empty-taboo recurrent/transient
// split, and the Green-ratio shortcut for singleton taboos on transient
// representations.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "taboo/chain.hpp"
#include "taboo/green.hpp"
#include "taboo/solve.hpp"
#include "taboo/value_iteration.hpp"

namespace taboo {

enum class Method { Theorem1, FirstStep, Theorem3, BaseEmptyTaboo, Reduction, ValueIteration, MonteCarlo };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Theorem1: return "theorem1";
    case Method::FirstStep: return "firststep";
    case Method::Theorem3: return "theorem3";
    case Method::BaseEmptyTaboo: return "base";
    case Method::Reduction: return "reduce";
    case Method::ValueIteration: return "vi";
    case Method::MonteCarlo: return "mc";
  }
  return "unknown";
}

/// One step of an iterative taboo reduction, kept for auditability.
struct ReductionStep {
  enum class Action { AddTaboo, RemoveStartTaboo };
  Action action = Action::AddTaboo;
  std::string added_state;                                  // AddTaboo only
  std::vector<std::pair<HittingQuery, double>> inputs;      // values consumed
  std::pair<HittingQuery, double> output;
};

struct HittingResult {
  HittingQuery query;  // normalized: the target never appears in the taboo
  double value = 0.0;
  Method method = Method::Theorem1;
  std::vector<ReductionStep> trace;
};

namespace detail {

// Range gate before clamping: a probability outside [0,1] by more than the
// slack is a solver bug and must surface, not be clamped away. Return
// probabilities (from == to, off taboo) are strictly below one.
inline double finalize_probability(double value, bool strict_upper, const char* context) {
  constexpr double kSlack = 1e-9;
  if (!std::isfinite(value) || value < -kSlack || value > 1.0 + kSlack)
    throw NumericalError(std::string(context) + ": probability " + std::to_string(value) +
                         " outside [0,1] beyond slack");
  if (strict_upper && value >= 1.0)
    throw NumericalError(std::string(context) + ": return probability must stay below 1");
  return std::min(1.0, std::max(0.0, value));
}

inline TabooSet taboo_from_indices(const Generator& gen, const std::vector<std::size_t>& indices) {
  TabooSet set;
  for (std::size_t i : indices) set.add(gen.states().label(i));
  return set;
}

}  // namespace detail

/// Hitting probabilities to `to` under a nonempty taboo for every start
/// state at once, from one occupation-time column: the off-diagonal values
/// are ratios against the column diagonal, the return probability comes
/// from the diagonal itself.
inline std::vector<double> theorem1_values(const Generator& gen, const TabooSet& taboo,
                                           const std::string& to) {
  const std::size_t y = gen.states().index(to);
  const TabooSet normalized = taboo.without(to);
  if (normalized.empty()) throw std::invalid_argument("ratio route needs a nonempty taboo set");
  const Eigen::VectorXd column = taboo_green_column(gen, normalized, to);
  const double occupancy_yy = column(static_cast<Eigen::Index>(y));
  if (!(occupancy_yy > 0.0))
    throw NumericalError("occupation time at the target vanished");

  std::vector<double> values(gen.size());
  for (std::size_t x = 0; x < gen.size(); ++x) {
    if (x == y) {
      values[x] = detail::finalize_probability(
          1.0 + 1.0 / (gen.diagonal(y) * occupancy_yy), true, "return probability");
    } else {
      values[x] = detail::finalize_probability(
          column(static_cast<Eigen::Index>(x)) / occupancy_yy, false, "hitting probability");
    }
  }
  return values;
}

/// Ratio route for a single query; requires a nonempty taboo after
/// normalization.
inline HittingResult hitting_prob_theorem1(const Generator& gen, const HittingQuery& query) {
  const ResolvedQuery q = resolve(gen, query);
  if (q.taboo.empty()) throw std::invalid_argument("ratio route needs a nonempty taboo set");
  const TabooSet normalized = detail::taboo_from_indices(gen, q.taboo);
  const auto values = theorem1_values(gen, normalized, query.to);
  return {HittingQuery{query.from, query.to, normalized}, values[q.from], Method::Theorem1, {}};
}

struct FirstStepSolution {
  std::vector<double> values;      // over all states, declaration order
  bool minimal_solution = false;   // solved by monotone iteration instead of LU
};

/// First-step linear system for all start states at once. Conservative
/// chains with an empty taboo take the minimal nonnegative solution; any
/// singular direct system falls back to it as well.
inline FirstStepSolution hitting_prob_firststep(const Generator& gen, const std::string& to,
                                                const TabooSet& taboo) {
  const std::size_t n = gen.size();
  const std::size_t y = gen.states().index(to);
  const TabooSet normalized = taboo.without(to);
  std::vector<char> in_taboo(n, 0);
  for (const auto& label : normalized.members()) in_taboo[gen.states().index(label)] = 1;

  FirstStepSolution solution;
  auto minimal = [&]() {
    // Tighter than the stand-alone iteration default: the stopping rule
    // bounds the step size, not the remaining error, and slow-mixing chains
    // inflate the gap by the contraction factor.
    auto vi = detail::value_iteration_hitting_idx(gen, y, in_taboo, 1e-14,
                                                  kValueIterationMaxIter);
    if (!vi.converged)
      throw NumericalError("minimal-solution iteration did not converge");
    solution.values = std::move(vi.values);
    solution.minimal_solution = true;
  };

  if (gen.conservative() && normalized.empty()) {
    minimal();
  } else {
    std::vector<std::size_t> core;
    std::vector<std::size_t> local(n, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < n; ++i)
      if (i != y && !in_taboo[i]) {
        local[i] = core.size();
        core.push_back(i);
      }
    try {
      std::vector<double> full(n, 0.0);
      if (!core.empty()) {
        OccupancySolver solver(gen, core);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(core.size()));
        for (std::size_t r = 0; r < core.size(); ++r)
          rhs(static_cast<Eigen::Index>(r)) = gen.rate(core[r], y);
        const Eigen::VectorXd f = solver.solve(rhs);
        for (std::size_t r = 0; r < core.size(); ++r)
          full[core[r]] = f(static_cast<Eigen::Index>(r));
      }
      // Rows outside the core (the target and the taboo states) follow by
      // one jump into the core or straight onto the target.
      for (std::size_t x = 0; x < n; ++x) {
        if (local[x] != static_cast<std::size_t>(-1)) continue;
        const double q = gen.exit_rate(x);
        double v = x == y ? 0.0 : gen.rate(x, y) / q;
        for (const auto& [z, rate] : gen.row(x))
          if (local[z] != static_cast<std::size_t>(-1)) v += (rate / q) * full[z];
        full[x] = v;
      }
      solution.values = std::move(full);
    } catch (const NumericalError&) {
      minimal();
    }
  }
  // No strict upper gate here: on reducible inputs the return probability
  // can legitimately reach 1 (a closed class the taboo never touches). The
  // ratio route reports those as divergent; this route answers them.
  for (std::size_t x = 0; x < n; ++x)
    solution.values[x] =
        detail::finalize_probability(solution.values[x], false, "first-step hitting probability");
  return solution;
}

/// Max residual of a candidate solution against the first-step equations;
/// the verification side of the system above.
inline double firststep_residual(const Generator& gen, const std::string& to, const TabooSet& taboo,
                                 const std::vector<double>& values) {
  const std::size_t y = gen.states().index(to);
  const TabooSet normalized = taboo.without(to);
  std::vector<char> in_taboo(gen.size(), 0);
  for (const auto& label : normalized.members()) in_taboo[gen.states().index(label)] = 1;

  double max_residual = 0.0;
  for (std::size_t x = 0; x < gen.size(); ++x) {
    const double q = gen.exit_rate(x);
    double rhs = x == y ? 0.0 : gen.rate(x, y) / q;
    for (const auto& [z, rate] : gen.row(x))
      if (z != y && !in_taboo[z]) rhs += (rate / q) * values[z];
    max_residual = std::max(max_residual, std::abs(values[x] - rhs));
  }
  return max_residual;
}

/// Empty-taboo base case: recurrent chains hit everything almost surely,
/// transient representations take Green-function ratios.
inline HittingResult hitting_prob_base(const Generator& gen, const std::string& from,
                                       const std::string& to) {
  const std::size_t x = gen.states().index(from);
  const std::size_t y = gen.states().index(to);
  HittingResult result{HittingQuery{from, to, {}}, 1.0, Method::BaseEmptyTaboo, {}};
  if (is_recurrent(gen)) return result;

  const Eigen::MatrixXd cols = green_columns(gen, {y});
  const double g_yy = cols(static_cast<Eigen::Index>(y), 0);
  if (!(g_yy > 0.0)) throw NumericalError("Green diagonal vanished");
  const double value = x == y ? 1.0 + 1.0 / (gen.diagonal(y) * g_yy)
                              : cols(static_cast<Eigen::Index>(x), 0) / g_yy;
  result.value = detail::finalize_probability(value, x == y, "empty-taboo hitting probability");
  return result;
}

/// Singleton-taboo shortcut for transient representations: everything in
/// terms of four Green-function entries per query.
inline HittingResult singleton_taboo_transient(const Generator& gen, const std::string& from,
                                               const std::string& to, const std::string& taboo_state) {
  const std::size_t x = gen.states().index(from);
  const std::size_t y = gen.states().index(to);
  const std::size_t z = gen.states().index(taboo_state);
  if (z == y) throw std::invalid_argument("taboo state must differ from the target");
  if (gen.conservative())
    throw std::invalid_argument("Green-ratio route needs a transient (non-conservative) representation");

  const Eigen::MatrixXd cols = green_columns(gen, {y, z});
  auto g = [&](std::size_t row, int c) { return cols(static_cast<Eigen::Index>(row), c); };
  const double g_yy = g(y, 0), g_zy = g(z, 0), g_yz = g(y, 1), g_zz = g(z, 1);
  const double denom = g_yy * g_zz - g_yz * g_zy;
  if (denom <= 1e-14 * std::max(1.0, std::abs(g_yy * g_zz)))
    throw NumericalError("Green-ratio denominator degenerate");

  double value;
  if (x == y) {
    value = 1.0 + g_zz / (gen.diagonal(y) * denom);
  } else if (x == z) {
    value = -g_zy / (gen.diagonal(z) * denom);
  } else {
    value = (g(x, 0) * g_zz - g(x, 1) * g_zy) / denom;
  }
  HittingResult result{HittingQuery{from, to, TabooSet({taboo_state})}, 0.0, Method::Theorem3, {}};
  result.value = detail::finalize_probability(value, true, "singleton-taboo hitting probability");
  return result;
}

}  // namespace taboo
