#pragma once

// Taboo Green functions and the ordinary Green function. The matrix of
// expected occupation times under taboo H is the inverse of the negated
// sub-generator on S \ H; rows for states inside H follow by first-step
// decomposition over the embedded jump chain.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "taboo/chain.hpp"
#include "taboo/solve.hpp"

namespace taboo {

/// Expected occupation times under taboo, in units of chain time.
/// Rows cover all of S; columns cover S \ H only.
struct TabooGreenMatrix {
  TabooSet taboo;
  std::vector<std::string> row_labels;  // all states, declaration order
  std::vector<std::string> col_labels;  // S \ H, declaration order
  Eigen::MatrixXd values;               // values(row, col) = expected time at col from row
};

/// The ordinary Green function G(x,y): finite matrix for transient
/// (non-conservative) representations, divergent for recurrent chains.
struct GreenResult {
  bool recurrent = false;
  Eigen::MatrixXd matrix;  // empty when recurrent
};

namespace detail {

inline void check_occupancy_entry(double value, double exit_rate, bool diagonal) {
  if (!std::isfinite(value) || value < -1e-12)
    throw NumericalError("negative taboo Green entry: " + std::to_string(value));
  if (diagonal && value < 1.0 / exit_rate - 1e-9 * (1.0 + 1.0 / exit_rate))
    throw NumericalError("taboo Green diagonal below the first holding time");
}

// Extends an off-taboo occupancy column to taboo rows: one jump, then the
// column value at the landing state. The holding-time term never applies
// because the column state is off-taboo.
inline double taboo_row_value(const Generator& gen, std::size_t x,
                              const std::vector<std::size_t>& local,
                              const Eigen::VectorXd& column) {
  double total = 0.0;
  const double q = gen.exit_rate(x);
  for (const auto& [z, rate] : gen.row(x)) {
    if (local[z] != static_cast<std::size_t>(-1))
      total += (rate / q) * column(static_cast<Eigen::Index>(local[z]));
  }
  return total;
}

inline std::vector<std::size_t> local_index_map(std::size_t n, const std::vector<std::size_t>& keep) {
  std::vector<std::size_t> local(n, static_cast<std::size_t>(-1));
  for (std::size_t r = 0; r < keep.size(); ++r) local[keep[r]] = r;
  return local;
}

inline std::vector<std::size_t> resolve_taboo_indices(const Generator& gen, const TabooSet& taboo) {
  std::vector<char> drop(gen.size(), 0);
  for (const auto& label : taboo.members()) drop[gen.states().index(label)] = 1;
  return detail::indices_excluding(gen.size(), drop);
}

}  // namespace detail

/// One column of the taboo Green matrix: expected time at `col` before
/// hitting H, from every start state (taboo rows via first-step).
inline Eigen::VectorXd taboo_green_column(const Generator& gen, const TabooSet& taboo,
                                          const std::string& col) {
  if (taboo.empty()) throw std::invalid_argument("taboo set must be nonempty");
  if (taboo.contains(col)) throw std::invalid_argument("column state lies in the taboo set");
  const std::size_t y = gen.states().index(col);
  const auto keep = detail::resolve_taboo_indices(gen, taboo);
  const auto local = detail::local_index_map(gen.size(), keep);

  OccupancySolver solver(gen, keep);
  Eigen::VectorXd column = solver.solve_unit(local[y]);

  Eigen::VectorXd full(static_cast<Eigen::Index>(gen.size()));
  for (std::size_t x = 0; x < gen.size(); ++x) {
    double value = local[x] != static_cast<std::size_t>(-1)
                       ? column(static_cast<Eigen::Index>(local[x]))
                       : detail::taboo_row_value(gen, x, local, column);
    detail::check_occupancy_entry(value, gen.exit_rate(x), x == y);
    full(static_cast<Eigen::Index>(x)) = std::max(0.0, value);
  }
  return full;
}

/// Full taboo Green matrix over rows S and columns S \ H.
inline TabooGreenMatrix taboo_green(const Generator& gen, const TabooSet& taboo) {
  if (taboo.empty()) throw std::invalid_argument("taboo set must be nonempty");
  const auto keep = detail::resolve_taboo_indices(gen, taboo);
  const auto local = detail::local_index_map(gen.size(), keep);

  TabooGreenMatrix result;
  result.taboo = taboo;
  result.row_labels = gen.states().labels();
  for (std::size_t r : keep) result.col_labels.push_back(gen.states().label(r));
  result.values.resize(static_cast<Eigen::Index>(gen.size()), static_cast<Eigen::Index>(keep.size()));

  OccupancySolver solver(gen, keep);
  for (std::size_t c = 0; c < keep.size(); ++c) {
    Eigen::VectorXd column = solver.solve_unit(c);
    for (std::size_t x = 0; x < gen.size(); ++x) {
      double value = local[x] != static_cast<std::size_t>(-1)
                         ? column(static_cast<Eigen::Index>(local[x]))
                         : detail::taboo_row_value(gen, x, local, column);
      detail::check_occupancy_entry(value, gen.exit_rate(x), x == keep[c]);
      result.values(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(c)) =
          std::max(0.0, value);
    }
  }
  return result;
}

/// Recurrence test for validated irreducible generators: finite irreducible
/// conservative chains are recurrent, any truncation defect makes the
/// representation transient.
inline bool is_recurrent(const Generator& gen) {
  if (!detail::strongly_connected(gen))
    throw std::invalid_argument("reducible generator: recurrence is undefined");
  return gen.conservative();
}

/// Selected columns of G(x,y) for a transient representation.
inline Eigen::MatrixXd green_columns(const Generator& gen, const std::vector<std::size_t>& cols) {
  if (gen.conservative()) throw std::invalid_argument("Green function diverges on conservative chains");
  OccupancySolver solver(gen, detail::all_indices(gen.size()));
  Eigen::MatrixXd result(static_cast<Eigen::Index>(gen.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Eigen::VectorXd column = solver.solve_unit(cols[c]);
    for (std::size_t x = 0; x < gen.size(); ++x) {
      detail::check_occupancy_entry(column(static_cast<Eigen::Index>(x)), gen.exit_rate(x),
                                    x == cols[c]);
      result(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(c)) =
          std::max(0.0, column(static_cast<Eigen::Index>(x)));
    }
  }
  return result;
}

/// Dispatches on recurrence: Recurrent for conservative irreducible chains,
/// otherwise the full matrix G = (-A)^{-1}.
inline GreenResult green_function(const Generator& gen) {
  GreenResult result;
  if (gen.conservative()) {
    if (!detail::strongly_connected(gen))
      throw std::invalid_argument("conservative but reducible generator is rejected");
    result.recurrent = true;
    return result;
  }
  result.matrix = green_columns(gen, detail::all_indices(gen.size()));
  return result;
}

}  // namespace taboo
