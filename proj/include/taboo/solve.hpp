#pragma once

// Linear solves against the negated (restricted) generator. One solver
// instance owns one factorization of -A over a kept index set and answers
// many right-hand sides. Every solution is residual-checked; singular
// systems surface as NumericalError instead of garbage.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "taboo/chain.hpp"

namespace taboo {

constexpr double kResidualTol = 1e-10;   // max-norm residual accepted per solve
constexpr double kRcondFloor = 1e-13;    // below this the system counts as singular
constexpr std::size_t kDenseLimit = 500; // direct dense LU up to here, sparse LU above

class OccupancySolver {
 public:
  /// Factorizes -A restricted to `keep` (ascending original indices).
  OccupancySolver(const Generator& gen, std::vector<std::size_t> keep)
      : keep_(std::move(keep)), dense_(keep_.size() <= kDenseLimit) {
    const auto m = static_cast<Eigen::Index>(keep_.size());
    if (m == 0) throw std::invalid_argument("empty restricted system");
    std::vector<std::size_t> local(gen.size(), kNone);
    for (std::size_t r = 0; r < keep_.size(); ++r) local[keep_[r]] = r;

    if (dense_) {
      neg_a_dense_ = Eigen::MatrixXd::Zero(m, m);
      for (std::size_t r = 0; r < keep_.size(); ++r) {
        neg_a_dense_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r)) =
            -gen.diagonal(keep_[r]);
        for (const auto& [y, rate] : gen.row(keep_[r]))
          if (local[y] != kNone)
            neg_a_dense_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(local[y])) = -rate;
      }
      dense_lu_ = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(neg_a_dense_);
      if (!(dense_lu_->rcond() > kRcondFloor))
        throw NumericalError("singular restricted generator: taboo Green diverges");
    } else {
      std::vector<Eigen::Triplet<double>> triplets;
      for (std::size_t r = 0; r < keep_.size(); ++r) {
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(r), -gen.diagonal(keep_[r]));
        for (const auto& [y, rate] : gen.row(keep_[r]))
          if (local[y] != kNone)
            triplets.emplace_back(static_cast<int>(r), static_cast<int>(local[y]), -rate);
      }
      neg_a_sparse_.resize(m, m);
      neg_a_sparse_.setFromTriplets(triplets.begin(), triplets.end());
      neg_a_sparse_.makeCompressed();
      sparse_lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
      sparse_lu_->compute(neg_a_sparse_);
      if (sparse_lu_->info() != Eigen::Success)
        throw NumericalError("singular restricted generator: taboo Green diverges");
    }
  }

  std::size_t dim() const { return keep_.size(); }
  const std::vector<std::size_t>& kept() const { return keep_; }

  /// Solves (-A|keep) x = rhs and enforces the residual bound.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x;
    if (dense_)
      x = dense_lu_->solve(rhs);
    else
      x = sparse_lu_->solve(rhs);
    const double residual = dense_
                                ? (neg_a_dense_ * x - rhs).cwiseAbs().maxCoeff()
                                : (neg_a_sparse_ * x - rhs).cwiseAbs().maxCoeff();
    if (!(residual <= kResidualTol))
      throw NumericalError("linear solve residual " + std::to_string(residual) +
                           " exceeds tolerance: taboo Green diverges");
    return x;
  }

  /// Column `local_col` of (-A|keep)^{-1}.
  Eigen::VectorXd solve_unit(std::size_t local_col) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
    rhs(static_cast<Eigen::Index>(local_col)) = 1.0;
    return solve(rhs);
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::vector<std::size_t> keep_;
  bool dense_;
  Eigen::MatrixXd neg_a_dense_;
  std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_lu_;
  Eigen::SparseMatrix<double> neg_a_sparse_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> sparse_lu_;
};

namespace detail {

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> keep(n);
  for (std::size_t i = 0; i < n; ++i) keep[i] = i;
  return keep;
}

inline std::vector<std::size_t> indices_excluding(std::size_t n, const std::vector<char>& drop) {
  std::vector<std::size_t> keep;
  keep.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) keep.push_back(i);
  return keep;
}

}  // namespace detail

}  // namespace taboo
