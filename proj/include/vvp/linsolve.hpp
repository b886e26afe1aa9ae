// Sparse direct solver behind a deterministic assembly contract.
//
// Triplets are collapsed in a fixed order (column, row, value) before
// factorization, so the assembled matrix and the solution are bitwise
// reproducible regardless of insertion order.  Solves run through a sparse LU
// with column reordering plus a few steps of iterative refinement.
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace vvp {

class SparseSystem {
 public:
  explicit SparseSystem(int n) : n_(n) {}

  int size() const { return n_; }

  void add(int row, int col, double value) {
    if (row < 0 || row >= n_ || col < 0 || col >= n_)
      throw std::out_of_range("SparseSystem::add: index out of range");
    if (value != 0.0) triplets_.push_back({row, col, value});
    finalized_ = false;
  }

  /// Collapse duplicates in (column, row, value) order and build the matrix.
  /// Throws if a row or column has no entries, naming the offending index.
  void finalize() {
    if (finalized_) return;
    std::sort(triplets_.begin(), triplets_.end(), [](const Entry& a, const Entry& b) {
      if (a.col != b.col) return a.col < b.col;
      if (a.row != b.row) return a.row < b.row;
      return a.value < b.value;
    });
    std::vector<Eigen::Triplet<double>> unique;
    unique.reserve(triplets_.size());
    for (size_t i = 0; i < triplets_.size();) {
      size_t j = i;
      double sum = 0.0;
      while (j < triplets_.size() && triplets_[j].row == triplets_[i].row &&
             triplets_[j].col == triplets_[i].col) {
        sum += triplets_[j].value;
        ++j;
      }
      unique.emplace_back(triplets_[i].row, triplets_[i].col, sum);
      i = j;
    }
    std::vector<bool> row_hit(n_, false), col_hit(n_, false);
    for (const auto& t : unique) {
      row_hit[t.row()] = true;
      col_hit[t.col()] = true;
    }
    for (int i = 0; i < n_; ++i) {
      if (!row_hit[i])
        throw std::runtime_error("SparseSystem: structurally singular, empty row " + std::to_string(i));
      if (!col_hit[i])
        throw std::runtime_error("SparseSystem: structurally singular, empty column " +
                                 std::to_string(i));
    }
    matrix_.resize(n_, n_);
    matrix_.setFromTriplets(unique.begin(), unique.end());
    matrix_.makeCompressed();
    finalized_ = true;
    factored_ = false;
  }

  const Eigen::SparseMatrix<double>& matrix() {
    finalize();
    return matrix_;
  }

  /// y = A x with the finalized matrix.
  std::vector<double> apply(const std::vector<double>& x) {
    finalize();
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), n_);
    Eigen::VectorXd yv = matrix_ * xv;
    return {yv.data(), yv.data() + n_};
  }

  void factorize() {
    finalize();
    if (factored_) return;
    solver_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>();
    solver_->analyzePattern(matrix_);
    solver_->factorize(matrix_);
    if (solver_->info() != Eigen::Success)
      throw std::runtime_error("SparseSystem: LU factorization failed (singular matrix?)");
    factored_ = true;
  }

  /// Solve A x = b; factorizes on first use, then refines until the residual
  /// satisfies |r|_inf <= 1e-10 * max(1, |b|_inf) (at most three corrections).
  std::vector<double> solve(const std::vector<double>& b) {
    if (static_cast<int>(b.size()) != n_)
      throw std::invalid_argument("SparseSystem::solve: size mismatch");
    factorize();
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), n_);
    Eigen::VectorXd x = solver_->solve(bv);
    const double scale = std::max(1.0, bv.lpNorm<Eigen::Infinity>());
    for (int pass = 0; pass < 3; ++pass) {
      Eigen::VectorXd r = bv - matrix_ * x;
      if (r.lpNorm<Eigen::Infinity>() <= 1e-10 * scale) break;
      x += solver_->solve(r).eval();
    }
    Eigen::VectorXd r = bv - matrix_ * x;
    if (!(r.lpNorm<Eigen::Infinity>() <= 1e-10 * scale))
      throw std::runtime_error("SparseSystem: refinement stalled, residual " +
                               std::to_string(r.lpNorm<Eigen::Infinity>()));
    return {x.data(), x.data() + n_};
  }

 private:
  struct Entry {
    int row, col;
    double value;
  };

  int n_;
  std::vector<Entry> triplets_;
  Eigen::SparseMatrix<double> matrix_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> solver_;
  bool finalized_ = false;
  bool factored_ = false;
};

}  // namespace vvp
