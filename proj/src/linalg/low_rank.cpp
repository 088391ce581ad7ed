#include <string>

#include "msl/linalg.hpp"

namespace msl {

void LowRankUpdate::validate() const {
  const Index n = base.order();
  if (factors.rows() != n) {
    throw Error(Errc::DimensionMismatch, "factor rows " + std::to_string(factors.rows()) +
                                             " do not match base order " + std::to_string(n));
  }
  if (core.size() != factors.cols()) {
    throw Error(Errc::DimensionMismatch, "core length does not match factor columns");
  }
  if (n > 0 && factors.cols() >= n) {
    throw Error(Errc::RankTooLarge, "update rank must be smaller than the order");
  }
}

Vector LowRankUpdate::apply(const Vector& x) const {
  Vector y = base * x;
  if (rank() > 0) {
    const Vector t = core.cwiseProduct(factors.transpose() * x);
    y.noalias() += factors * t;
  }
  return y;
}

SymMatrix LowRankUpdate::dense() const {
  if (rank() == 0) return base;
  const Matrix update = factors * core.asDiagonal() * factors.transpose();
  return base + SymMatrix(update);
}

WoodburySolver::WoodburySolver(const LowRankUpdate& u) {
  u.validate();
  n_ = u.order();
  diagonal_base_ = u.base.is_diagonal();
  if (diagonal_base_) {
    base_diag_ = u.base.diagonal_entries();
    for (Index i = 0; i < n_; ++i) {
      if (!(base_diag_(i) > 0.0)) {
        throw Error(Errc::NotPositiveDefinite, "diagonal base entry is not positive",
                    static_cast<std::size_t>(i));
      }
    }
  } else {
    base_factor_ = cholesky(u.base);
  }
  factors_ = u.factors;
  core_ = u.core;

  const Index r = u.rank();
  if (r == 0) return;
  base_inv_factors_.resize(n_, r);
  for (Index j = 0; j < r; ++j) base_inv_factors_.col(j) = base_solve(factors_.col(j));

  // (I + S V^T B^{-1} V) z = S V^T B^{-1} rhs; never forms S^{-1}.
  Matrix cap = core_.asDiagonal() * (factors_.transpose() * base_inv_factors_);
  cap.diagonal().array() += 1.0;
  capacitance_.compute(cap);
  if (!capacitance_.isInvertible()) {
    throw Error(Errc::SingularCore, "capacitance matrix of the low-rank update is singular");
  }
}

Vector WoodburySolver::base_solve(const Vector& rhs) const {
  if (diagonal_base_) return rhs.cwiseQuotient(base_diag_);
  return cholesky_solve(base_factor_, rhs);
}

Vector WoodburySolver::solve(const Vector& rhs) const {
  if (rhs.size() != n_) throw Error(Errc::DimensionMismatch, "rhs size mismatch");
  Vector x = base_solve(rhs);
  if (factors_.cols() == 0) return x;
  const Vector t = core_.cwiseProduct(factors_.transpose() * x);
  const Vector z = capacitance_.solve(t);
  x.noalias() -= base_inv_factors_ * z;
  return x;
}

Vector woodbury_solve(const LowRankUpdate& u, const Vector& rhs) {
  return WoodburySolver(u).solve(rhs);
}

}  // namespace msl
