#include <algorithm>
#include <cmath>
#include <string>

#include "msl/linalg.hpp"

namespace msl {
namespace {

constexpr Index kBlock = 64;
constexpr double kPivotTol = 1e-13;

// Unblocked left-looking factorization of the diagonal block starting at
// `offset`; pivots are checked against the global tolerance.
void factor_diagonal_block(Eigen::Ref<Matrix> a, Index offset, double tol) {
  const Index nb = a.rows();
  for (Index j = 0; j < nb; ++j) {
    double pivot = a(j, j) - a.row(j).head(j).squaredNorm();
    if (!(pivot > tol)) {
      throw Error(Errc::NotPositiveDefinite,
                  "pivot " + std::to_string(offset + j) + " is " + std::to_string(pivot),
                  static_cast<std::size_t>(offset + j));
    }
    const double ljj = std::sqrt(pivot);
    a(j, j) = ljj;
    if (j + 1 < nb) {
      a.col(j).tail(nb - j - 1).noalias() -= a.bottomLeftCorner(nb - j - 1, j) * a.row(j).head(j).transpose();
      a.col(j).tail(nb - j - 1) /= ljj;
    }
  }
}

}  // namespace

Matrix cholesky(const SymMatrix& m) {
  const Index n = m.order();
  Matrix a = m.dense();
  if (n == 0) return a;

  const double max_diag = a.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) {
    throw Error(Errc::NotPositiveDefinite, "nonpositive maximal diagonal entry", 0);
  }
  const double tol = kPivotTol * max_diag;

  // Right-looking blocked variant: factor panel, solve the column block,
  // update the trailing lower triangle.
  for (Index k = 0; k < n; k += kBlock) {
    const Index kb = std::min(kBlock, n - k);
    factor_diagonal_block(a.block(k, k, kb, kb), k, tol);
    const Index rest = n - k - kb;
    if (rest > 0) {
      auto l11 = a.block(k, k, kb, kb).triangularView<Eigen::Lower>();
      auto a21 = a.block(k + kb, k, rest, kb);
      l11.transpose().solveInPlace<Eigen::OnTheRight>(a21);
      a.block(k + kb, k + kb, rest, rest).selfadjointView<Eigen::Lower>().rankUpdate(a21, -1.0);
    }
  }
  a.triangularView<Eigen::StrictlyUpper>().setZero();
  return a;
}

Vector cholesky_solve(const Matrix& lower, const Vector& rhs) {
  if (lower.rows() != rhs.size()) throw Error(Errc::DimensionMismatch, "rhs size mismatch");
  Vector x = lower.triangularView<Eigen::Lower>().solve(rhs);
  lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

}  // namespace msl
