#pragma once

// Dense symmetric linear algebra: Cholesky, standard and generalized
// symmetric eigensolvers, low-rank (Woodbury) solves and matrix bounds.

#include <Eigen/Dense>

#include "msl/error.hpp"

namespace msl {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Construction checks symmetry (relative to the
/// largest entry) and finiteness, then stores the exact symmetric part so
/// that entries(i,j) == entries(j,i) bit for bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m, double symmetry_tol = 1e-10);

  static SymMatrix identity(Index n);
  static SymMatrix zero(Index n);
  static SymMatrix diagonal(const Vector& d);

  Index order() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& dense() const noexcept { return m_; }

  bool is_diagonal() const;
  Vector diagonal_entries() const { return m_.diagonal(); }
  double max_abs() const;

  Vector operator*(const Vector& x) const { return m_ * x; }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator*(double s, const SymMatrix& a);

 private:
  struct Trusted {};
  SymMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// Symmetric pair (A, B) of equal order. B is expected SPD; this is checked
/// when a factorization of B is actually needed.
struct MatrixPair {
  MatrixPair(SymMatrix a_, SymMatrix b_);

  SymMatrix a;
  SymMatrix b;

  Index order() const noexcept { return a.order(); }
};

enum class Normalization { UnitNorm, BOrthonormal };

enum class EigJob { ValuesOnly, ValuesAndVectors };

struct EigDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // columns; empty for EigJob::ValuesOnly
  Normalization normalization = Normalization::UnitNorm;

  bool has_vectors() const noexcept { return vectors.size() != 0; }
};

/// base + factors * diag(core) * factors^T
struct LowRankUpdate {
  SymMatrix base;
  Matrix factors;
  Vector core;

  Index order() const noexcept { return base.order(); }
  Index rank() const noexcept { return factors.cols(); }
  Vector apply(const Vector& x) const;
  SymMatrix dense() const;
  void validate() const;
};

/// Lower-triangular L with L L^T = m. Throws NotPositiveDefinite (with the
/// failing pivot index) when a pivot drops to or below 1e-13 * max diagonal.
Matrix cholesky(const SymMatrix& m);

Vector cholesky_solve(const Matrix& lower, const Vector& rhs);

EigDecomposition sym_eig(const SymMatrix& m, EigJob job = EigJob::ValuesAndVectors);

/// A u = lambda B u by Cholesky reduction to standard form. Vectors are
/// B-orthonormal.
EigDecomposition generalized_eig(const MatrixPair& p,
                                 EigJob job = EigJob::ValuesAndVectors);

/// u^T A u / u^T B u for each column u, accumulated in long double over the
/// nonzeros of A and B. Backward-stable solvers resolve small eigenvalues only
/// to about eps * lambda_max; with their eigenvectors this recovers them to
/// nearly full relative accuracy, since the quotient error is quadratic in the
/// vector error.
Vector rayleigh_quotients(const MatrixPair& p, const Matrix& vectors);

Vector woodbury_solve(const LowRankUpdate& u, const Vector& rhs);

/// Caches the base factorization and the r x r capacitance system so that
/// repeated solves with the same update cost two base solves and an r x r
/// back substitution. Zero core entries are allowed (no S^{-1} is formed).
class WoodburySolver {
 public:
  explicit WoodburySolver(const LowRankUpdate& u);

  Vector solve(const Vector& rhs) const;
  Index order() const noexcept { return n_; }

 private:
  Vector base_solve(const Vector& rhs) const;

  Index n_ = 0;
  bool diagonal_base_ = false;
  Vector base_diag_;
  Matrix base_factor_;
  Matrix factors_;
  Vector core_;
  Matrix base_inv_factors_;
  Eigen::FullPivLU<Matrix> capacitance_;
};

double gershgorin_max(const SymMatrix& m);

double condition_number(const SymMatrix& m);
double pair_condition(const MatrixPair& p);

}  // namespace msl
