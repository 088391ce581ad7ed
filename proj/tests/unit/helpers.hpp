#pragma once

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "msl/fem.hpp"
#include "msl/linalg.hpp"
#include "msl/scaling.hpp"

namespace testing {

using msl::Index;
using msl::Matrix;
using msl::SymMatrix;
using msl::Vector;

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = d(rng);
  return m;
}

inline SymMatrix random_spd(Index n, std::mt19937_64& rng, double shift = 1.0) {
  const Matrix g = random_matrix(n, n, rng);
  return SymMatrix(g * g.transpose() + shift * Matrix::Identity(n, n));
}

inline SymMatrix random_symmetric(Index n, std::mt19937_64& rng) {
  const Matrix g = random_matrix(n, n, rng);
  return SymMatrix(0.5 * (g + g.transpose()));
}

/// Reference generalized eigenvalues from Eigen's own solver.
inline Vector oracle_eigenvalues(const Matrix& a, const Matrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, b, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}
/// Same, refined by Rayleigh quotients of the oracle's own eigenvectors, so
/// that eigenvalues far below the largest keep their relative accuracy.
inline Vector oracle_refined_eigenvalues(const Matrix& a, const Matrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, b);
  const Matrix& u = es.eigenvectors();
  Vector out(u.cols());
  for (Index j = 0; j < u.cols(); ++j) out(j) = u.col(j).dot(a * u.col(j)) / u.col(j).dot(b * u.col(j));
  return out;
}
inline Vector oracle_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline msl::fem::Material steel() { return {207e9, 0.3, 7800.0}; }

/// The 1 x 1 x 1e-3 m element used throughout the element studies.
inline msl::fem::ElementBlock thin_element() {
  const auto mesh = msl::fem::build_structured_mesh({2, 2, 2}, {1.0, 1.0, 1e-3});
  return msl::fem::build_element_blocks(mesh, steel()).front();
}

inline msl::scaling::FeSystem small_plate(std::array<Index, 3> nodes = {5, 3, 3},
                                          std::array<double, 3> extents = {0.04, 0.02, 0.01}) {
  return msl::scaling::FeSystem::from_mesh(msl::fem::build_structured_mesh(nodes, extents), steel());
}

}  // namespace testing
