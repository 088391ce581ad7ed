#include <algorithm>
#include <cmath>

#include "msl/analysis.hpp"

namespace msl::analysis {

namespace {
constexpr double kDegenerateTol = 1e-9;
}

bool ElementRayleighReport::permuted() const {
  for (Index k = rigid; k < static_cast<Index>(position.size()); ++k) {
    if (position[static_cast<std::size_t>(k)] != k) return true;
  }
  return false;
}

ElementRayleighReport element_rayleigh_report(const fem::ElementBlock& block,
                                              const scaling::ScalingSpec& spec) {
  const SymMatrix& k = block.stiffness;
  const SymMatrix& m = block.lumped_mass;
  const SymMatrix mbar = m + scaling::element_scaling(block, spec);
  const Index n = k.order();

  const EigDecomposition eig = generalized_eig(MatrixPair(k, m));
  ElementRayleighReport out;
  out.lambda = eig.values;
  out.scaled = generalized_eig(MatrixPair(k, mbar), EigJob::ValuesOnly).values;
  out.rigid = std::min(kElementRigidModes, n);
  out.q = Vector::Ones(n);
  out.mapped = out.lambda;
  out.residual = Vector::Zero(n);

  Matrix u = eig.vectors;
  const Matrix& mb = mbar.dense();
  for (Index start = out.rigid; start < n;) {
    Index end = start + 1;
    while (end < n && out.lambda(end) - out.lambda(end - 1) <= kDegenerateTol * std::abs(out.lambda(end))) ++end;
    const Index width = end - start;
    // u is M-orthonormal, so the restricted pencil (U^T Mbar U, I) is standard.
    const Matrix sub = u.middleCols(start, width).transpose() * mb * u.middleCols(start, width);
    const EigDecomposition rot = sym_eig(SymMatrix(0.5 * (sub + sub.transpose())));
    u.middleCols(start, width) = u.middleCols(start, width) * rot.vectors;
    for (Index j = 0; j < width; ++j) {
      const Vector col = u.col(start + j);
      out.q(start + j) = col.dot(mb * col) / col.dot(m * col);
    }
    start = end;
  }

  const double knorm = k.dense().norm();
  for (Index j = out.rigid; j < n; ++j) {
    out.mapped(j) = out.lambda(j) / out.q(j);
    const Vector col = u.col(j);
    out.residual(j) = (k * col - out.mapped(j) * (mbar * col)).norm() / (knorm * col.norm());
  }

  // Rank with ties (equal to kDegenerateTol) kept in mode order, so rounding
  // between equal values never reads as a permutation.
  out.position.assign(static_cast<std::size_t>(n), 0);
  for (Index a = 0; a < n; ++a) {
    const double tol = kDegenerateTol * std::abs(out.mapped(a));
    Index rank = 0;
    for (Index b = 0; b < n; ++b) {
      if (b == a) continue;
      const double d = out.mapped(b) - out.mapped(a);
      if (d < -tol || (std::abs(d) <= tol && b < a)) ++rank;
    }
    out.position[static_cast<std::size_t>(a)] = rank;
  }
  return out;
}

}  // namespace msl::analysis
