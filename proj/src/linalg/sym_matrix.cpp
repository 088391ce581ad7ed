#include <cmath>
#include <string>

#include "msl/linalg.hpp"

namespace msl {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::SingularCore: return "SingularCore";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NonFinite: return "NonFinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidMaterial: return "InvalidMaterial";
    case Errc::DegenerateJacobian: return "DegenerateJacobian";
    case Errc::NegativeLumpedEntry: return "NegativeLumpedEntry";
    case Errc::InvalidCounts: return "InvalidCounts";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::MeshFormat: return "MeshFormat";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::DegenerateLFT: return "DegenerateLFT";
    case Errc::LostDefiniteness: return "LostDefiniteness";
    case Errc::NonDiagonalMass: return "NonDiagonalMass";
    case Errc::RankTooLarge: return "RankTooLarge";
    case Errc::DefectiveElementPair: return "DefectiveElementPair";
    case Errc::NoBoundForKind: return "NoBoundForKind";
    case Errc::NonUniformMesh: return "NonUniformMesh";
    case Errc::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case Errc::SolveFailure: return "SolveFailure";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

SymMatrix::SymMatrix(const Matrix& m, double symmetry_tol) {
  if (m.rows() != m.cols()) {
    throw Error(Errc::DimensionMismatch,
                "symmetric matrix must be square, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw Error(Errc::NonFinite, "matrix has non-finite entries");
  const double scale = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  const double asym = m.size() == 0 ? 0.0 : (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > symmetry_tol * scale) {
    throw Error(Errc::NotSymmetric, "asymmetry " + std::to_string(asym) +
                                        " exceeds tolerance relative to max entry " +
                                        std::to_string(scale));
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Index n) { return SymMatrix(Matrix::Identity(n, n), Trusted{}); }

SymMatrix SymMatrix::zero(Index n) { return SymMatrix(Matrix::Zero(n, n), Trusted{}); }

SymMatrix SymMatrix::diagonal(const Vector& d) {
  if (!d.allFinite()) throw Error(Errc::NonFinite, "diagonal has non-finite entries");
  return SymMatrix(Matrix(d.asDiagonal()), Trusted{});
}

bool SymMatrix::is_diagonal() const {
  for (Index j = 0; j < m_.cols(); ++j) {
    for (Index i = 0; i < m_.rows(); ++i) {
      if (i != j && m_(i, j) != 0.0) return false;
    }
  }
  return true;
}

double SymMatrix::max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  if (a.order() != b.order()) throw Error(Errc::DimensionMismatch, "order mismatch in sum");
  return SymMatrix(a.m_ + b.m_, SymMatrix::Trusted{});
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.order() != b.order()) throw Error(Errc::DimensionMismatch, "order mismatch in difference");
  return SymMatrix(a.m_ - b.m_, SymMatrix::Trusted{});
}

SymMatrix operator*(double s, const SymMatrix& a) {
  if (!std::isfinite(s)) throw Error(Errc::NonFinite, "non-finite scalar");
  return SymMatrix(s * a.m_, SymMatrix::Trusted{});
}

MatrixPair::MatrixPair(SymMatrix a_, SymMatrix b_) : a(std::move(a_)), b(std::move(b_)) {
  if (a.order() != b.order()) {
    throw Error(Errc::DimensionMismatch, "pair members have orders " + std::to_string(a.order()) +
                                             " and " + std::to_string(b.order()));
  }
}

}  // namespace msl
