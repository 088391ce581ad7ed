#include <cmath>
#include <string>

#include "msl/scaling.hpp"

namespace msl::scaling {
namespace {

constexpr double kRigidTol = 1e-8;

void require_definite(const SymMatrix& m, const char* what) {
  if (m.is_diagonal()) {
    const Vector d = m.diagonal_entries();
    for (Index i = 0; i < d.size(); ++i) {
      if (!(d(i) > 0.0)) throw Error(Errc::LostDefiniteness, what, static_cast<std::size_t>(i));
    }
    return;
  }
  try {
    (void)cholesky(m);
  } catch (const Error& err) {
    throw Error(Errc::LostDefiniteness, std::string(what) + ": " + err.what(), err.index());
  }
}

}  // namespace

ScaledSystem lft(const MatrixPair& pair, const Eigen::Matrix2d& w) {
  if (w.determinant() == 0.0) throw Error(Errc::DegenerateLFT, "LFT matrix W is singular");
  const SymMatrix& a = pair.a;
  const SymMatrix& b = pair.b;

  // Identity coefficients pass the operand through untouched so that an
  // unchanged K stays bit-identical.
  auto combine = [](double wa, const SymMatrix& x, double wb, const SymMatrix& y) {
    if (wa == 1.0 && wb == 0.0) return x;
    if (wa == 0.0 && wb == 1.0) return y;
    if (wa == 0.0) return wb * y;
    if (wb == 0.0) return wa * x;
    return wa * x + wb * y;
  };

  ScaledSystem out;
  out.kbar = combine(w(0, 0), a, w(1, 0), b);
  SymMatrix mbar = combine(w(0, 1), a, w(1, 1), b);
  require_definite(mbar, "transformed mass is not positive definite");
  out.mbar = std::move(mbar);
  out.provenance = w(0, 1) == 0.0 ? ScalingSpec::uniform_lft(w(1, 1))
                                  : ScalingSpec::stiffness_proportional(w(0, 1));
  return out;
}

ScaledSystem polynomial_sms(const SymMatrix& k, const SymMatrix& m_diag, double c) {
  if (!m_diag.is_diagonal()) {
    throw Error(Errc::NonDiagonalMass, "polynomial scaling needs a diagonal mass matrix");
  }
  if (k.order() != m_diag.order()) throw Error(Errc::DimensionMismatch, "K and M orders differ");
  if (!(c >= 0.0)) throw Error(Errc::InvalidParameter, "polynomial coefficient c must be >= 0");
  const Vector d = m_diag.diagonal_entries();
  for (Index i = 0; i < d.size(); ++i) {
    if (!(d(i) > 0.0)) {
      throw Error(Errc::NotPositiveDefinite, "diagonal mass entry is not positive", static_cast<std::size_t>(i));
    }
  }

  ScaledSystem out;
  out.kbar = k;
  out.provenance = ScalingSpec::polynomial(c);
  if (c == 0.0) {
    out.mbar = m_diag;
    return out;
  }
  // K M^{-1} K = (D K)^T (D K) with D = M^{-1/2}, symmetric by construction.
  const Matrix dk = d.cwiseSqrt().cwiseInverse().asDiagonal() * k.dense();
  Matrix kmk = Matrix::Zero(k.order(), k.order());
  kmk.selfadjointView<Eigen::Lower>().rankUpdate(dk.transpose(), c);
  kmk.triangularView<Eigen::StrictlyUpper>() = kmk.transpose();
  out.mbar = m_diag + SymMatrix(kmk);
  return out;
}

ScaledSystem global_deflation(const MatrixPair& pair, Index r, DeflationMode mode, double alpha,
                              const EigDecomposition* precomputed) {
  const Index n = pair.order();
  if (r < 0 || r >= n) {
    throw Error(Errc::RankTooLarge,
                "deflation rank " + std::to_string(r) + " must lie in [0, " + std::to_string(n) + ")");
  }
  if (mode == DeflationMode::Cutoff && !(alpha >= 0.0)) {
    throw Error(Errc::InvalidParameter, "cutoff alpha must be >= 0");
  }

  ScaledSystem out;
  out.kbar = pair.a;
  out.provenance = ScalingSpec::global_deflation(r, mode, alpha);
  LowRankUpdate update{pair.b, Matrix(n, 0), Vector(0)};
  if (r == 0) {
    out.mbar = std::move(update);
    return out;
  }

  EigDecomposition own;
  if (precomputed == nullptr) {
    own = generalized_eig(pair);
    precomputed = &own;
  }
  const EigDecomposition& eig = *precomputed;
  if (eig.values.size() != n || !eig.has_vectors() || eig.vectors.rows() != n ||
      eig.normalization != Normalization::BOrthonormal) {
    throw Error(Errc::DimensionMismatch, "precomputed decomposition does not match the pair");
  }

  const Index cut = n - r;
  const Vector top = eig.values.tail(r);
  Vector g(r);
  if (mode == DeflationMode::Shave) {
    const double threshold = eig.values(cut - 1);
    if (!(threshold > kRigidTol * std::abs(eig.values(n - 1)))) {
      throw Error(Errc::RankTooLarge,
                  "rank " + std::to_string(r) + " reaches the rigid-body eigenvalues");
    }
    g = top / threshold - Vector::Ones(r);
  } else {
    g.setConstant(alpha);
  }
  update.factors = pair.b.dense() * eig.vectors.rightCols(r);
  update.core = g;
  out.mbar = std::move(update);
  return out;
}

ScaledSystem apply(const FeSystem& fe, const ScalingSpec& spec, const EigDecomposition* precomputed) {
  spec.validate();
  ScaledSystem out;
  switch (spec.kind) {
    case ScalingKind::Cms:
      return cms(fe, spec.selector, spec.alpha);
    case ScalingKind::LocalDeflationS1:
    case ScalingKind::LocalDeflationS2:
      return local_deflation(fe, spec.rank, spec.kind, spec.alpha);
    case ScalingKind::Olovsson:
      return olovsson(fe, spec.beta, spec.olovsson_variant);
    case ScalingKind::Hoffmann:
      return hoffmann(fe, spec.beta);
    case ScalingKind::EigStabilization:
      return eig_stabilization(fe, spec.rank, spec.epsilon);
    case ScalingKind::UniformLft:
      out = lft(fe.pair(), (Eigen::Matrix2d() << 1, 0, 0, spec.mu).finished());
      break;
    case ScalingKind::StiffnessProportionalLft:
      out = lft(fe.pair(), (Eigen::Matrix2d() << 1, spec.mu, 0, 1).finished());
      break;
    case ScalingKind::PolynomialSms:
      out = polynomial_sms(fe.k, fe.m, spec.c);
      break;
    case ScalingKind::GlobalDeflation:
      out = global_deflation(fe.pair(), spec.rank, spec.deflation_mode, spec.alpha, precomputed);
      break;
  }
  out.provenance = spec;
  return out;
}

}  // namespace msl::scaling
