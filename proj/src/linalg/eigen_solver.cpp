#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "msl/linalg.hpp"

namespace msl {
namespace {

// Total QL sweeps allowed per matrix, as a multiple of its order. Large
// clusters of nearly equal eigenvalues can take far more than the usual two
// or three sweeps for a single eigenvalue, so the budget is shared.
constexpr Index kQlSweepsPerOrder = 30;

// Householder reduction of the lower triangle of `a` to tridiagonal form.
// On return `diag`/`sub` hold the tridiagonal matrix (sub(i) couples i and
// i+1, sub(n-1) = 0) and, if `q` is non-null, *q holds the orthogonal
// transform with a = Q T Q^T.
void tridiagonalize(Matrix& a, Vector& diag, Vector& sub, Matrix* q) {
  const Index n = a.rows();
  diag.resize(n);
  sub.setZero(n);
  Vector taus = Vector::Zero(std::max<Index>(n - 1, 0));

  for (Index i = 0; i + 1 < n; ++i) {
    const Index m = n - i - 1;
    auto x = a.col(i).tail(m);
    const double x0 = x(0);
    const double tail_sq = m > 1 ? x.tail(m - 1).squaredNorm() : 0.0;
    double tau = 0.0;
    double beta = x0;
    if (tail_sq > std::numeric_limits<double>::min()) {
      const double mu = std::sqrt(x0 * x0 + tail_sq);
      beta = x0 <= 0.0 ? mu : -mu;
      x.tail(m - 1) /= (x0 - beta);
      tau = (beta - x0) / beta;
    } else if (m > 1) {
      x.tail(m - 1).setZero();
    }
    sub(i) = beta;
    taus(i) = tau;
    x(0) = 1.0;  // v is stored in place with its implicit leading one

    if (tau != 0.0) {
      auto trailing = a.bottomRightCorner(m, m);
      Vector p = tau * (trailing.selfadjointView<Eigen::Lower>() * x);
      p += (-0.5 * tau * p.dot(x)) * x;
      trailing.selfadjointView<Eigen::Lower>().rankUpdate(x, p, -1.0);
    }
  }
  diag = a.diagonal();

  if (q != nullptr) {
    q->setIdentity(n, n);
    Vector work(n);
    for (Index i = n - 2; i >= 0; --i) {
      const double tau = taus(i);
      if (tau == 0.0) continue;
      const Index m = n - i - 1;
      auto v = a.col(i).tail(m);
      auto block = q->bottomRightCorner(m, m);
      auto w = work.head(m);
      w.noalias() = block.transpose() * v;
      block.noalias() -= (tau * v) * w.transpose();
    }
  }
}

// Implicit-shift QL on a symmetric tridiagonal matrix. Rotations are
// accumulated into the columns of `z` when it is non-null.
void tridiagonal_ql(Vector& d, Vector& e, Matrix* z) {
  const Index n = d.size();
  const double eps = std::numeric_limits<double>::epsilon();
  const Index budget = kQlSweepsPerOrder * std::max<Index>(n, 1);
  Index sweeps = 0;
  for (Index l = 0; l < n; ++l) {
    Index m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d(m)) + std::abs(d(m + 1));
        if (std::abs(e(m)) <= eps * dd) break;
      }
      if (m == l) break;
      if (++sweeps > budget) {
        throw Error(Errc::NoConvergence,
                    "QL iteration cap exceeded at eigenvalue " + std::to_string(l),
                    static_cast<std::size_t>(l));
      }
      double g = (d(l + 1) - d(l)) / (2.0 * e(l));
      double r = std::hypot(g, 1.0);
      g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      Index i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        const double f = s * e(i);
        const double b = c * e(i);
        r = std::hypot(f, g);
        e(i + 1) = r;
        if (r == 0.0) {
          d(i + 1) -= p;
          e(m) = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2.0 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
        if (z != nullptr) {
          auto zi = z->col(i);
          auto zi1 = z->col(i + 1);
          for (Index k = 0; k < zi.size(); ++k) {
            const double t = zi1(k);
            zi1(k) = s * zi(k) + c * t;
            zi(k) = c * zi(k) - s * t;
          }
        }
      }
      if (underflow && i >= l) continue;
      d(l) -= p;
      e(l) = g;
      e(m) = 0.0;
    } while (m != l);
  }
}

// Ascending stable sort (ties keep solver order) and sign convention:
// the largest-magnitude component of each vector is made positive.
void sort_and_normalize(Vector& values, Matrix* vectors) {
  const Index n = values.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values(a) < values(b); });
  Vector sorted(n);
  for (Index k = 0; k < n; ++k) sorted(k) = values(order[static_cast<std::size_t>(k)]);
  values = std::move(sorted);
  if (vectors == nullptr) return;

  Matrix out(vectors->rows(), n);
  for (Index k = 0; k < n; ++k) out.col(k) = vectors->col(order[static_cast<std::size_t>(k)]);
  for (Index k = 0; k < n; ++k) {
    Index arg = 0;
    out.col(k).cwiseAbs().maxCoeff(&arg);
    if (out(arg, k) < 0.0) out.col(k) = -out.col(k);
  }
  *vectors = std::move(out);
}

EigDecomposition sym_eig_dense(Matrix a, EigJob job) {
  EigDecomposition out;
  const Index n = a.rows();
  if (n == 0) return out;
  Vector d;
  Vector e;
  const bool want_vectors = job == EigJob::ValuesAndVectors;
  Matrix q;
  tridiagonalize(a, d, e, want_vectors ? &q : nullptr);
  tridiagonal_ql(d, e, want_vectors ? &q : nullptr);
  sort_and_normalize(d, want_vectors ? &q : nullptr);
  out.values = std::move(d);
  if (want_vectors) out.vectors = std::move(q);
  out.normalization = Normalization::UnitNorm;
  return out;
}

}  // namespace

EigDecomposition sym_eig(const SymMatrix& m, EigJob job) { return sym_eig_dense(m.dense(), job); }

EigDecomposition generalized_eig(const MatrixPair& p, EigJob job) {
  const Index n = p.order();
  const bool want_vectors = job == EigJob::ValuesAndVectors;
  EigDecomposition out;

  if (p.b.is_diagonal()) {
    const Vector bd = p.b.diagonal_entries();
    const double tol = 1e-13 * (n > 0 ? bd.maxCoeff() : 0.0);
    for (Index i = 0; i < n; ++i) {
      if (!(bd(i) > tol) || !(bd(i) > 0.0)) {
        throw Error(Errc::NotPositiveDefinite,
                    "diagonal B entry " + std::to_string(i) + " is " + std::to_string(bd(i)),
                    static_cast<std::size_t>(i));
      }
    }
    const Vector inv_sqrt = bd.cwiseSqrt().cwiseInverse();
    Matrix c = inv_sqrt.asDiagonal() * p.a.dense() * inv_sqrt.asDiagonal();
    out = sym_eig_dense(std::move(c), job);
    if (want_vectors) {
      out.vectors = inv_sqrt.asDiagonal() * out.vectors;
    }
  } else {
    const Matrix l = cholesky(p.b);
    const auto lower = l.triangularView<Eigen::Lower>();
    Matrix x = lower.solve(p.a.dense());
    x.transposeInPlace();
    lower.solveInPlace(x);
    Matrix c = 0.5 * (x + x.transpose());
    out = sym_eig_dense(std::move(c), job);
    if (want_vectors) {
      lower.transpose().solveInPlace(out.vectors);
    }
  }

  if (want_vectors) {
    for (Index k = 0; k < out.vectors.cols(); ++k) {
      Index arg = 0;
      out.vectors.col(k).cwiseAbs().maxCoeff(&arg);
      if (out.vectors(arg, k) < 0.0) out.vectors.col(k) = -out.vectors.col(k);
    }
  }
  out.normalization = Normalization::BOrthonormal;
  return out;
}

Vector rayleigh_quotients(const MatrixPair& p, const Matrix& vectors) {
  using Sparse = Eigen::SparseMatrix<long double>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  if (vectors.rows() != p.order()) {
    throw Error(Errc::DimensionMismatch, "vector length does not match the pair order");
  }
  const Sparse a = p.a.dense().cast<long double>().sparseView();
  const Sparse b = p.b.dense().cast<long double>().sparseView();
  Vector out(vectors.cols());
  for (Index j = 0; j < vectors.cols(); ++j) {
    const VecL u = vectors.col(j).cast<long double>();
    const long double num = u.dot(a * u);
    const long double den = u.dot(b * u);
    if (!(den > 0)) {
      throw Error(Errc::NotPositiveDefinite, "u^T B u is not positive", static_cast<std::size_t>(j));
    }
    out(j) = static_cast<double>(num / den);
  }
  return out;
}

}  // namespace msl
