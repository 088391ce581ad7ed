#include <string>

#include <Eigen/SparseCholesky>

#include "msl/integrator.hpp"

namespace msl::integrator {
namespace {

// Assembled matrices sparser than this go through the sparse factorization.
constexpr double kSparseDensity = 0.25;

}  // namespace

struct MassSolver::Impl {
  Vector diag;
  std::optional<LowRankUpdate> update;
  bool diagonal_base = false;  // Woodbury base stored as its diagonal in `diag`
  std::optional<WoodburySolver> woodbury;
  SparseMatrix sparse;
  Eigen::SimplicialLLT<SparseMatrix> sparse_llt;
  SymMatrix dense;
  Matrix factor;
};

MassSolver::MassSolver(const scaling::MassRepresentation& m) : impl_(std::make_unique<Impl>()) {
  if (const auto* u = std::get_if<LowRankUpdate>(&m)) {
    n_ = u->order();
    path_ = Path::Woodbury;
    try {
      impl_->woodbury.emplace(*u);
    } catch (const Error& e) {
      throw Error(Errc::SolveFailure, std::string("low-rank mass solve: ") + e.what());
    }
    impl_->update = *u;
    impl_->diagonal_base = u->base.is_diagonal();
    if (impl_->diagonal_base) impl_->diag = u->base.diagonal_entries();
    return;
  }
  *this = MassSolver(std::get<SymMatrix>(m));
}

MassSolver::MassSolver(const SymMatrix& m) : n_(m.order()), impl_(std::make_unique<Impl>()) {
  if (m.is_diagonal()) {
    path_ = Path::Diagonal;
    impl_->diag = m.diagonal_entries();
    for (Index i = 0; i < n_; ++i) {
      if (!(impl_->diag(i) > 0.0)) {
        throw Error(Errc::SolveFailure, "diagonal mass entry is not positive", static_cast<std::size_t>(i));
      }
    }
    return;
  }
  const Index nnz = (m.dense().array() != 0.0).count();
  if (static_cast<double>(nnz) <= kSparseDensity * static_cast<double>(n_) * static_cast<double>(n_)) {
    path_ = Path::SparseCholesky;
    impl_->sparse = m.dense().sparseView();
    impl_->sparse.makeCompressed();
    impl_->sparse_llt.compute(impl_->sparse);
    if (impl_->sparse_llt.info() != Eigen::Success) {
      throw Error(Errc::SolveFailure, "sparse Cholesky of the mass matrix failed");
    }
    return;
  }
  path_ = Path::DenseCholesky;
  impl_->dense = m;
  try {
    impl_->factor = cholesky(m);
  } catch (const Error& e) {
    throw Error(Errc::SolveFailure, std::string("mass factorization: ") + e.what(), e.index());
  }
}

MassSolver::~MassSolver() = default;
MassSolver::MassSolver(MassSolver&&) noexcept = default;
MassSolver& MassSolver::operator=(MassSolver&&) noexcept = default;

Vector MassSolver::solve(const Vector& rhs) const {
  if (rhs.size() != n_) throw Error(Errc::DimensionMismatch, "rhs length does not match the mass order");
  switch (path_) {
    case Path::Diagonal: return rhs.cwiseQuotient(impl_->diag);
    case Path::Woodbury: return impl_->woodbury->solve(rhs);
    case Path::SparseCholesky: return impl_->sparse_llt.solve(rhs);
    case Path::DenseCholesky: return cholesky_solve(impl_->factor, rhs);
  }
  return rhs;
}

Vector MassSolver::apply(const Vector& x) const {
  if (x.size() != n_) throw Error(Errc::DimensionMismatch, "vector length does not match the mass order");
  switch (path_) {
    case Path::Diagonal: return impl_->diag.cwiseProduct(x);
    case Path::Woodbury: {
      if (!impl_->diagonal_base) return impl_->update->apply(x);
      const LowRankUpdate& u = *impl_->update;
      Vector y = impl_->diag.cwiseProduct(x);
      if (u.rank() > 0) y.noalias() += u.factors * u.core.cwiseProduct(u.factors.transpose() * x);
      return y;
    }
    case Path::SparseCholesky: return impl_->sparse * x;
    case Path::DenseCholesky: return impl_->dense * x;
  }
  return x;
}

SymMatrix MassSolver::dense() const {
  switch (path_) {
    case Path::Diagonal: return SymMatrix::diagonal(impl_->diag);
    case Path::Woodbury: return impl_->update->dense();
    case Path::SparseCholesky: return SymMatrix(Matrix(impl_->sparse));
    case Path::DenseCholesky: return impl_->dense;
  }
  return {};
}

std::string_view to_string(MassSolver::Path p) noexcept {
  switch (p) {
    case MassSolver::Path::Diagonal: return "diagonal";
    case MassSolver::Path::Woodbury: return "woodbury";
    case MassSolver::Path::SparseCholesky: return "sparse_cholesky";
    case MassSolver::Path::DenseCholesky: return "dense_cholesky";
  }
  return "unknown";
}

}  // namespace msl::integrator
