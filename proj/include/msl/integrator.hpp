#pragma once

// Central difference time stepping for M u'' + K u = f and an empirical
// bracket of the critical step.

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "msl/linalg.hpp"
#include "msl/scaling.hpp"

namespace msl::integrator {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct TransientState {
  Vector u;  // m
  Vector v;  // m/s
  Vector a;  // m/s^2
  double t = 0.0;
  Index step = 0;
};

/// Solves and products with the mass matrix, using the cheapest exact path:
/// diagonal, Woodbury for low-rank updates, sparse Cholesky for sparse
/// assembled matrices, dense Cholesky otherwise.
class MassSolver {
 public:
  enum class Path { Diagonal, Woodbury, SparseCholesky, DenseCholesky };

  explicit MassSolver(const scaling::MassRepresentation& m);
  explicit MassSolver(const SymMatrix& m);
  ~MassSolver();
  MassSolver(MassSolver&&) noexcept;
  MassSolver& operator=(MassSolver&&) noexcept;

  Vector solve(const Vector& rhs) const;
  Vector apply(const Vector& x) const;
  Index order() const noexcept { return n_; }
  Path path() const noexcept { return path_; }
  /// Dense copy, for diagnostics.
  SymMatrix dense() const;

 private:
  struct Impl;
  Index n_ = 0;
  Path path_ = Path::Diagonal;
  std::unique_ptr<Impl> impl_;
};

std::string_view to_string(MassSolver::Path p) noexcept;

struct TraceRow {
  Index step = 0;
  double time = 0.0;
  double energy = 0.0;  // discrete invariant, see RunResult
  double norm = 0.0;    // M-norm of u
};

struct RunOptions {
  double dt = 0.0;
  Index steps = 0;
  std::optional<Vector> force;  // constant external load
  bool record_trace = false;
  /// Stop once ||u||_M exceeds this multiple of the initial norm (0: never).
  double stop_growth = 0.0;
};

/// The energy is the quantity central differences conserve exactly,
///   1/2 v_{n+1/2}^T M v_{n+1/2} + 1/2 u_n^T K u_{n+1} - f^T (u_n + u_{n+1}) / 2,
/// with v_{n+1/2} = (u_{n+1} - u_n) / dt. It equals the mechanical energy
/// up to O(dt^2) and stays positive for dt below the critical step.
struct RunResult {
  TransientState state;
  std::vector<TraceRow> trace;
  double initial_norm = 0.0;
  double max_growth = 0.0;    // max_n ||u_n||_M / ||u_0||_M
  double final_growth = 0.0;
  double initial_energy = 0.0;
  double max_energy_drift = 0.0;  // max_n |E_n - E_0| / |E_0|
  Index steps_run = 0;
  bool stopped_early = false;
};

/// Throws SolveFailure when the mass matrix cannot be factored and
/// InvalidParameter for a nonpositive step.
RunResult central_difference_run(const SparseMatrix& k, const MassSolver& m, const Vector& u0,
                                 const Vector& v0, const RunOptions& options);
RunResult central_difference_run(const SymMatrix& k, const MassSolver& m, const Vector& u0,
                                 const Vector& v0, const RunOptions& options);

enum class Stability { Stable, Unstable, Inconclusive };
std::string_view to_string(Stability s) noexcept;

struct StabilityVerdict {
  Stability classification = Stability::Inconclusive;
  double dt = 0.0;
  double growth = 0.0;      // final / initial response norm
  double max_growth = 0.0;
  double energy_drift = 0.0;
  Index steps = 0;
};

struct BracketOptions {
  Index steps = 10000;
  std::uint64_t seed = 42;
  double stable_factor = 0.99;
  double unstable_factor = 1.05;
  double stable_limit = 10.0;
  double unstable_limit = 1e6;
  double min_top_component = 1e-12;
  int max_reseeds = 16;
  bool parallel = false;
};

struct BracketResult {
  StabilityVerdict stable;    // run at stable_factor * dt_estimate
  StabilityVerdict unstable;  // run at unstable_factor * dt_estimate
  double dt_estimate = 0.0;
  double top_component = 0.0;  // |u_top^T M u_0| with both M-normalized
  std::uint64_t seed_used = 0;
};

StabilityVerdict classify(const RunResult& run, double dt, double stable_limit, double unstable_limit);

/// Runs both probes from a seeded random displacement of unit M-norm (zero
/// velocity, zero load). The initial condition is re-seeded while its
/// component on the top eigenvector of (K, M) is below min_top_component.
BracketResult stability_bracket(const SymMatrix& k, const scaling::MassRepresentation& m,
                                double dt_estimate, const BracketOptions& options = {});

/// Random vector of unit M-norm, deterministic in `seed`.
Vector random_unit_displacement(const MassSolver& m, std::uint64_t seed);

/// Top eigenvector of (K, M) by shifted inverse iteration just above
/// `lambda_max_estimate`; M-normalized.
Vector top_eigenvector(const SymMatrix& k, const SymMatrix& m, double lambda_max_estimate);

}  // namespace msl::integrator
