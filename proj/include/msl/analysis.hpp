#pragma once

// Spectra of original and scaled systems, critical time steps, and the
// eigenvalue and condition-number bounds for each scaling strategy. Bounds
// are recorded with both sides and a signed slack; nothing here throws on a
// violated bound.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msl/fem.hpp"
#include "msl/linalg.hpp"
#include "msl/scaling.hpp"

namespace msl::analysis {

/// Eigenvalues below this fraction of the largest are treated as rigid-body
/// (zero-frequency) modes.
inline constexpr double kRigidTolerance = 1e-8;

/// A free trilinear hexahedron has exactly six rigid-body modes.
inline constexpr Index kElementRigidModes = 6;

/// 2 / sqrt(lambda_max). Throws NonPositiveEigenvalue.
double critical_dt(double lambda_max);

/// sqrt(max(lambda, 0)) entrywise.
Vector frequencies(const Vector& lambda);

/// Number of leading eigenvalues below tol * lambda_max (ascending input).
Index rigid_mode_count(const Vector& lambda, double tol = kRigidTolerance);

/// Claim lhs <= rhs. `scale` sets the magnitude for the relative slack;
/// zero means max(|lhs|, |rhs|).
struct BoundRecord {
  std::string source;
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
  std::optional<Index> index;  // binding mode or element, when meaningful

  double slack() const noexcept { return rhs - lhs; }
  double relative_slack() const noexcept;
  bool holds(double rel_tol) const noexcept { return relative_slack() >= -rel_tol; }
};

struct BoundSet {
  std::vector<BoundRecord> records;

  void add(std::string source, double lhs, double rhs, double scale = 0.0,
           std::optional<Index> index = std::nullopt);
  void append(const BoundSet& other);
  bool all_hold(double rel_tol) const noexcept;
  const BoundRecord* find(std::string_view source) const noexcept;
  /// Throws InvalidParameter when absent.
  const BoundRecord& at(std::string_view source) const;
};

/// omega_k / omega_bar_k over the flexible modes of the original spectrum.
struct RatioCurve {
  std::vector<Index> modes;
  std::vector<double> ratio;

  double max() const;
  double min() const;
};

RatioCurve frequency_ratio_curve(const Vector& lambda, const Vector& lambda_bar);
RatioCurve frequency_ratio_curve(const SymMatrix& k, const SymMatrix& m, const SymMatrix& mbar);

/// Relative sensitivity of lambda(k) / lambda_bar(k) to eigenvalue errors of
/// size eps * max|lambda|: low modes amplify it by lambda_max / lambda_k.
double ratio_roundoff_scale(const Vector& lambda, const Vector& lambda_bar, Index k);

/// lambda_1(Mbar, M) <= lambda_k(K, M) / lambda_k(K, Mbar) <= lambda_n(Mbar, M)
/// over flexible k, plus lambda_k(K, Mbar) <= lambda_k(K, M) for all k.
/// `mass_pair` holds the eigenvalues of (Mbar, M).
BoundSet sandwich_bounds(const Vector& lambda, const Vector& lambda_bar, const Vector& mass_pair);
BoundSet sandwich_bounds(const SymMatrix& k, const SymMatrix& m, const SymMatrix& mbar);

/// Per-element extreme eigenvalues used by the assembly bounds.
struct ElementExtremes {
  double min_low = 0.0;   // min_e lambda_1
  double max_high = 0.0;  // max_e lambda_m
  Index argmax = 0;
};

/// Extremes of lambda(A_e) over the elements.
ElementExtremes element_extremes(std::span<const SymMatrix> element_matrices);
/// Extremes of lambda(A_e, B_e) over the elements.
ElementExtremes element_extremes(std::span<const SymMatrix> a, std::span<const SymMatrix> b);

/// max_e lambda_m(A_e) <= lambda_n(A) <= p_max max_e lambda_m(A_e) and
/// min_e lambda_1(A_e) <= lambda_1(A); `values` are the eigenvalues of A.
BoundSet fried_bounds(std::string_view name, const Vector& values, const ElementExtremes& elements,
                      Index p_max);

/// min_e lambda_1(A_e, B_e) <= lambda_1(A, B) and lambda_n(A, B) <= max_e lambda_m(A_e, B_e).
BoundSet irons_wathen_bounds(std::string_view name, const Vector& values,
                             const ElementExtremes& elements);

/// The per-method upper bound on omega_i / omega_bar_i. Throws
/// NoBoundForKind for strategies without one (LFT, polynomial, global
/// deflation, stabilization). S2 needs the element blocks.
double corollary_bound(const scaling::ScalingSpec& spec,
                       std::span<const fem::ElementBlock> blocks = {});

struct ConditionReport {
  double kappa_m = 0.0;
  double kappa_mbar = 0.0;
  double kappa_pair = 0.0;  // kappa(Mbar, M)
  Vector m_values;          // ascending eigenvalues of M, Mbar and (Mbar, M)
  Vector mbar_values;
  Vector pair_values;
  BoundSet bounds;
};

/// Condition numbers of M, Mbar and (Mbar, M) with the assembly bound, the
/// pair bound kappa(Mbar)/kappa(M) <= kappa(Mbar, M), and the per-method
/// bounds that apply to `spec`. `scaled_blocks` carry the element scalings.
/// `pair_values`, when given, are the eigenvalues of (Mbar, M).
ConditionReport condition_report(const SymMatrix& m, const SymMatrix& mbar, Index p_max,
                                 std::span<const fem::ElementBlock> scaled_blocks,
                                 const scaling::ScalingSpec& spec,
                                 const Vector* pair_values = nullptr);

/// 8 n / (7 m N) for a mesh of identical box elements. Throws NonUniformMesh.
double asymptotic_cond_rate(const fem::Mesh& mesh);

/// Least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);
/// Slope fitted to the `count` samples with the largest x.
double large_parameter_slope(std::span<const double> x, std::span<const double> y, std::size_t count = 5);

/// Flexible-mode Rayleigh factors of one element. Within each degenerate
/// eigenspace of (K_e, M_e) the basis is rotated to diagonalize Mbar_e, so
/// shared eigenvectors are found whenever they exist.
struct ElementRayleighReport {
  Vector lambda;         // lambda_k(K_e, M_e)
  Vector scaled;         // lambda_k(K_e, Mbar_e)
  Vector q;              // Q_e(u_k); 1 for rigid modes
  Vector mapped;         // lambda_k / Q_e(u_k)
  Vector residual;       // ||K_e u - mapped M_bar_e u|| / (||K_e|| ||u||)
  std::vector<Index> position;  // i_k: rank of mapped_k among all mapped values
  Index rigid = kElementRigidModes;

  bool permuted() const;
};

ElementRayleighReport element_rayleigh_report(const fem::ElementBlock& block,
                                              const scaling::ScalingSpec& spec);

/// Everything reported for one scaled system.
struct SpectralReport {
  std::string label;
  Vector lambda;      // lambda(K, M)
  Vector lambda_bar;  // lambda(K_bar, M_bar)
  Vector mass_pair;   // lambda(M_bar, M)
  RatioCurve ratio;
  double dt_c = 0.0;
  double dt_c_bar = 0.0;
  std::optional<double> corollary;
  double gershgorin = 0.0;  // row-sum bound on lambda_max of the scaled pair
  ConditionReport condition;
  BoundSet bounds;
};

struct ReportOptions {
  /// Refine both spectra by Rayleigh quotients (needs eigenvectors; slow).
  bool refine = false;
  /// Decomposition of (K, M), B-orthonormal with vectors when `refine` is set.
  const EigDecomposition* base = nullptr;
  /// Include the assembly bounds on K (one extra eigensolve).
  bool stiffness_bounds = true;
};

SpectralReport spectral_report(const scaling::FeSystem& fe, const scaling::ScaledSystem& scaled,
                               const ReportOptions& options = {});

/// Gershgorin upper bound on lambda_max(K, M): row sums of D^{-1/2} K D^{-1/2}
/// for diagonal M = D, of L^{-1} K L^{-T} with M = L L^T otherwise.
double gershgorin_pair_max(const SymMatrix& k, const SymMatrix& m);

/// Largest number of elements sharing a DOF.
Index p_max(std::span<const fem::ElementBlock> blocks, Index n);

}  // namespace msl::analysis
