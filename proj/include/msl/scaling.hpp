#pragma once

// Mass-scaling strategies. Global strategies transform the assembled pair
// (K, M); local strategies build a per-element perturbation E_e of the
// lumped element mass and assemble M_bar = M + sum_e L_e^T E_e L_e.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "msl/fem.hpp"
#include "msl/linalg.hpp"

namespace msl::scaling {

enum class ScalingKind {
  Cms,
  UniformLft,
  StiffnessProportionalLft,
  PolynomialSms,
  GlobalDeflation,
  LocalDeflationS1,
  LocalDeflationS2,
  Olovsson,
  Hoffmann,
  EigStabilization,
};

std::string_view to_string(ScalingKind kind) noexcept;
ScalingKind parse_kind(std::string_view name);

/// Shave: g(lambda) = lambda / lambda_{n-r} - 1. Cutoff: g(lambda) = alpha.
enum class DeflationMode { Shave, Cutoff };

/// Original: E = (beta m_e / 56)(8 I - e e^T). Projector: the later
/// (beta m_e / 8)(I - e e^T / 8) variant.
enum class OlovssonVariant { Original, Projector };

struct ScalingSpec {
  ScalingKind kind = ScalingKind::Cms;
  double beta = 0.0;     // Olovsson, Hoffmann
  double alpha = 1.0;    // CMS factor; S1 and global-cutoff value
  double mu = 0.0;       // uniform / stiffness-proportional LFT
  double c = 0.0;        // polynomial SMS coefficient
  Index rank = 0;        // deflation and stabilization rank
  double epsilon = 0.0;  // stabilization floor
  std::optional<std::vector<Index>> selector;  // CMS local DOFs; nullopt = all
  DeflationMode deflation_mode = DeflationMode::Shave;
  OlovssonVariant olovsson_variant = OlovssonVariant::Original;

  bool is_local() const noexcept;
  void validate() const;
  std::string label() const;

  static ScalingSpec none();
  static ScalingSpec cms(double alpha, std::optional<std::vector<Index>> selector = std::nullopt);
  static ScalingSpec uniform_lft(double mu);
  static ScalingSpec stiffness_proportional(double mu);
  static ScalingSpec polynomial(double c);
  static ScalingSpec global_deflation(Index r, DeflationMode mode = DeflationMode::Shave,
                                      double alpha = 0.0);
  static ScalingSpec local_deflation_s1(Index r, double alpha);
  static ScalingSpec local_deflation_s2(Index r);
  static ScalingSpec olovsson(double beta, OlovssonVariant v = OlovssonVariant::Original);
  static ScalingSpec hoffmann(double beta);
  static ScalingSpec eig_stabilization(Index r, double epsilon);
};

using MassRepresentation = std::variant<SymMatrix, LowRankUpdate>;

struct ScaledSystem {
  SymMatrix kbar;
  MassRepresentation mbar;
  ScalingSpec provenance;
  std::vector<fem::ElementBlock> element_blocks;  // local kinds: blocks with `scaling` set

  bool low_rank() const noexcept { return std::holds_alternative<LowRankUpdate>(mbar); }
  SymMatrix mbar_dense() const;
  MatrixPair pair() const { return MatrixPair(kbar, mbar_dense()); }
};

/// Assembled unscaled system together with the element blocks it came from.
struct FeSystem {
  std::vector<fem::ElementBlock> blocks;
  Index n = 0;
  SymMatrix k;
  SymMatrix m;  // assembled lumped mass

  static FeSystem from_blocks(std::vector<fem::ElementBlock> blocks, Index n);
  static FeSystem from_mesh(const fem::Mesh& mesh, const fem::Material& mat);
  MatrixPair pair() const { return MatrixPair(k, m); }
};

// Element-level perturbations E_e (24 x 24, component-blocked).
SymMatrix olovsson_element_scaling(double element_mass, double beta,
                                   OlovssonVariant variant = OlovssonVariant::Original);
SymMatrix hoffmann_element_scaling(double element_mass, double beta);
const Eigen::Matrix4d& hoffmann_face_matrix();
SymMatrix cms_element_scaling(const SymMatrix& lumped, const std::optional<std::vector<Index>>& selector,
                              double alpha);

struct LocalDeflation {
  SymMatrix scaling;       // E_e = V g(D2) V^T
  EigDecomposition pair;   // eigenpairs of (K_e, M_e), M_e-orthonormal
  Index effective_rank;    // rank after absorbing an eigenvalue cluster that straddles the cut
};
LocalDeflation local_deflation_element(const fem::ElementBlock& block, Index r,
                                       ScalingKind strategy, double alpha);
SymMatrix stabilization_element_scaling(const SymMatrix& mass, Index r, double epsilon);

/// E_e for one element under a local spec; InvalidParameter for global kinds.
SymMatrix element_scaling(const fem::ElementBlock& block, const ScalingSpec& spec);

// Local strategies.
ScaledSystem cms(const FeSystem& fe, const std::optional<std::vector<Index>>& selector, double alpha);
ScaledSystem local_deflation(const FeSystem& fe, Index r, ScalingKind strategy, double alpha = 0.0);
ScaledSystem olovsson(const FeSystem& fe, double beta,
                      OlovssonVariant variant = OlovssonVariant::Original);
ScaledSystem hoffmann(const FeSystem& fe, double beta);
ScaledSystem eig_stabilization(const FeSystem& fe, Index r, double epsilon);

// Global strategies.
ScaledSystem lft(const MatrixPair& pair, const Eigen::Matrix2d& w);
ScaledSystem polynomial_sms(const SymMatrix& k, const SymMatrix& m_diag, double c);
/// `precomputed` must be the B-orthonormal decomposition of `pair` when given.
ScaledSystem global_deflation(const MatrixPair& pair, Index r, DeflationMode mode, double alpha = 0.0,
                              const EigDecomposition* precomputed = nullptr);

/// Dispatches on spec.kind; global kinds act on fe.pair().
ScaledSystem apply(const FeSystem& fe, const ScalingSpec& spec,
                   const EigDecomposition* precomputed = nullptr);

}  // namespace msl::scaling
