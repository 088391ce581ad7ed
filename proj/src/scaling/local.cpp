#include <cmath>
#include <string>

#include "msl/scaling.hpp"

namespace msl::scaling {
namespace {

constexpr Index kHexNodes = 8;
constexpr double kClusterTol = 1e-9;
constexpr double kRigidTol = 1e-8;

SymMatrix kron_identity3(const Eigen::Matrix<double, 8, 8>& block) {
  Matrix e = Matrix::Zero(3 * kHexNodes, 3 * kHexNodes);
  for (Index c = 0; c < 3; ++c) e.block(c * kHexNodes, c * kHexNodes, kHexNodes, kHexNodes) = block;
  return SymMatrix(e);
}

ScaledSystem assemble_local(const FeSystem& fe, std::vector<SymMatrix> element_scaling,
                            const ScalingSpec& spec) {
  ScaledSystem out;
  out.kbar = fe.k;
  out.provenance = spec;
  out.element_blocks = fe.blocks;
  for (std::size_t e = 0; e < out.element_blocks.size(); ++e) {
    out.element_blocks[e].scaling = std::move(element_scaling[e]);
  }
  out.mbar = fe.m + fem::assemble(fe.n, out.element_blocks, fem::MatrixKind::Scaling);
  return out;
}

}  // namespace

FeSystem FeSystem::from_blocks(std::vector<fem::ElementBlock> blocks, Index n) {
  FeSystem fe;
  fe.n = n;
  fe.k = fem::assemble(n, blocks, fem::MatrixKind::Stiffness);
  fe.m = fem::assemble(n, blocks, fem::MatrixKind::Lumped);
  fe.blocks = std::move(blocks);
  return fe;
}

FeSystem FeSystem::from_mesh(const fem::Mesh& mesh, const fem::Material& mat) {
  return from_blocks(fem::build_element_blocks(mesh, mat), mesh.dof_count());
}

SymMatrix ScaledSystem::mbar_dense() const {
  if (const auto* dense = std::get_if<SymMatrix>(&mbar)) return *dense;
  return std::get<LowRankUpdate>(mbar).dense();
}

SymMatrix olovsson_element_scaling(double element_mass, double beta, OlovssonVariant variant) {
  using M8 = Eigen::Matrix<double, 8, 8>;
  const M8 ones = M8::Ones();
  M8 block;
  if (variant == OlovssonVariant::Original) {
    block = (beta * element_mass / 56.0) * (8.0 * M8::Identity() - ones);
  } else {
    block = (beta * element_mass / 8.0) * (M8::Identity() - ones / 8.0);
  }
  return kron_identity3(block);
}

const Eigen::Matrix4d& hoffmann_face_matrix() {
  static const Eigen::Matrix4d g = (Eigen::Matrix4d() << 4, 2, 1, 2,  //
                                    2, 4, 2, 1,                      //
                                    1, 2, 4, 2,                      //
                                    2, 1, 2, 4)
                                       .finished();
  return g;
}

SymMatrix hoffmann_element_scaling(double element_mass, double beta) {
  // Nodes 0-3 and 4-7 are the two opposite faces, so A (x) G couples each
  // face node with its counterpart across the thickness.
  const double gamma = element_mass / 8.0;
  const Eigen::Matrix2d a = (Eigen::Matrix2d() << 1, -1, -1, 1).finished();
  const Eigen::Matrix4d& g = hoffmann_face_matrix();
  Eigen::Matrix<double, 8, 8> block;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) block.block<4, 4>(4 * i, 4 * j) = a(i, j) * g;
  }
  return kron_identity3((beta * gamma / 4.0) * block);
}

SymMatrix cms_element_scaling(const SymMatrix& lumped,
                              const std::optional<std::vector<Index>>& selector, double alpha) {
  if (!lumped.is_diagonal()) {
    throw Error(Errc::NonDiagonalMass, "conventional mass scaling needs a lumped element mass");
  }
  const Index m = lumped.order();
  Vector e = Vector::Zero(m);
  if (!selector) {
    e = (alpha - 1.0) * lumped.diagonal_entries();
  } else {
    if (selector->empty()) throw Error(Errc::EmptySelection, "CMS selector picks no entries");
    for (Index i : *selector) {
      if (i < 0 || i >= m) {
        throw Error(Errc::IndexOutOfRange, "CMS selector index " + std::to_string(i) + " out of range");
      }
      e(i) = (alpha - 1.0) * lumped(i, i);
    }
  }
  return SymMatrix::diagonal(e);
}

LocalDeflation local_deflation_element(const fem::ElementBlock& block, Index r,
                                       ScalingKind strategy, double alpha) {
  const Index m = block.size();
  if (r < 0 || r >= m) {
    throw Error(Errc::RankTooLarge,
                "local rank " + std::to_string(r) + " must lie in [0, " + std::to_string(m) + ")");
  }
  LocalDeflation out;
  try {
    out.pair = generalized_eig(MatrixPair(block.stiffness, block.lumped_mass));
  } catch (const Error& err) {
    throw Error(Errc::DefectiveElementPair, err.what());
  }
  out.effective_rank = r;
  if (r == 0) {
    out.scaling = SymMatrix::zero(m);
    return out;
  }

  const Vector& lambda = out.pair.values;
  const double top = lambda(m - 1);
  Index cut = m - r;
  if (strategy == ScalingKind::LocalDeflationS1) {
    // A cluster straddling the cut would make V basis dependent under a
    // constant g; deflate the whole cluster instead.
    while (cut > 0 && lambda(cut) - lambda(cut - 1) <= kClusterTol * std::abs(top)) --cut;
    if (cut == 0) throw Error(Errc::RankTooLarge, "eigenvalue cluster absorbs the whole element");
  }
  out.effective_rank = m - cut;

  Vector g(out.effective_rank);
  if (strategy == ScalingKind::LocalDeflationS1) {
    g.setConstant(alpha);
  } else if (strategy == ScalingKind::LocalDeflationS2) {
    const double threshold = lambda(m - r - 1);
    if (!(threshold > kRigidTol * top)) {
      throw Error(Errc::RankTooLarge,
                  "rank " + std::to_string(r) + " reaches the rigid-body eigenvalues of the element");
    }
    for (Index k = 0; k < out.effective_rank; ++k) g(k) = lambda(cut + k) / threshold - 1.0;
  } else {
    throw Error(Errc::InvalidParameter, "local deflation strategy must be S1 or S2");
  }

  const Matrix v = block.lumped_mass.dense() * out.pair.vectors.rightCols(out.effective_rank);
  const Matrix e = v * g.asDiagonal() * v.transpose();
  out.scaling = SymMatrix(0.5 * (e + e.transpose()));
  return out;
}

SymMatrix stabilization_element_scaling(const SymMatrix& mass, Index r, double epsilon) {
  const Index m = mass.order();
  if (r < 0 || r >= m) {
    throw Error(Errc::RankTooLarge,
                "stabilization rank " + std::to_string(r) + " must lie in [0, " + std::to_string(m) + ")");
  }
  if (r == 0 || epsilon == 0.0) return SymMatrix::zero(m);
  const EigDecomposition eig = sym_eig(mass);
  const Matrix u = eig.vectors.leftCols(r);
  const Matrix e = epsilon * (u * u.transpose());
  return SymMatrix(0.5 * (e + e.transpose()));
}

SymMatrix element_scaling(const fem::ElementBlock& block, const ScalingSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ScalingKind::Cms:
      return cms_element_scaling(block.lumped_mass, spec.selector, spec.alpha);
    case ScalingKind::LocalDeflationS1:
    case ScalingKind::LocalDeflationS2:
      return local_deflation_element(block, spec.rank, spec.kind, spec.alpha).scaling;
    case ScalingKind::Olovsson:
      return olovsson_element_scaling(block.element_mass, spec.beta, spec.olovsson_variant);
    case ScalingKind::Hoffmann:
      return hoffmann_element_scaling(block.element_mass, spec.beta);
    case ScalingKind::EigStabilization:
      return stabilization_element_scaling(block.lumped_mass, spec.rank, spec.epsilon);
    default:
      throw Error(Errc::InvalidParameter, std::string(to_string(spec.kind)) + " is not an element-level scaling");
  }
}

ScaledSystem cms(const FeSystem& fe, const std::optional<std::vector<Index>>& selector, double alpha) {
  const ScalingSpec spec = ScalingSpec::cms(alpha, selector);
  spec.validate();
  std::vector<SymMatrix> scaling;
  scaling.reserve(fe.blocks.size());
  for (const auto& b : fe.blocks) scaling.push_back(cms_element_scaling(b.lumped_mass, selector, alpha));
  return assemble_local(fe, std::move(scaling), spec);
}

ScaledSystem local_deflation(const FeSystem& fe, Index r, ScalingKind strategy, double alpha) {
  ScalingSpec spec = strategy == ScalingKind::LocalDeflationS1 ? ScalingSpec::local_deflation_s1(r, alpha)
                                                               : ScalingSpec::local_deflation_s2(r);
  if (strategy != ScalingKind::LocalDeflationS1 && strategy != ScalingKind::LocalDeflationS2) {
    throw Error(Errc::InvalidParameter, "local deflation strategy must be S1 or S2");
  }
  spec.validate();
  std::vector<SymMatrix> scaling;
  scaling.reserve(fe.blocks.size());
  for (const auto& b : fe.blocks) scaling.push_back(local_deflation_element(b, r, strategy, alpha).scaling);
  return assemble_local(fe, std::move(scaling), spec);
}

ScaledSystem olovsson(const FeSystem& fe, double beta, OlovssonVariant variant) {
  const ScalingSpec spec = ScalingSpec::olovsson(beta, variant);
  spec.validate();
  std::vector<SymMatrix> scaling;
  scaling.reserve(fe.blocks.size());
  for (const auto& b : fe.blocks) scaling.push_back(olovsson_element_scaling(b.element_mass, beta, variant));
  return assemble_local(fe, std::move(scaling), spec);
}

ScaledSystem hoffmann(const FeSystem& fe, double beta) {
  const ScalingSpec spec = ScalingSpec::hoffmann(beta);
  spec.validate();
  std::vector<SymMatrix> scaling;
  scaling.reserve(fe.blocks.size());
  for (const auto& b : fe.blocks) scaling.push_back(hoffmann_element_scaling(b.element_mass, beta));
  return assemble_local(fe, std::move(scaling), spec);
}

ScaledSystem eig_stabilization(const FeSystem& fe, Index r, double epsilon) {
  const ScalingSpec spec = ScalingSpec::eig_stabilization(r, epsilon);
  spec.validate();
  std::vector<SymMatrix> scaling;
  scaling.reserve(fe.blocks.size());
  for (const auto& b : fe.blocks) scaling.push_back(stabilization_element_scaling(b.lumped_mass, r, epsilon));
  return assemble_local(fe, std::move(scaling), spec);
}

}  // namespace msl::scaling
