#pragma once

// Trilinear hexahedral elements, mass lumping, structured meshes and
// assembly. Local element DOFs are component-blocked (all x, then y, then
// z; index = 8 * component + local node) and so are global DOFs
// (index = component * node_count + node), so that I3 (x) (.) structures
// stay block-diagonal per component after assembly.

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "msl/linalg.hpp"

namespace msl::fem {

using Point = Eigen::Vector3d;

struct Material {
  double young_modulus = 0.0;  // Pa
  double poisson_ratio = 0.0;
  double density = 0.0;        // kg/m^3

  void validate() const;
};

/// Corner ordering: bottom face (zeta = -1) counter-clockwise seen from +z,
/// then the top face in the same order.
struct Hex8Geometry {
  std::array<Point, 8> corners;

  static Hex8Geometry box(const Point& origin, const Point& size);
};

struct Mesh {
  std::vector<Point> nodes;
  std::vector<std::array<Index, 8>> elements;

  Index node_count() const noexcept { return static_cast<Index>(nodes.size()); }
  Index element_count() const noexcept { return static_cast<Index>(elements.size()); }
  Index dof_count() const noexcept { return 3 * node_count(); }
  Index dof(Index node, int component) const noexcept { return component * node_count() + node; }

  /// Number of elements attached to each node.
  std::vector<Index> node_valence() const;
  /// Maximum number of elements sharing a node.
  Index p_max() const;
  Hex8Geometry element_geometry(Index e) const;
  std::vector<Index> element_dofs(Index e) const;
  void validate() const;
};

using DofMap = std::vector<Index>;

struct ElementBlock {
  SymMatrix stiffness;
  SymMatrix mass;         // consistent
  SymMatrix lumped_mass;  // diagonal
  SymMatrix scaling;      // mass perturbation E_e; order 0 when absent
  double element_mass = 0.0;
  DofMap dof_map;

  Index size() const noexcept { return static_cast<Index>(dof_map.size()); }
  bool has_scaling() const noexcept { return scaling.order() != 0; }
};

enum class MatrixKind { Stiffness, Lumped, Consistent, Scaling };

enum class Lumping { RowSum, Hrz };

SymMatrix hex8_stiffness(const Hex8Geometry& g, const Material& mat);
SymMatrix hex8_consistent_mass(const Hex8Geometry& g, const Material& mat);
double hex8_element_mass(const Hex8Geometry& g, const Material& mat);

SymMatrix lump_row_sum(const SymMatrix& consistent);
/// HRZ lumping for component-blocked 3-component element matrices: the
/// consistent diagonal is rescaled per component to conserve that
/// component's total mass.
SymMatrix lump_hrz(const SymMatrix& consistent);

Mesh build_structured_mesh(std::array<Index, 3> node_counts, std::array<double, 3> extents);

std::vector<ElementBlock> build_element_blocks(const Mesh& mesh, const Material& mat,
                                               Lumping lumping = Lumping::RowSum);

SymMatrix assemble(Index n, std::span<const ElementBlock> blocks, MatrixKind which);
/// Assembles one element matrix per block using the blocks' DOF maps.
SymMatrix assemble(Index n, std::span<const ElementBlock> blocks,
                   std::span<const SymMatrix> element_matrices);

/// How many elements touch each global DOF.
std::vector<Index> dof_valence(Index n, std::span<const ElementBlock> blocks);

/// Submatrix on the DOFs not listed in `fixed` (homogeneous Dirichlet).
SymMatrix restrict_to_free(const SymMatrix& m, std::span<const Index> fixed);

void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace msl::fem
