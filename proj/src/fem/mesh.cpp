#include <algorithm>
#include <string>

#include "msl/fem.hpp"

namespace msl::fem {

std::vector<Index> Mesh::node_valence() const {
  std::vector<Index> count(nodes.size(), 0);
  for (const auto& el : elements) {
    for (Index node : el) ++count[static_cast<std::size_t>(node)];
  }
  return count;
}

Index Mesh::p_max() const {
  const auto count = node_valence();
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

Hex8Geometry Mesh::element_geometry(Index e) const {
  Hex8Geometry g;
  const auto& el = elements[static_cast<std::size_t>(e)];
  for (std::size_t a = 0; a < 8; ++a) g.corners[a] = nodes[static_cast<std::size_t>(el[a])];
  return g;
}

std::vector<Index> Mesh::element_dofs(Index e) const {
  const auto& el = elements[static_cast<std::size_t>(e)];
  std::vector<Index> dofs(24);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t a = 0; a < 8; ++a) dofs[8 * static_cast<std::size_t>(c) + a] = dof(el[a], c);
  }
  return dofs;
}

void Mesh::validate() const {
  for (std::size_t e = 0; e < elements.size(); ++e) {
    for (Index node : elements[e]) {
      if (node < 0 || node >= node_count()) {
        throw Error(Errc::IndexOutOfRange,
                    "element " + std::to_string(e) + " references node " + std::to_string(node),
                    e);
      }
    }
  }
}

Mesh build_structured_mesh(std::array<Index, 3> node_counts, std::array<double, 3> extents) {
  const auto [nx, ny, nz] = node_counts;
  if (nx < 2 || ny < 2 || nz < 2) {
    throw Error(Errc::InvalidCounts, "node counts must all be >= 2, got (" + std::to_string(nx) +
                                         ", " + std::to_string(ny) + ", " + std::to_string(nz) + ")");
  }
  for (double len : extents) {
    if (!(len > 0.0)) throw Error(Errc::InvalidCounts, "extents must be positive");
  }

  Mesh mesh;
  mesh.nodes.reserve(static_cast<std::size_t>(nx * ny * nz));
  const auto node_id = [&](Index i, Index j, Index k) { return i + nx * (j + ny * k); };
  for (Index k = 0; k < nz; ++k) {
    for (Index j = 0; j < ny; ++j) {
      for (Index i = 0; i < nx; ++i) {
        mesh.nodes.emplace_back(extents[0] * static_cast<double>(i) / static_cast<double>(nx - 1),
                                extents[1] * static_cast<double>(j) / static_cast<double>(ny - 1),
                                extents[2] * static_cast<double>(k) / static_cast<double>(nz - 1));
      }
    }
  }
  mesh.elements.reserve(static_cast<std::size_t>((nx - 1) * (ny - 1) * (nz - 1)));
  for (Index k = 0; k + 1 < nz; ++k) {
    for (Index j = 0; j + 1 < ny; ++j) {
      for (Index i = 0; i + 1 < nx; ++i) {
        mesh.elements.push_back({node_id(i, j, k), node_id(i + 1, j, k), node_id(i + 1, j + 1, k),
                                 node_id(i, j + 1, k), node_id(i, j, k + 1),
                                 node_id(i + 1, j, k + 1), node_id(i + 1, j + 1, k + 1),
                                 node_id(i, j + 1, k + 1)});
      }
    }
  }
  return mesh;
}

std::vector<ElementBlock> build_element_blocks(const Mesh& mesh, const Material& mat,
                                               Lumping lumping) {
  mat.validate();
  mesh.validate();
  std::vector<ElementBlock> blocks;
  blocks.reserve(mesh.elements.size());
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const Hex8Geometry g = mesh.element_geometry(e);
    ElementBlock block;
    block.stiffness = hex8_stiffness(g, mat);
    block.mass = hex8_consistent_mass(g, mat);
    block.lumped_mass = lumping == Lumping::RowSum ? lump_row_sum(block.mass) : lump_hrz(block.mass);
    block.element_mass = hex8_element_mass(g, mat);
    block.dof_map = mesh.element_dofs(e);
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace msl::fem
