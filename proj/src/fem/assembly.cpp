#include <algorithm>
#include <string>

#include "msl/fem.hpp"

namespace msl::fem {
namespace {

const SymMatrix& select(const ElementBlock& b, MatrixKind which) {
  switch (which) {
    case MatrixKind::Stiffness: return b.stiffness;
    case MatrixKind::Lumped: return b.lumped_mass;
    case MatrixKind::Consistent: return b.mass;
    case MatrixKind::Scaling: return b.scaling;
  }
  return b.stiffness;
}

void check_map(Index n, const ElementBlock& b, std::size_t e) {
  for (Index dof : b.dof_map) {
    if (dof < 0 || dof >= n) {
      throw Error(Errc::IndexOutOfRange,
                  "element " + std::to_string(e) + " maps to DOF " + std::to_string(dof) +
                      " outside [0, " + std::to_string(n) + ")",
                  e);
    }
  }
}

// Elements are summed in order, so the result is reproducible bit for bit.
void scatter(Matrix& global, const SymMatrix& local, const DofMap& map) {
  const Index m = static_cast<Index>(map.size());
  if (local.order() != m) {
    throw Error(Errc::DimensionMismatch, "element matrix order does not match its DOF map");
  }
  for (Index j = 0; j < m; ++j) {
    const Index gj = map[static_cast<std::size_t>(j)];
    for (Index i = 0; i < m; ++i) global(map[static_cast<std::size_t>(i)], gj) += local(i, j);
  }
}

}  // namespace

SymMatrix assemble(Index n, std::span<const ElementBlock> blocks, MatrixKind which) {
  Matrix global = Matrix::Zero(n, n);
  for (std::size_t e = 0; e < blocks.size(); ++e) {
    const auto& b = blocks[e];
    check_map(n, b, e);
    const SymMatrix& local = select(b, which);
    if (which == MatrixKind::Scaling && !b.has_scaling()) continue;
    scatter(global, local, b.dof_map);
  }
  return SymMatrix(global);
}

SymMatrix assemble(Index n, std::span<const ElementBlock> blocks,
                   std::span<const SymMatrix> element_matrices) {
  if (blocks.size() != element_matrices.size()) {
    throw Error(Errc::DimensionMismatch, "one element matrix per block is required");
  }
  Matrix global = Matrix::Zero(n, n);
  for (std::size_t e = 0; e < blocks.size(); ++e) {
    check_map(n, blocks[e], e);
    scatter(global, element_matrices[e], blocks[e].dof_map);
  }
  return SymMatrix(global);
}

std::vector<Index> dof_valence(Index n, std::span<const ElementBlock> blocks) {
  std::vector<Index> count(static_cast<std::size_t>(n), 0);
  for (std::size_t e = 0; e < blocks.size(); ++e) {
    check_map(n, blocks[e], e);
    for (Index dof : blocks[e].dof_map) ++count[static_cast<std::size_t>(dof)];
  }
  return count;
}

SymMatrix restrict_to_free(const SymMatrix& m, std::span<const Index> fixed) {
  std::vector<bool> is_fixed(static_cast<std::size_t>(m.order()), false);
  for (Index dof : fixed) {
    if (dof < 0 || dof >= m.order()) {
      throw Error(Errc::IndexOutOfRange, "fixed DOF " + std::to_string(dof) + " out of range");
    }
    is_fixed[static_cast<std::size_t>(dof)] = true;
  }
  std::vector<Index> free;
  for (Index i = 0; i < m.order(); ++i) {
    if (!is_fixed[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  const Index nf = static_cast<Index>(free.size());
  Matrix out(nf, nf);
  for (Index j = 0; j < nf; ++j) {
    for (Index i = 0; i < nf; ++i) {
      out(i, j) = m(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
    }
  }
  return SymMatrix(out);
}

}  // namespace msl::fem
