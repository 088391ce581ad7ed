#include <algorithm>

#include "msl/analysis.hpp"

namespace msl::analysis {

Index p_max(std::span<const fem::ElementBlock> blocks, Index n) {
  const auto valence = fem::dof_valence(n, blocks);
  return valence.empty() ? 0 : *std::max_element(valence.begin(), valence.end());
}

double gershgorin_pair_max(const SymMatrix& k, const SymMatrix& m) {
  if (k.order() != m.order()) throw Error(Errc::DimensionMismatch, "K and M orders differ");
  if (m.is_diagonal()) {
    const Vector d = m.diagonal_entries();
    if ((d.array() <= 0.0).any()) throw Error(Errc::NotPositiveDefinite, "diagonal mass has a nonpositive entry");
    const Vector s = d.cwiseSqrt().cwiseInverse();
    return gershgorin_max(SymMatrix(s.asDiagonal() * k.dense() * s.asDiagonal()));
  }
  const Matrix l = cholesky(m);
  Matrix c = l.triangularView<Eigen::Lower>().solve(k.dense());
  c = l.triangularView<Eigen::Lower>().solve(c.transpose()).eval();
  return gershgorin_max(SymMatrix(0.5 * (c + c.transpose())));
}

SpectralReport spectral_report(const scaling::FeSystem& fe, const scaling::ScaledSystem& scaled,
                               const ReportOptions& options) {
  const EigJob job = options.refine ? EigJob::ValuesAndVectors : EigJob::ValuesOnly;
  const MatrixPair base_pair = fe.pair();
  const MatrixPair scaled_pair = scaled.pair();

  SpectralReport out;
  out.label = scaled.provenance.label();

  if (options.base && (!options.refine || options.base->has_vectors())) {
    out.lambda = options.refine ? rayleigh_quotients(base_pair, options.base->vectors) : options.base->values;
  } else {
    const EigDecomposition e = generalized_eig(base_pair, job);
    out.lambda = options.refine ? rayleigh_quotients(base_pair, e.vectors) : e.values;
  }
  {
    const EigDecomposition e = generalized_eig(scaled_pair, job);
    out.lambda_bar = options.refine ? rayleigh_quotients(scaled_pair, e.vectors) : e.values;
  }
  out.mass_pair = generalized_eig(MatrixPair(scaled_pair.b, fe.m), EigJob::ValuesOnly).values;

  const Index n = fe.n;
  out.ratio = frequency_ratio_curve(out.lambda, out.lambda_bar);
  out.dt_c = critical_dt(out.lambda(n - 1));
  out.dt_c_bar = critical_dt(out.lambda_bar(n - 1));
  try {
    out.corollary = corollary_bound(scaled.provenance, fe.blocks);
  } catch (const Error& e) {
    if (e.code() != Errc::NoBoundForKind) throw;
  }
  out.gershgorin = gershgorin_pair_max(scaled_pair.a, scaled_pair.b);

  const Index pm = p_max(fe.blocks, n);
  const bool local = !scaled.element_blocks.empty();
  out.condition = condition_report(fe.m, scaled_pair.b, pm,
                                   local ? std::span<const fem::ElementBlock>(scaled.element_blocks)
                                         : std::span<const fem::ElementBlock>(fe.blocks),
                                   scaled.provenance, &out.mass_pair);

  out.bounds = sandwich_bounds(out.lambda, out.lambda_bar, out.mass_pair);
  out.bounds.append(out.condition.bounds);
  out.bounds.add("gershgorin", out.lambda_bar(n - 1), out.gershgorin);
  if (out.corollary) {
    // sqrt halves the sensitivity of the eigenvalue ratio.
    const double top = out.ratio.max();
    const auto at = std::find(out.ratio.ratio.begin(), out.ratio.ratio.end(), top) - out.ratio.ratio.begin();
    const Index k = out.ratio.modes[static_cast<std::size_t>(at)];
    out.bounds.add("corollary", top, *out.corollary, 0.5 * top * ratio_roundoff_scale(out.lambda, out.lambda_bar, k), k);
  }

  std::vector<SymMatrix> ke, me, mbe;
  for (const auto& b : fe.blocks) {
    ke.push_back(b.stiffness);
    me.push_back(b.lumped_mass);
  }
  out.bounds.append(irons_wathen_bounds("KM", out.lambda, element_extremes(ke, me)));
  out.bounds.append(fried_bounds("M", out.condition.m_values, element_extremes(me), pm));
  if (local) {
    for (const auto& b : scaled.element_blocks) mbe.push_back(b.has_scaling() ? b.lumped_mass + b.scaling : b.lumped_mass);
    out.bounds.append(irons_wathen_bounds("KMbar", out.lambda_bar, element_extremes(ke, mbe)));
    out.bounds.append(irons_wathen_bounds("MbarM", out.mass_pair, element_extremes(mbe, me)));
    out.bounds.append(fried_bounds("Mbar", out.condition.mbar_values, element_extremes(mbe), pm));
  }
  if (options.stiffness_bounds) {
    out.bounds.append(fried_bounds("K", sym_eig(fe.k, EigJob::ValuesOnly).values, element_extremes(ke), pm));
  }
  return out;
}

}  // namespace msl::analysis
