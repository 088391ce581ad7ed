#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "msl/analysis.hpp"

namespace msl::analysis {
namespace {

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::string join(std::string_view a, std::string_view b) {
  std::string s(a);
  s += '.';
  s += b;
  return s;
}

// Diagonal matrices skip the dense solver.
Vector eigenvalues(const SymMatrix& m) {
  if (m.is_diagonal()) {
    Vector d = m.diagonal_entries();
    std::sort(d.data(), d.data() + d.size());
    return d;
  }
  return sym_eig(m, EigJob::ValuesOnly).values;
}

}  // namespace

double critical_dt(double lambda_max) {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw Error(Errc::NonPositiveEigenvalue, "critical step needs a positive finite lambda_max");
  }
  return 2.0 / std::sqrt(lambda_max);
}

Vector frequencies(const Vector& lambda) { return lambda.cwiseMax(0.0).cwiseSqrt(); }

Index rigid_mode_count(const Vector& lambda, double tol) {
  const Index n = lambda.size();
  if (n == 0) return 0;
  const double top = lambda.maxCoeff();
  if (!(top > 0.0)) return n;
  Index count = 0;
  while (count < n && lambda(count) < tol * top) ++count;
  return count;
}

double BoundRecord::relative_slack() const noexcept {
  double s = scale > 0.0 ? scale : std::max(std::abs(lhs), std::abs(rhs));
  if (!(s > 0.0)) return slack() >= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return slack() / s;
}

void BoundSet::add(std::string source, double lhs, double rhs, double scale, std::optional<Index> index) {
  records.push_back(BoundRecord{std::move(source), lhs, rhs, scale, index});
}

void BoundSet::append(const BoundSet& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

bool BoundSet::all_hold(double rel_tol) const noexcept {
  return std::all_of(records.begin(), records.end(), [&](const BoundRecord& r) { return r.holds(rel_tol); });
}

const BoundRecord* BoundSet::find(std::string_view source) const noexcept {
  for (const auto& r : records) {
    if (r.source == source) return &r;
  }
  return nullptr;
}

const BoundRecord& BoundSet::at(std::string_view source) const {
  if (const auto* r = find(source)) return *r;
  throw Error(Errc::InvalidParameter, "no bound record '" + std::string(source) + "'");
}

double RatioCurve::max() const {
  if (ratio.empty()) throw Error(Errc::EmptySelection, "ratio curve has no flexible modes");
  return *std::max_element(ratio.begin(), ratio.end());
}

double RatioCurve::min() const {
  if (ratio.empty()) throw Error(Errc::EmptySelection, "ratio curve has no flexible modes");
  return *std::min_element(ratio.begin(), ratio.end());
}

RatioCurve frequency_ratio_curve(const Vector& lambda, const Vector& lambda_bar) {
  if (lambda.size() != lambda_bar.size()) {
    throw Error(Errc::DimensionMismatch, "original and scaled spectra differ in length");
  }
  RatioCurve curve;
  for (Index k = rigid_mode_count(lambda); k < lambda.size(); ++k) {
    curve.modes.push_back(k);
    curve.ratio.push_back(lambda_bar(k) > 0.0 ? std::sqrt(lambda(k) / lambda_bar(k))
                                              : std::numeric_limits<double>::infinity());
  }
  return curve;
}

RatioCurve frequency_ratio_curve(const SymMatrix& k, const SymMatrix& m, const SymMatrix& mbar) {
  return frequency_ratio_curve(generalized_eig(MatrixPair(k, m), EigJob::ValuesOnly).values,
                               generalized_eig(MatrixPair(k, mbar), EigJob::ValuesOnly).values);
}

double ratio_roundoff_scale(const Vector& lambda, const Vector& lambda_bar, Index k) {
  return std::max(max_abs(lambda) / lambda(k), max_abs(lambda_bar) / lambda_bar(k));
}

BoundSet sandwich_bounds(const Vector& lambda, const Vector& lambda_bar, const Vector& mass_pair) {
  const Index n = lambda.size();
  if (lambda_bar.size() != n || mass_pair.size() != n || n == 0) {
    throw Error(Errc::DimensionMismatch, "sandwich bounds need three spectra of equal length");
  }
  BoundSet out;
  const double top = max_abs(lambda);

  Index worst = 0;
  for (Index k = 1; k < n; ++k) {
    if (lambda_bar(k) - lambda(k) > lambda_bar(worst) - lambda(worst)) worst = k;
  }
  out.add("monotonicity", lambda_bar(worst), lambda(worst), top, worst);

  Index lo = -1, hi = -1;
  double rlo = std::numeric_limits<double>::infinity(), rhi = -rlo;
  for (Index k = rigid_mode_count(lambda); k < n; ++k) {
    const double r = lambda(k) / lambda_bar(k);
    if (r < rlo) { rlo = r; lo = k; }
    if (r > rhi) { rhi = r; hi = k; }
  }
  if (lo >= 0) {
    out.add("sandwich.lower", mass_pair(0), rlo, rlo * ratio_roundoff_scale(lambda, lambda_bar, lo), lo);
    out.add("sandwich.upper", rhi, mass_pair(n - 1), rhi * ratio_roundoff_scale(lambda, lambda_bar, hi), hi);
  }
  return out;
}

BoundSet sandwich_bounds(const SymMatrix& k, const SymMatrix& m, const SymMatrix& mbar) {
  return sandwich_bounds(generalized_eig(MatrixPair(k, m), EigJob::ValuesOnly).values,
                         generalized_eig(MatrixPair(k, mbar), EigJob::ValuesOnly).values,
                         generalized_eig(MatrixPair(mbar, m), EigJob::ValuesOnly).values);
}

ElementExtremes element_extremes(std::span<const SymMatrix> element_matrices) {
  if (element_matrices.empty()) throw Error(Errc::EmptySelection, "no element matrices");
  ElementExtremes out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0};
  for (std::size_t e = 0; e < element_matrices.size(); ++e) {
    const Vector v = eigenvalues(element_matrices[e]);
    out.min_low = std::min(out.min_low, v(0));
    if (v(v.size() - 1) > out.max_high) {
      out.max_high = v(v.size() - 1);
      out.argmax = static_cast<Index>(e);
    }
  }
  return out;
}

ElementExtremes element_extremes(std::span<const SymMatrix> a, std::span<const SymMatrix> b) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "element pair lists differ in length");
  if (a.empty()) throw Error(Errc::EmptySelection, "no element matrices");
  ElementExtremes out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0};
  for (std::size_t e = 0; e < a.size(); ++e) {
    const Vector v = generalized_eig(MatrixPair(a[e], b[e]), EigJob::ValuesOnly).values;
    out.min_low = std::min(out.min_low, v(0));
    if (v(v.size() - 1) > out.max_high) {
      out.max_high = v(v.size() - 1);
      out.argmax = static_cast<Index>(e);
    }
  }
  return out;
}

BoundSet fried_bounds(std::string_view name, const Vector& values, const ElementExtremes& elements,
                      Index p_max) {
  BoundSet out;
  const double top = values.maxCoeff();
  const double scale = std::max(max_abs(values), std::abs(elements.max_high));
  out.add(join(name, "fried.lower"), elements.max_high, top, 0.0, elements.argmax);
  out.add(join(name, "fried.upper"), top, static_cast<double>(p_max) * elements.max_high);
  out.add(join(name, "fried.min"), elements.min_low, values.minCoeff(), scale);
  return out;
}

BoundSet irons_wathen_bounds(std::string_view name, const Vector& values, const ElementExtremes& elements) {
  BoundSet out;
  const double scale = std::max(max_abs(values), std::abs(elements.max_high));
  out.add(join(name, "irons_wathen.lower"), elements.min_low, values.minCoeff(), scale);
  out.add(join(name, "irons_wathen.upper"), values.maxCoeff(), elements.max_high, 0.0, elements.argmax);
  return out;
}

double corollary_bound(const scaling::ScalingSpec& spec, std::span<const fem::ElementBlock> blocks) {
  using scaling::ScalingKind;
  spec.validate();
  switch (spec.kind) {
    case ScalingKind::Cms:
      return std::sqrt(spec.alpha);
    case ScalingKind::LocalDeflationS1:
      return std::sqrt(1.0 + spec.alpha);
    case ScalingKind::LocalDeflationS2: {
      if (blocks.empty()) throw Error(Errc::InvalidParameter, "the S2 bound needs the element blocks");
      double worst = 1.0;
      for (const auto& b : blocks) {
        const Index m = b.size();
        if (spec.rank <= 0) break;
        if (spec.rank >= m) throw Error(Errc::RankTooLarge, "rank exceeds the element order");
        const Vector v = generalized_eig(MatrixPair(b.stiffness, b.lumped_mass), EigJob::ValuesOnly).values;
        worst = std::max(worst, std::sqrt(v(m - 1) / v(m - spec.rank - 1)));
      }
      return worst;
    }
    case ScalingKind::Olovsson:
      return spec.olovsson_variant == scaling::OlovssonVariant::Original ? std::sqrt(1.0 + 8.0 * spec.beta / 7.0)
                                                                         : std::sqrt(1.0 + spec.beta);
    case ScalingKind::Hoffmann:
      return std::sqrt(1.0 + 4.5 * spec.beta);
    default:
      throw Error(Errc::NoBoundForKind,
                  "no frequency-ratio bound for " + std::string(scaling::to_string(spec.kind)));
  }
}

ConditionReport condition_report(const SymMatrix& m, const SymMatrix& mbar, Index p_max,
                                 std::span<const fem::ElementBlock> scaled_blocks,
                                 const scaling::ScalingSpec& spec, const Vector* pair_values) {
  using scaling::ScalingKind;
  ConditionReport out;
  out.m_values = eigenvalues(m);
  out.mbar_values = eigenvalues(mbar);
  out.pair_values = pair_values ? *pair_values : generalized_eig(MatrixPair(mbar, m), EigJob::ValuesOnly).values;
  auto kappa = [](const Vector& v, const char* what) {
    if (!(v(0) > 0.0)) throw Error(Errc::NotPositiveDefinite, std::string(what) + " is not positive definite");
    return v(v.size() - 1) / v(0);
  };
  out.kappa_m = kappa(out.m_values, "M");
  out.kappa_mbar = kappa(out.mbar_values, "Mbar");
  out.kappa_pair = kappa(out.pair_values, "(Mbar, M)");
  out.bounds.add("conditioning.pair", out.kappa_mbar / out.kappa_m, out.kappa_pair);

  if (!scaled_blocks.empty()) {
    std::vector<SymMatrix> me, mbe;
    double mass_max = 0.0, mass_min = std::numeric_limits<double>::infinity();
    for (const auto& b : scaled_blocks) {
      me.push_back(b.lumped_mass);
      mbe.push_back(b.has_scaling() ? b.lumped_mass + b.scaling : b.lumped_mass);
      mass_max = std::max(mass_max, b.element_mass);
      mass_min = std::min(mass_min, b.element_mass);
    }
    const ElementExtremes em = element_extremes(me);
    const ElementExtremes ebm = element_extremes(mbe);
    const double pm = static_cast<double>(p_max);
    out.bounds.add("conditioning.assembly.M", out.kappa_m, pm * em.max_high / em.min_low);
    // A global M_bar is not an element assembly; its element bound does not apply.
    if (spec.is_local()) {
      out.bounds.add("conditioning.assembly.Mbar", out.kappa_mbar, pm * ebm.max_high / ebm.min_low);
    }

    auto method = [&](const std::string& name, double factor) {
      out.bounds.add(name + ".cond_ratio", out.kappa_mbar / out.kappa_m, factor);
      out.bounds.add(name + ".cond_pair", out.kappa_pair, factor);
      out.bounds.add(name + ".cond_mbar", out.kappa_mbar, pm * factor * mass_max / mass_min);
    };
    switch (spec.kind) {
      case ScalingKind::Olovsson:
        method("olovsson", spec.olovsson_variant == scaling::OlovssonVariant::Original
                               ? 1.0 + 8.0 * spec.beta / 7.0
                               : 1.0 + spec.beta);
        break;
      case ScalingKind::Hoffmann:
        method("hoffmann", 1.0 + 4.5 * spec.beta);
        break;
      case ScalingKind::Cms:
        out.bounds.add("cms.cond_pair", out.kappa_pair, spec.alpha);
        break;
      case ScalingKind::EigStabilization:
        // Scaled element maxima: with equal lumped entries the floor can
        // also lift the heaviest DOFs, by up to epsilon.
        if (spec.epsilon > 0.0) {
          out.bounds.add("stabilization.cond", out.kappa_mbar, pm / spec.epsilon * ebm.max_high);
        }
        break;
      default:
        break;
    }
  }
  return out;
}

double asymptotic_cond_rate(const fem::Mesh& mesh) {
  mesh.validate();
  const Index count = mesh.element_count();
  if (count == 0) throw Error(Errc::NonUniformMesh, "mesh has no elements");
  const fem::Hex8Geometry ref = mesh.element_geometry(0);
  double size = 0.0;
  for (const auto& c : ref.corners) size = std::max(size, (c - ref.corners[0]).norm());
  for (Index e = 1; e < count; ++e) {
    const fem::Hex8Geometry g = mesh.element_geometry(e);
    for (std::size_t a = 0; a < 8; ++a) {
      const fem::Point d = (g.corners[a] - g.corners[0]) - (ref.corners[a] - ref.corners[0]);
      if (d.norm() > 1e-9 * size) {
        throw Error(Errc::NonUniformMesh,
                    "element " + std::to_string(e) + " differs in shape from element 0",
                    static_cast<std::size_t>(e));
      }
    }
  }
  const double n = static_cast<double>(mesh.dof_count());
  return 8.0 * n / (7.0 * 24.0 * static_cast<double>(count));
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::DimensionMismatch, "slope fit needs paired samples");
  if (x.size() < 2) throw Error(Errc::InvalidParameter, "slope fit needs at least two samples");
  const double k = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw Error(Errc::InvalidParameter, "slope fit needs distinct abscissae");
  return sxy / sxx;
}

double large_parameter_slope(std::span<const double> x, std::span<const double> y, std::size_t count) {
  if (x.size() != y.size()) throw Error(Errc::DimensionMismatch, "slope fit needs paired samples");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  order.resize(std::min(count, order.size()));
  std::vector<double> xs, ys;
  for (std::size_t i : order) {
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  return least_squares_slope(xs, ys);
}

}  // namespace msl::analysis
