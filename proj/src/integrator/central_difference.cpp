#include <cmath>
#include <future>
#include <limits>
#include <random>

#include <Eigen/LU>

#include "msl/integrator.hpp"

namespace msl::integrator {
namespace {

double m_norm(const MassSolver& m, const Vector& x) { return std::sqrt(std::max(0.0, x.dot(m.apply(x)))); }

template <class Stiffness>
RunResult run(const Stiffness& k, const MassSolver& m, const Vector& u0, const Vector& v0,
              const RunOptions& opt) {
  const Index n = m.order();
  if (!(opt.dt > 0.0) || !std::isfinite(opt.dt)) throw Error(Errc::InvalidParameter, "time step must be positive");
  if (opt.steps < 0) throw Error(Errc::InvalidParameter, "step count must be nonnegative");
  if (k.rows() != n || u0.size() != n || v0.size() != n || (opt.force && opt.force->size() != n)) {
    throw Error(Errc::DimensionMismatch, "stiffness, mass and initial state sizes differ");
  }
  const double dt = opt.dt;
  const Vector f = opt.force ? *opt.force : Vector::Zero(n);

  RunResult out;
  out.initial_norm = m_norm(m, u0);
  const double norm_scale = out.initial_norm > 0.0 ? out.initial_norm : 1.0;
  out.max_growth = out.initial_norm > 0.0 ? 1.0 : 0.0;

  Vector ku = k * u0;
  Vector a = m.solve(f - ku);
  Vector u_prev = u0 - dt * v0 + 0.5 * dt * dt * a;
  Vector u = u0;
  Vector u_next(n);
  bool have_energy = false;

  Index step = 0;
  for (; step < opt.steps; ++step) {
    u_next = 2.0 * u - u_prev + dt * dt * a;
    const Vector ku_next = k * u_next;
    const Vector v_half = (u_next - u) / dt;
    const double energy = 0.5 * v_half.dot(m.apply(v_half)) + 0.5 * u.dot(ku_next) - 0.5 * f.dot(u + u_next);
    const double norm = m_norm(m, u_next);
    const double growth = norm / norm_scale;

    if (!have_energy) {
      out.initial_energy = energy;
      have_energy = true;
    } else if (out.initial_energy != 0.0) {
      out.max_energy_drift =
          std::max(out.max_energy_drift, std::abs(energy - out.initial_energy) / std::abs(out.initial_energy));
    }
    if (opt.record_trace) out.trace.push_back({step + 1, (step + 1) * dt, energy, norm});

    u_prev.swap(u);
    u.swap(u_next);
    ku = ku_next;
    a = m.solve(f - ku);

    if (!std::isfinite(growth)) {
      out.max_growth = std::numeric_limits<double>::infinity();
      out.stopped_early = true;
      ++step;
      break;
    }
    out.max_growth = std::max(out.max_growth, growth);
    if (opt.stop_growth > 0.0 && growth > opt.stop_growth) {
      out.stopped_early = true;
      ++step;
      break;
    }
  }

  out.steps_run = step;
  out.state.u = u;
  out.state.v = (u - u_prev) / dt;  // backward difference at the last step
  out.state.a = a;
  out.state.t = static_cast<double>(step) * dt;
  out.state.step = step;
  out.final_growth = m_norm(m, u) / norm_scale;
  return out;
}

}  // namespace

RunResult central_difference_run(const SparseMatrix& k, const MassSolver& m, const Vector& u0,
                                 const Vector& v0, const RunOptions& options) {
  return run(k, m, u0, v0, options);
}

RunResult central_difference_run(const SymMatrix& k, const MassSolver& m, const Vector& u0,
                                 const Vector& v0, const RunOptions& options) {
  SparseMatrix ks = k.dense().sparseView();
  ks.makeCompressed();
  return run(ks, m, u0, v0, options);
}

std::string_view to_string(Stability s) noexcept {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

StabilityVerdict classify(const RunResult& run, double dt, double stable_limit, double unstable_limit) {
  StabilityVerdict v;
  v.dt = dt;
  v.growth = run.final_growth;
  v.max_growth = run.max_growth;
  v.energy_drift = run.max_energy_drift;
  v.steps = run.steps_run;
  if (run.max_growth > unstable_limit) {
    v.classification = Stability::Unstable;
  } else if (run.max_growth <= stable_limit) {
    v.classification = Stability::Stable;
  } else {
    v.classification = Stability::Inconclusive;
  }
  return v;
}

Vector random_unit_displacement(const MassSolver& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector x(m.order());
  for (Index i = 0; i < x.size(); ++i) x(i) = dist(rng);
  return x / m_norm(m, x);
}

Vector top_eigenvector(const SymMatrix& k, const SymMatrix& m, double lambda_max_estimate) {
  if (k.order() != m.order()) throw Error(Errc::DimensionMismatch, "K and M orders differ");
  const Index n = k.order();
  const double sigma = lambda_max_estimate * (1.0 + 1e-6);
  const Eigen::PartialPivLU<Matrix> lu(k.dense() - sigma * m.dense());
  Vector x = Vector::Ones(n);
  for (Index i = 0; i < n; ++i) x(i) += 1e-3 * static_cast<double>(i % 7);
  for (int it = 0; it < 6; ++it) {
    x = lu.solve(m * x);
    if (!x.allFinite()) throw Error(Errc::SolveFailure, "inverse iteration broke down");
    x /= std::sqrt(x.dot(m * x));
  }
  return x;
}

BracketResult stability_bracket(const SymMatrix& k, const scaling::MassRepresentation& m,
                                double dt_estimate, const BracketOptions& options) {
  if (!(dt_estimate > 0.0)) throw Error(Errc::InvalidParameter, "step estimate must be positive");
  const MassSolver solver(m);
  SparseMatrix ks = k.dense().sparseView();
  ks.makeCompressed();

  BracketResult out;
  out.dt_estimate = dt_estimate;
  const double lambda_max = 4.0 / (dt_estimate * dt_estimate);
  const SymMatrix mdense = solver.dense();
  const Vector top = top_eigenvector(k, mdense, lambda_max);

  std::uint64_t seed = options.seed;
  Vector u0 = random_unit_displacement(solver, seed);
  out.top_component = std::abs(top.dot(mdense * u0));
  for (int attempt = 0; out.top_component < options.min_top_component; ++attempt) {
    if (attempt >= options.max_reseeds) {
      throw Error(Errc::SolveFailure, "no seed gives a usable component on the top mode");
    }
    u0 = random_unit_displacement(solver, ++seed);
    out.top_component = std::abs(top.dot(mdense * u0));
  }
  out.seed_used = seed;

  const Vector v0 = Vector::Zero(u0.size());
  auto probe = [&](double factor, double stop) {
    RunOptions ro;
    ro.dt = factor * dt_estimate;
    ro.steps = options.steps;
    ro.stop_growth = stop;
    return classify(central_difference_run(ks, solver, u0, v0, ro), ro.dt, options.stable_limit,
                    options.unstable_limit);
  };
  // The stable probe runs to completion; the unstable one stops once it has
  // crossed the divergence threshold.
  if (options.parallel) {
    auto first = std::async(std::launch::async, probe, options.stable_factor, 0.0);
    out.unstable = probe(options.unstable_factor, options.unstable_limit);
    out.stable = first.get();
  } else {
    out.stable = probe(options.stable_factor, 0.0);
    out.unstable = probe(options.unstable_factor, options.unstable_limit);
  }
  return out;
}

}  // namespace msl::integrator
