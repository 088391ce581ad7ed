#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "msl/analysis.hpp"
#include "msl/experiment.hpp"
#include "msl/integrator.hpp"

#ifndef MSL_VERSION
#define MSL_VERSION "0.0.0"
#endif

namespace msl::experiment {
namespace {

constexpr double kBoundTolerance = 1e-9;

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::ConfigError, what); }

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string slug(const std::string& label) {
  std::string out;
  for (char ch : label) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '.' || ch == '-') {
      out += static_cast<char>(std::tolower(c));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "unnamed" : out;
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json optional_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

// Runs fn(i) for i in [0, count) on `threads` workers. Results are written by
// index, so completion order never shows up in the output.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Single writer for the output directory; records every file it creates.
class Emitter {
 public:
  explicit Emitter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    if (!names_.insert(name).second) throw Error(Errc::InvalidParameter, "output file written twice: " + name);
    std::ofstream out(dir_ / name, std::ios::binary);
    out << content;
    if (!out) throw Error(Errc::InvalidParameter, "cannot write " + (dir_ / name).string());
    files_.push_back(name);
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::set<std::string> names_;
  std::vector<std::string> files_;
};

// Clears the files of a previous run so that the directory matches the new
// manifest. A non-empty directory without a manifest is left alone.
void prepare_output_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  if (fs::is_empty(dir)) return;
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest)) {
    config_error("output: directory '" + dir.string() + "' is not empty and holds no manifest.json");
  }
  Json old;
  try {
    std::ifstream in(manifest);
    old = Json::parse(in);
  } catch (const nlohmann::json::exception&) {
    config_error("output: cannot read the previous manifest in '" + dir.string() + "'");
  }
  if (old.contains("files") && old["files"].is_array()) {
    for (const auto& f : old["files"]) {
      if (!f.is_string()) continue;
      const fs::path p = fs::path(f.get<std::string>());
      if (p.is_absolute() || p.filename() != p) continue;  // only plain names we could have written
      fs::remove(dir / p);
    }
  }
  if (!fs::is_empty(dir)) {
    config_error("output: directory '" + dir.string() + "' holds files not listed in its manifest");
  }
}

class StageClock {
 public:
  explicit StageClock(std::map<std::string, double>& sink) : sink_(sink) {}
  void start() { t0_ = std::chrono::steady_clock::now(); }
  void stop(const std::string& stage) {
    sink_[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::chrono::steady_clock::time_point t0_;
};

struct Model {
  bool sdof = false;
  std::optional<fem::Mesh> mesh;
  scaling::FeSystem fe;
};

Model build_model(const ExperimentConfig& c) {
  Model model;
  if (c.source == GeometrySource::Sdof) {
    model.sdof = true;
    model.fe.n = 1;
    model.fe.k = SymMatrix(Matrix::Constant(1, 1, c.sdof_stiffness));
    model.fe.m = SymMatrix(Matrix::Constant(1, 1, c.sdof_mass));
    return model;
  }
  if (c.source == GeometrySource::MeshFile) {
    std::ifstream in(c.mesh_file);
    if (!in) config_error("geometry.mesh_file: cannot open '" + c.mesh_file.string() + "'");
    model.mesh = fem::read_mesh(in);
  } else {
    model.mesh = fem::build_structured_mesh(c.node_counts, c.extents);
  }
  model.fe = scaling::FeSystem::from_blocks(fem::build_element_blocks(*model.mesh, c.material, c.lumping),
                                            model.mesh->dof_count());
  return model;
}

scaling::ScalingSpec resolve(const ScalingEntry& e, double lambda_max) {
  scaling::ScalingSpec s = e.spec;
  if (e.mu_relative) s.mu = *e.mu_relative / lambda_max;
  if (e.c_relative) s.c = *e.c_relative / (lambda_max * lambda_max);
  return s;
}

// SDOF systems carry no elements; only whole-mass CMS (M_bar = alpha M) applies.
scaling::ScaledSystem scale_sdof(const scaling::FeSystem& fe, const scaling::ScalingSpec& s) {
  if (s.kind != scaling::ScalingKind::Cms || s.selector) {
    config_error("scalings: a single-DOF geometry supports only cms without a selector");
  }
  scaling::ScaledSystem out;
  out.kbar = fe.k;
  out.mbar = SymMatrix(s.alpha * fe.m.dense());
  out.provenance = s;
  return out;
}

scaling::ScaledSystem scale(const Model& model, const scaling::ScalingSpec& s, const EigDecomposition* base) {
  if (model.sdof) return scale_sdof(model.fe, s);
  const bool needs_vectors = s.kind == scaling::ScalingKind::GlobalDeflation;
  return scaling::apply(model.fe, s, needs_vectors && base && base->has_vectors() ? base : nullptr);
}

// Names are unique per run; repeated labels get a numeric suffix.
std::vector<std::string> unique_slugs(const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  std::map<std::string, int> seen;
  for (const auto& l : labels) {
    std::string s = slug(l);
    const int k = ++seen[s];
    if (k > 1) s += "_" + std::to_string(k);
    out.push_back(s);
  }
  return out;
}

Json bound_json(const analysis::BoundRecord& b) {
  Json j;
  j["source"] = b.source;
  j["lhs"] = b.lhs;
  j["rhs"] = b.rhs;
  j["scale"] = b.scale;
  j["index"] = b.index ? Json(*b.index) : Json(nullptr);
  j["slack"] = b.slack();
  j["relative_slack"] = b.relative_slack();
  j["holds"] = b.holds(kBoundTolerance);
  return j;
}

Json spec_summary(const scaling::ScalingSpec& s) {
  Json j;
  j["kind"] = std::string(scaling::to_string(s.kind));
  j["label"] = s.label();
  return j;
}

// ---------------------------------------------------------------- element

std::string element_csv(const analysis::ElementRayleighReport& r, const Vector& mass_pair) {
  std::ostringstream os;
  os << "mode,lambda,scaled,q,mapped,position,residual,mass_pair\n";
  for (Index k = 0; k < r.lambda.size(); ++k) {
    os << k + 1 << ',' << g17(r.lambda(k)) << ',' << g17(r.scaled(k)) << ',' << g17(r.q(k)) << ','
       << g17(r.mapped(k)) << ',' << r.position[static_cast<std::size_t>(k)] + 1 << ',' << g17(r.residual(k))
       << ',' << g17(mass_pair(k)) << '\n';
  }
  return os.str();
}

Json element_json(const fem::ElementBlock& block, const scaling::ScalingSpec& s,
                  const analysis::ElementRayleighReport& r, const Vector& mass_pair) {
  Json j;
  j["scaling"] = spec_summary(s);
  j["rigid_modes"] = r.rigid;
  j["permuted"] = r.permuted();
  j["lambda"] = vec_json(r.lambda);
  j["scaled"] = vec_json(r.scaled);
  j["q"] = vec_json(r.q);
  j["mapped"] = vec_json(r.mapped);
  Json pos = Json::array();
  for (Index p : r.position) pos.push_back(p + 1);
  j["position"] = pos;
  j["residual"] = vec_json(r.residual);
  j["mass_pair"] = vec_json(mass_pair);
  j["max_residual"] = r.residual.size() ? r.residual.maxCoeff() : 0.0;

  if (s.kind == scaling::ScalingKind::LocalDeflationS1) {
    const Index m = r.lambda.size();
    const Index rank = scaling::local_deflation_element(block, s.rank, s.kind, s.alpha).effective_rank;
    const double below = r.lambda(m - rank - 1);  // lambda_{m-r}
    const double above = r.lambda(m - rank);      // lambda_{m-r+1}
    const double threshold = above / below - 1.0;
    const double predicted_max = std::max(below, r.lambda(m - 1) / (1.0 + s.alpha));
    const double observed_max = r.scaled(m - 1);
    Json gap;
    gap["rank"] = s.rank;
    gap["effective_rank"] = rank;
    gap["alpha"] = s.alpha;
    gap["alpha_threshold"] = threshold;
    gap["ordering_predicted"] = s.alpha <= threshold;
    gap["ordering_observed"] = !r.permuted();
    gap["max_predicted"] = predicted_max;
    gap["max_observed"] = observed_max;
    gap["max_relative_error"] = std::abs(observed_max - predicted_max) / predicted_max;
    j["gap"] = gap;
  }
  return j;
}

// --------------------------------------------------------------- spectrum

std::string spectrum_csv(const analysis::SpectralReport& r) {
  std::vector<double> ratio(static_cast<std::size_t>(r.lambda.size()), std::nan(""));
  for (std::size_t i = 0; i < r.ratio.modes.size(); ++i) ratio[static_cast<std::size_t>(r.ratio.modes[i])] = r.ratio.ratio[i];
  const Vector w = analysis::frequencies(r.lambda);
  const Vector wb = analysis::frequencies(r.lambda_bar);
  std::ostringstream os;
  os << "mode,lambda,lambda_bar,omega,omega_bar,ratio,mass_pair\n";
  for (Index k = 0; k < r.lambda.size(); ++k) {
    os << k + 1 << ',' << g17(r.lambda(k)) << ',' << g17(r.lambda_bar(k)) << ',' << g17(w(k)) << ','
       << g17(wb(k)) << ',' << g17(ratio[static_cast<std::size_t>(k)]) << ',' << g17(r.mass_pair(k)) << '\n';
  }
  return os.str();
}

Json condition_json(const analysis::ConditionReport& c) {
  return Json{{"kappa_m", c.kappa_m}, {"kappa_mbar", c.kappa_mbar}, {"kappa_pair", c.kappa_pair}};
}

Json spectrum_json(const analysis::SpectralReport& r, const scaling::ScalingSpec& s) {
  const Index n = r.lambda.size();
  Json j;
  j["scaling"] = spec_summary(s);
  j["n"] = n;
  j["rigid_modes"] = analysis::rigid_mode_count(r.lambda);
  j["lambda_max"] = r.lambda(n - 1);
  j["lambda_bar_max"] = r.lambda_bar(n - 1);
  j["dt_c"] = r.dt_c;
  j["dt_c_bar"] = r.dt_c_bar;
  j["dt_ratio"] = r.dt_c_bar / r.dt_c;
  j["corollary"] = optional_json(r.corollary);
  j["gershgorin"] = r.gershgorin;
  j["ratio"] = r.ratio.modes.empty() ? Json{{"max", nullptr}, {"min", nullptr}}
                                     : Json{{"max", r.ratio.max()}, {"min", r.ratio.min()}};
  j["condition"] = condition_json(r.condition);
  j["lambda"] = vec_json(r.lambda);
  j["lambda_bar"] = vec_json(r.lambda_bar);
  j["mass_pair"] = vec_json(r.mass_pair);
  return j;
}

std::string bounds_csv(const analysis::BoundSet& b) {
  std::ostringstream os;
  os << "source,lhs,rhs,scale,index,slack,relative_slack,holds\n";
  for (const auto& r : b.records) {
    os << r.source << ',' << g17(r.lhs) << ',' << g17(r.rhs) << ',' << g17(r.scale) << ','
       << (r.index ? std::to_string(*r.index + 1) : std::string()) << ',' << g17(r.slack()) << ','
       << g17(r.relative_slack()) << ',' << (r.holds(kBoundTolerance) ? "true" : "false") << '\n';
  }
  return os.str();
}

Json bounds_json(const analysis::SpectralReport& r, const scaling::ScalingSpec& s) {
  Json j;
  j["scaling"] = spec_summary(s);
  j["tolerance"] = kBoundTolerance;
  j["all_hold"] = r.bounds.all_hold(kBoundTolerance);
  j["dt_ratio"] = r.dt_c_bar / r.dt_c;
  j["corollary"] = optional_json(r.corollary);
  j["condition"] = condition_json(r.condition);
  j["bounds"] = Json::array();
  for (const auto& b : r.bounds.records) j["bounds"].push_back(bound_json(b));
  return j;
}

// Single-DOF spectrum: no elements, so no element bounds.
analysis::SpectralReport sdof_report(const scaling::FeSystem& fe, const scaling::ScaledSystem& sc) {
  analysis::SpectralReport r;
  r.label = sc.provenance.label();
  const double k = fe.k.dense()(0, 0);
  const double m = fe.m.dense()(0, 0);
  const double mb = sc.mbar_dense().dense()(0, 0);
  r.lambda = Vector::Constant(1, k / m);
  r.lambda_bar = Vector::Constant(1, k / mb);
  r.mass_pair = Vector::Constant(1, mb / m);
  r.ratio = analysis::frequency_ratio_curve(r.lambda, r.lambda_bar);
  r.dt_c = analysis::critical_dt(r.lambda(0));
  r.dt_c_bar = analysis::critical_dt(r.lambda_bar(0));
  r.gershgorin = r.lambda_bar(0);
  r.condition.kappa_m = r.condition.kappa_mbar = r.condition.kappa_pair = 1.0;
  r.bounds = analysis::sandwich_bounds(r.lambda, r.lambda_bar, r.mass_pair);
  return r;
}

// ------------------------------------------------------------------ sweep

struct SweepPoint {
  double value = 0.0;
  std::string label;
  double dt_ratio = 0.0;
  std::optional<double> bound;
  double kappa_m = std::nan("");
  double kappa_mbar = std::nan("");
  double kappa_pair = std::nan("");
};

std::string sweep_csv(const SweepConfig& sw, const std::vector<SweepPoint>& pts) {
  std::ostringstream os;
  os << sw.parameter << ",dt_ratio,bound,ratio_to_bound,kappa_m,kappa_mbar,kappa_pair,kappa_ratio\n";
  for (const auto& p : pts) {
    const double b = p.bound ? *p.bound : std::nan("");
    os << g17(p.value) << ',' << g17(p.dt_ratio) << ',' << g17(b) << ',' << g17(p.dt_ratio / b) << ','
       << g17(p.kappa_m) << ',' << g17(p.kappa_mbar) << ',' << g17(p.kappa_pair) << ','
       << g17(p.kappa_mbar / p.kappa_m) << '\n';
  }
  return os.str();
}

Json sweep_json(const SweepConfig& sw, const std::vector<SweepPoint>& pts, const Model& model) {
  Json j;
  j["name"] = sw.name;
  j["parameter"] = sw.parameter;
  j["scaling"] = spec_summary(sw.base.spec);
  j["points"] = Json::array();
  std::vector<double> x, kr;
  for (const auto& p : pts) {
    Json row;
    row["value"] = p.value;
    row["label"] = p.label;
    row["dt_ratio"] = p.dt_ratio;
    row["bound"] = optional_json(p.bound);
    row["ratio_to_bound"] = p.bound ? Json(p.dt_ratio / *p.bound) : Json(nullptr);
    if (sw.condition) {
      row["kappa_m"] = p.kappa_m;
      row["kappa_mbar"] = p.kappa_mbar;
      row["kappa_pair"] = p.kappa_pair;
      row["kappa_ratio"] = p.kappa_mbar / p.kappa_m;
    }
    j["points"].push_back(row);
    x.push_back(p.value);
    kr.push_back(p.kappa_mbar / p.kappa_m);
  }
  if (sw.condition) {
    Json fit;
    fit["kappa_ratio_slope"] = x.size() >= 2 ? Json(analysis::large_parameter_slope(x, kr)) : Json(nullptr);
    fit["samples"] = std::min<std::size_t>(5, x.size());
    Json rate = nullptr;
    if (model.mesh) {
      try {
        rate = analysis::asymptotic_cond_rate(*model.mesh);
      } catch (const Error& e) {
        if (e.code() != Errc::NonUniformMesh) throw;
      }
    }
    fit["asymptotic_rate"] = rate;
    j["fit"] = fit;
  }
  return j;
}

// -------------------------------------------------------------- integrate

struct StabilityRow {
  std::string label;
  integrator::BracketResult bracket;
  std::string mass_path;
  std::vector<integrator::TraceRow> trace_stable;
  std::vector<integrator::TraceRow> trace_unstable;
};

std::string trace_csv(const std::vector<integrator::TraceRow>& rows) {
  std::ostringstream os;
  os << "step,time,energy,norm\n";
  for (const auto& r : rows) os << r.step << ',' << g17(r.time) << ',' << g17(r.energy) << ',' << g17(r.norm) << '\n';
  return os.str();
}

std::string stability_csv(const std::vector<StabilityRow>& rows) {
  std::ostringstream os;
  os << "scaling,probe,dt_estimate,dt,classification,growth,max_growth,energy_drift,steps,top_component,seed\n";
  for (const auto& r : rows) {
    for (const auto* v : {&r.bracket.stable, &r.bracket.unstable}) {
      os << '"' << r.label << "\"," << (v == &r.bracket.stable ? "stable" : "unstable") << ','
         << g17(r.bracket.dt_estimate) << ',' << g17(v->dt) << ',' << integrator::to_string(v->classification) << ','
         << g17(v->growth) << ',' << g17(v->max_growth) << ',' << g17(v->energy_drift) << ',' << v->steps << ','
         << g17(r.bracket.top_component) << ',' << r.bracket.seed_used << '\n';
    }
  }
  return os.str();
}

Json verdict_json(const integrator::StabilityVerdict& v) {
  return Json{{"dt", v.dt},
              {"classification", std::string(integrator::to_string(v.classification))},
              {"growth", v.growth},
              {"max_growth", v.max_growth},
              {"energy_drift", v.energy_drift},
              {"steps", v.steps}};
}

Json stability_json(const std::vector<StabilityRow>& rows, const ExperimentConfig& c) {
  Json j;
  j["protocol"] = {{"steps", c.integrator.steps},
                   {"stable_factor", c.integrator.stable_factor},
                   {"unstable_factor", c.integrator.unstable_factor},
                   {"stable_limit", integrator::BracketOptions{}.stable_limit},
                   {"unstable_limit", integrator::BracketOptions{}.unstable_limit},
                   {"seed", c.seed}};
  j["systems"] = Json::array();
  for (const auto& r : rows) {
    j["systems"].push_back({{"label", r.label},
                            {"mass_solver", r.mass_path},
                            {"dt_estimate", r.bracket.dt_estimate},
                            {"top_component", r.bracket.top_component},
                            {"seed_used", r.bracket.seed_used},
                            {"stable_probe", verdict_json(r.bracket.stable)},
                            {"unstable_probe", verdict_json(r.bracket.unstable)}});
  }
  return j;
}

std::vector<integrator::TraceRow> trace_run(const scaling::ScaledSystem& sc, const integrator::MassSolver& solver,
                                            std::uint64_t seed, double dt, Index steps, double stop) {
  integrator::SparseMatrix ks = sc.kbar.dense().sparseView();
  ks.makeCompressed();
  const Vector u0 = integrator::random_unit_displacement(solver, seed);
  integrator::RunOptions ro;
  ro.dt = dt;
  ro.steps = steps;
  ro.record_trace = true;
  ro.stop_growth = stop;
  return integrator::central_difference_run(ks, solver, u0, Vector::Zero(u0.size()), ro).trace;
}

bool wants(Study requested, Study s, bool toggle) { return requested == Study::All ? toggle : requested == s; }

}  // namespace

Json RunManifest::to_json() const {
  Json j;
  j["tool"] = "mscale";
  j["versions"] = {{"mscale", MSL_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"compiler", __VERSION__}};
  j["seed"] = seed;
  j["config"] = config;
  Json stages = Json::object();
  for (const auto& [k, v] : stage_seconds) stages[k] = v;
  j["stage_seconds"] = stages;
  j["files"] = files;
  return j;
}

RunManifest run(const ExperimentConfig& config, Study study) {
  RunManifest manifest;
  manifest.config = config.echo();
  manifest.seed = config.seed;
  StageClock clock(manifest.stage_seconds);

  const bool want_element = wants(study, Study::ElementSpectrum, config.studies.element);
  const bool want_spectrum = wants(study, Study::Spectrum, config.studies.spectrum);
  const bool want_bounds = wants(study, Study::Bounds, config.studies.bounds);
  const bool want_sweep = wants(study, Study::Sweep, config.studies.sweep);
  const bool want_integrate = wants(study, Study::Integrate, config.studies.stability);

  const bool sdof = config.source == GeometrySource::Sdof;
  if (sdof && study != Study::All) {
    if (study == Study::ElementSpectrum || study == Study::Bounds || study == Study::Sweep) {
      config_error("geometry.sdof: this study needs a finite element geometry");
    }
  }
  if (want_sweep && study == Study::Sweep && config.sweeps.empty()) config_error("sweeps: no sweep is configured");

  prepare_output_dir(config.output_dir);
  Emitter out(config.output_dir);

  clock.start();
  const Model model = build_model(config);
  clock.stop("build");

  // Unscaled spectrum, shared by every study that compares against it.
  bool need_vectors = config.refine;
  for (const auto& s : config.scalings) need_vectors |= s.spec.kind == scaling::ScalingKind::GlobalDeflation;
  for (const auto& s : config.sweeps) need_vectors |= want_sweep && s.base.spec.kind == scaling::ScalingKind::GlobalDeflation;
  const bool need_base = want_spectrum || want_bounds || want_sweep || want_integrate;
  EigDecomposition base;
  double lambda_max = 0.0;
  if (need_base) {
    clock.start();
    if (model.sdof) {
      base.values = Vector::Constant(1, model.fe.k.dense()(0, 0) / model.fe.m.dense()(0, 0));
    } else {
      base = generalized_eig(model.fe.pair(),
                             need_vectors && !model.sdof ? EigJob::ValuesAndVectors : EigJob::ValuesOnly);
    }
    lambda_max = base.values(base.values.size() - 1);
    clock.stop("base_spectrum");
  }

  std::vector<scaling::ScalingSpec> specs;
  std::vector<std::string> labels;
  for (const auto& e : config.scalings) {
    specs.push_back(resolve(e, lambda_max > 0.0 ? lambda_max : 1.0));
    labels.push_back(specs.back().label());
  }
  const std::vector<std::string> names = unique_slugs(labels);

  // Element study: the first element of the mesh under each local scaling.
  if (want_element && !model.sdof) {
    clock.start();
    const fem::ElementBlock& block = model.fe.blocks.front();
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto& s = specs[i];
      if (!s.is_local()) continue;
      const auto report = analysis::element_rayleigh_report(block, s);
      const SymMatrix mbar(block.lumped_mass.dense() + scaling::element_scaling(block, s).dense());
      const Vector mass_pair = generalized_eig(MatrixPair(mbar, block.lumped_mass), EigJob::ValuesOnly).values;
      out.write("element_" + names[i] + ".csv", element_csv(report, mass_pair));
      out.write_json("element_" + names[i] + ".json", element_json(block, s, report, mass_pair));
    }
    clock.stop("element");
  }

  // Spectral reports, one per scaling.
  std::vector<std::optional<analysis::SpectralReport>> reports(specs.size());
  if (want_spectrum || want_bounds) {
    clock.start();
    analysis::ReportOptions ro;
    ro.refine = config.refine;
    ro.base = &base;
    parallel_for(specs.size(), config.threads, [&](std::size_t i) {
      const auto sc = scale(model, specs[i], &base);
      reports[i] = model.sdof ? sdof_report(model.fe, sc) : analysis::spectral_report(model.fe, sc, ro);
    });
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (want_spectrum) {
        out.write("spectrum_" + names[i] + ".csv", spectrum_csv(*reports[i]));
        out.write_json("spectrum_" + names[i] + ".json", spectrum_json(*reports[i], specs[i]));
      }
      if (want_bounds) {
        out.write("bounds_" + names[i] + ".csv", bounds_csv(reports[i]->bounds));
        out.write_json("bounds_" + names[i] + ".json", bounds_json(*reports[i], specs[i]));
      }
    }
    clock.stop("spectrum");
  }

  if (want_sweep && !model.sdof) {
    clock.start();
    std::vector<std::string> sweep_names;
    for (const auto& sw : config.sweeps) sweep_names.push_back(sw.name);
    const auto sweep_slugs = unique_slugs(sweep_names);
    const double kappa_m = condition_number(model.fe.m);
    for (std::size_t w = 0; w < config.sweeps.size(); ++w) {
      const SweepConfig& sw = config.sweeps[w];
      std::vector<SweepPoint> pts(sw.values.size());
      parallel_for(sw.values.size(), config.threads, [&](std::size_t i) {
        const scaling::ScalingSpec s = resolve(with_parameter(sw.base, sw.parameter, sw.values[i]), lambda_max);
        const auto sc = scale(model, s, &base);
        const SymMatrix mbar = sc.mbar_dense();
        const Vector lb = generalized_eig(MatrixPair(sc.kbar, mbar), EigJob::ValuesOnly).values;
        SweepPoint& p = pts[i];
        p.value = sw.values[i];
        p.label = s.label();
        p.dt_ratio = std::sqrt(lambda_max / lb(lb.size() - 1));
        try {
          p.bound = analysis::corollary_bound(s, model.fe.blocks);
        } catch (const Error& e) {
          if (e.code() != Errc::NoBoundForKind) throw;
        }
        if (sw.condition) {
          p.kappa_m = kappa_m;
          p.kappa_mbar = condition_number(mbar);
          p.kappa_pair = pair_condition(MatrixPair(mbar, model.fe.m));
        }
      });
      out.write("sweep_" + sweep_slugs[w] + ".csv", sweep_csv(sw, pts));
      out.write_json("sweep_" + sweep_slugs[w] + ".json", sweep_json(sw, pts, model));
    }
    clock.stop("sweep");
  }

  if (want_integrate) {
    clock.start();
    std::vector<StabilityRow> rows(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto sc = scale(model, specs[i], &base);
      double lambda_bar_max = 0.0;
      if (reports[i]) {
        lambda_bar_max = reports[i]->lambda_bar(reports[i]->lambda_bar.size() - 1);
      } else {
        const Vector lb = generalized_eig(sc.pair(), EigJob::ValuesOnly).values;
        lambda_bar_max = lb(lb.size() - 1);
      }
      integrator::BracketOptions bo;
      bo.steps = config.integrator.steps;
      bo.seed = config.seed;
      bo.stable_factor = config.integrator.stable_factor;
      bo.unstable_factor = config.integrator.unstable_factor;
      bo.parallel = config.threads > 1;
      StabilityRow& row = rows[i];
      row.label = labels[i];
      row.bracket = integrator::stability_bracket(sc.kbar, sc.mbar, analysis::critical_dt(lambda_bar_max), bo);
      const integrator::MassSolver solver(sc.mbar);
      row.mass_path = std::string(integrator::to_string(solver.path()));
      if (config.integrator.trace) {
        const auto& b = row.bracket;
        row.trace_stable = trace_run(sc, solver, b.seed_used, b.stable.dt, bo.steps, 0.0);
        row.trace_unstable = trace_run(sc, solver, b.seed_used, b.unstable.dt, bo.steps, bo.unstable_limit);
      }
    }
    out.write("stability.csv", stability_csv(rows));
    out.write_json("stability.json", stability_json(rows, config));
    if (config.integrator.trace) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out.write("trace_" + names[i] + "_stable.csv", trace_csv(rows[i].trace_stable));
        out.write("trace_" + names[i] + "_unstable.csv", trace_csv(rows[i].trace_unstable));
      }
    }
    clock.stop("integrate");
  }

  manifest.files = out.files();
  manifest.files.push_back("manifest.json");
  out.write_json("manifest.json", manifest.to_json());
  return manifest;
}

}  // namespace msl::experiment
