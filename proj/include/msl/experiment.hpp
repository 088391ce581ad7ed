#pragma once

// Experiment configuration, orchestration and report emission behind the
// `mscale` command line tool.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msl/fem.hpp"
#include "msl/scaling.hpp"

namespace msl::experiment {

using Json = nlohmann::ordered_json;

enum class GeometrySource { Mesh, MeshFile, Element, Sdof };

/// A scaling entry of the config. Parameters given relative to the
/// unscaled spectrum are resolved once lambda_max is known:
/// mu = mu_relative / lambda_max, c = c_relative / lambda_max^2.
struct ScalingEntry {
  scaling::ScalingSpec spec;
  std::optional<double> mu_relative;
  std::optional<double> c_relative;
};

struct SweepConfig {
  std::string name;
  std::string parameter;  // beta | alpha | rank | mu | c | epsilon
  std::vector<double> values;
  ScalingEntry base;
  bool condition = false;  // also compute condition numbers per point
};

struct StudyToggles {
  bool element = true;
  bool spectrum = true;
  bool bounds = true;
  bool sweep = true;
  bool stability = true;
};

struct IntegratorConfig {
  Index steps = 10000;
  double stable_factor = 0.99;
  double unstable_factor = 1.05;
  bool trace = false;
};

struct ExperimentConfig {
  GeometrySource source = GeometrySource::Mesh;
  std::array<Index, 3> node_counts{2, 2, 2};
  std::array<double, 3> extents{1.0, 1.0, 1.0};  // m
  std::filesystem::path mesh_file;
  double sdof_stiffness = 1.0;  // N/m
  double sdof_mass = 1.0;       // kg

  fem::Material material{207e9, 0.3, 7800.0};
  fem::Lumping lumping = fem::Lumping::RowSum;

  std::vector<ScalingEntry> scalings;
  std::vector<SweepConfig> sweeps;
  StudyToggles studies;
  IntegratorConfig integrator;
  bool refine = false;  // Rayleigh-refined spectra in reports

  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "mscale-out";
  unsigned threads = 1;

  /// Resolved configuration in SI units, as echoed in the manifest.
  Json echo() const;
};

/// Throws Error(ConfigError) naming the offending field. Relative paths
/// inside the document resolve against `base_dir`.
ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Converts a number (SI) or {"value": x, "unit": u} / "x u" to SI.
/// `dimension` is one of length, pressure, density, stiffness, mass.
double parse_quantity(const Json& value, const std::string& dimension, const std::string& field);

/// `base` with one swept parameter replaced. Throws ConfigError for a value
/// the parameter cannot take.
ScalingEntry with_parameter(const ScalingEntry& base, const std::string& parameter, double value);

enum class Study { All, ElementSpectrum, Spectrum, Bounds, Sweep, Integrate };

struct RunManifest {
  Json config;
  std::uint64_t seed = 0;
  std::map<std::string, double> stage_seconds;
  std::vector<std::string> files;  // relative to the output directory, manifest included

  Json to_json() const;
};

/// Executes the requested studies and writes CSV and JSON outputs plus
/// manifest.json into config.output_dir.
RunManifest run(const ExperimentConfig& config, Study study = Study::All);

/// Command-line entry point; returns the process exit code
/// (0 ok, 1 config error, 2 internal error).
int main_entry(int argc, char** argv);

}  // namespace msl::experiment
