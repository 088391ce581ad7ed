#include <iostream>

#include <CLI11.hpp>

#include "msl/experiment.hpp"

namespace msl::experiment {

int main_entry(int argc, char** argv) {
  CLI::App app{"Mass-scaling experiments: spectra, bounds, sweeps and stability brackets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MSL_VERSION);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--seed", seed, "Seed for stochastic steps (overrides the config)");
  app.add_option("--threads", threads, "Worker threads (overrides the config)")->check(CLI::Range(1u, 4096u));

  const std::vector<std::pair<const char*, Study>> commands = {
      {"run", Study::All},
      {"element-spectrum", Study::ElementSpectrum},
      {"spectrum", Study::Spectrum},
      {"bounds", Study::Bounds},
      {"sweep", Study::Sweep},
      {"integrate", Study::Integrate},
  };
  const std::map<std::string, std::string> help = {
      {"run", "All studies enabled in the config"},
      {"element-spectrum", "Rayleigh factors of one element under each local scaling"},
      {"spectrum", "Original and scaled spectra, frequency ratios, critical steps"},
      {"bounds", "Eigenvalue and condition-number bounds with signed slack"},
      {"sweep", "Critical-step ratio and conditioning over parameter grids"},
      {"integrate", "Central difference stability bracket per scaling"},
  };
  for (const auto& [name, _] : commands) app.add_subcommand(name, help.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  Study study = Study::All;
  for (const auto& [name, s] : commands) {
    if (app.got_subcommand(name)) study = s;
  }

  try {
    ExperimentConfig config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    const RunManifest manifest = run(config, study);
    std::cout << "wrote " << manifest.files.size() << " files to " << config.output_dir.string() << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "mscale: " << e.what() << "\n";
    return e.code() == Errc::ConfigError ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "mscale: internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace msl::experiment
