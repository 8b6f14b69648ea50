#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "ddsim/config.hpp"
#include "ddsim/errors.hpp"

namespace {

int dispatch(ddsim::RunConfig cfg, long seed_override, int threads_override,
             const std::string& out_override) {
  if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
  if (threads_override > 0) cfg.threads = threads_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  const ddsim::RunManifest man = ddsim::run(cfg);
  std::cout << "wrote " << man.checksums.size() + 1 << " files to "
            << (cfg.out_dir.empty() ? "ddsim_runs/" + cfg.experiment : cfg.out_dir)
            << " (" << man.wall_clock_s << " s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ddsim: two-qubit dynamical-decoupling gate simulator"};
  app.require_subcommand(1);

  long seed = -1;
  int threads = 0;
  std::string out_dir;

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
  run_cmd->add_option("config", config_path, "config file path")->required();
  run_cmd->add_option("--seed", seed, "override the seed");
  run_cmd->add_option("--threads", threads, "cap worker threads");
  run_cmd->add_option("--out", out_dir, "output directory");

  std::string preset_name;
  bool print_only = false;
  auto* preset_cmd = app.add_subcommand("preset", "run a shipped preset");
  preset_cmd->add_option("name", preset_name, "preset name (see 'ddsim list')")
      ->required();
  preset_cmd->add_flag("--print-config", print_only,
                       "print the preset's config instead of running it");
  preset_cmd->add_option("--seed", seed, "override the seed");
  preset_cmd->add_option("--threads", threads, "cap worker threads");
  preset_cmd->add_option("--out", out_dir, "output directory");

  auto* list_cmd = app.add_subcommand("list", "list the shipped presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const auto& p : ddsim::list_presets())
        std::printf("%-18s %s\n", p.name.c_str(), p.description.c_str());
      return 0;
    }
    if (preset_cmd->parsed()) {
      const ddsim::Preset& p = ddsim::find_preset(preset_name);
      if (print_only) {
        std::cout << p.config_text;
        return 0;
      }
      ddsim::RunConfig cfg = ddsim::parse_config(p.config_text);
      if (cfg.out_dir.empty()) cfg.out_dir = "ddsim_runs/" + p.name;
      return dispatch(cfg, seed, threads, out_dir);
    }
    return dispatch(ddsim::parse_config_file(config_path), seed, threads, out_dir);
  } catch (const ddsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ddsim::TimingError& e) {
    std::cerr << "timing error: " << e.what() << "\n";
    return 3;
  } catch (const ddsim::CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
