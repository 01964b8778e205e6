// uavec: command-line runner for the UAV uplink collection models.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "uavec/commands.hpp"

namespace {

struct Source {
  std::string config;
  std::string preset;

  std::filesystem::path path() const {
    if (!config.empty() && !preset.empty()) throw uavec::config::ConfigError("give --config or --preset, not both");
    if (!config.empty()) return config;
    if (!preset.empty()) return uavec::cli::preset_path(preset);
    throw uavec::config::ConfigError("one of --config or --preset is required");
  }
};

void add_common(CLI::App* cmd, Source& src, uavec::cli::Options& opt, std::string& out_path) {
  cmd->add_option("-c,--config", src.config, "configuration file");
  cmd->add_option("-p,--preset", src.preset, "named preset from the configs directory (fig1, fig2, fig3)");
  cmd->add_option("--seed", opt.seed, "master seed");
  cmd->add_option("--runs", opt.runs, "Monte Carlo replications per point");
  cmd->add_option("--scheme", opt.schemes, "restrict to these schemes (fountain, replication, baseline, tdma)")
      ->delimiter(',');
  cmd->add_option("--set", opt.overrides, "override a key, e.g. --set scenario.p_b=0.5");
  cmd->add_option("-o,--out", out_path, "output file (default: standard output)");
}

// Output goes to a buffer first so a failed command leaves no partial file.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV wake-up uplink collection: simulation, analysis and energy budget"};
  app.require_subcommand(1);

  Source src;
  uavec::cli::Options opt;
  std::string out_path;
  std::string curves_path;

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo MDP per scheme at the base scenario");
  add_common(simulate, src, opt, out_path);
  auto* analyze = app.add_subcommand("analyze", "analytical MDP over the configured grid");
  add_common(analyze, src, opt, out_path);
  analyze->add_option("--curves", curves_path, "also write per-slot P_col, zeta, zeta_hat and per-wake success");
  auto* sweep = app.add_subcommand("sweep", "simulation and analysis side by side over the grid");
  add_common(sweep, src, opt, out_path);

  auto* nmax = app.add_subcommand("nmax", "per-visit frame cap from the energy budget");
  uavec::cli::AirtimeOverrides air;
  nmax->add_option("-c,--config", src.config, "file with an [energy] section");
  nmax->add_option("-p,--preset", src.preset, "named preset (e.g. appendix_a)");
  nmax->add_option("--payload-bytes", air.payload_bytes, "LoRa payload length");
  nmax->add_option("--bandwidth", air.bandwidth_hz, "LoRa bandwidth in Hz");
  nmax->add_option("--coding-rate", air.coding_rate, "1..4 for 4/5..4/8");
  nmax->add_option("--preamble", air.preamble_symbols, "preamble symbols");
  nmax->add_option("--ldro", air.low_data_rate, "low data rate optimisation: auto, on, off");
  nmax->add_option("--airtime", air.airtime_s, "use this mean frame airtime in seconds");
  nmax->add_option("-o,--out", out_path, "output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    std::ostringstream text;
    if (nmax->parsed()) {
      auto profile = uavec::config::to_energy_profile(uavec::config::Document::load(src.path()));
      uavec::cli::apply(profile, air);
      uavec::cli::cmd_nmax(profile, text);
    } else {
      const auto doc = uavec::cli::load_document(src.path(), opt);
      const auto x = uavec::config::to_experiment(doc);
      if (simulate->parsed()) {
        uavec::cli::cmd_simulate(x, text);
      } else if (analyze->parsed()) {
        std::ostringstream curves;
        uavec::cli::cmd_analyze(x, text, curves_path.empty() ? nullptr : &curves);
        if (!curves_path.empty()) emit(curves_path, curves.str());
      } else {
        uavec::cli::cmd_sweep(x, text);
      }
    }
    emit(out_path, text.str());
  } catch (const std::exception& e) {
    std::cerr << "uavec: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
