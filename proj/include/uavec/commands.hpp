#pragma once

// Subcommand bodies for the uavec tool. Each writes CSV (or text for nmax)
// to the given stream and throws on error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "uavec/analysis.hpp"
#include "uavec/config.hpp"
#include "uavec/csv.hpp"
#include "uavec/energy.hpp"
#include "uavec/simulator.hpp"

#ifndef UAVEC_PRESET_DIR
#define UAVEC_PRESET_DIR "configs"
#endif

namespace uavec::cli {

struct Options {
  std::optional<std::uint64_t> seed;
  std::optional<long> runs;
  std::vector<std::string> schemes;    // empty keeps the configured list
  std::vector<std::string> overrides;  // section.key=value
};

inline std::filesystem::path preset_path(const std::string& name) {
  std::filesystem::path dir = UAVEC_PRESET_DIR;
  if (const char* env = std::getenv("UAVEC_PRESET_DIR")) dir = env;
  auto p = dir / (name + ".ini");
  if (!std::filesystem::exists(p)) throw config::ConfigError("unknown preset '" + name + "' (looked for " + p.string() + ")");
  return p;
}

inline config::Document load_document(const std::filesystem::path& path, const Options& opt) {
  auto doc = config::Document::load(path);
  for (const auto& o : opt.overrides) doc.set_override(o);
  if (opt.seed) doc.set_override("run.seed=" + std::to_string(*opt.seed));
  if (opt.runs) doc.set_override("run.runs=" + std::to_string(*opt.runs));
  if (!opt.schemes.empty()) {
    std::string list;
    for (const auto& s : opt.schemes) list += (list.empty() ? "" : ",") + s;
    doc.set_override("scenario.schemes=" + list);
  }
  return doc;
}

struct GridPoint {
  std::string axis = "none";
  double axis_value = std::nan("");
  std::string series_axis = "none";
  double series_value = std::nan("");
  ScenarioConfig cfg;
};

/// Grid points in output order: series outer, axis inner.
inline std::vector<GridPoint> grid(const config::ExperimentConfig& x) {
  if (!x.sweep) return {GridPoint{"none", std::nan(""), "none", std::nan(""), x.scenario}};
  const auto& sw = *x.sweep;
  std::vector<double> series = sw.series_values;
  if (series.empty()) series.push_back(std::nan(""));
  std::vector<GridPoint> out;
  for (double sv : series) {
    for (double v : sw.values) {
      GridPoint g;
      g.axis = sw.axis;
      g.axis_value = v;
      g.cfg = x.scenario;
      config::apply_axis(g.cfg, sw.axis, v);
      if (!sw.series_axis.empty()) {
        g.series_axis = sw.series_axis;
        g.series_value = sv;
        config::apply_axis(g.cfg, sw.series_axis, sv);
      }
      out.push_back(g);
    }
  }
  return out;
}

namespace detail {

inline std::vector<csv::Cell> scenario_cells(const ScenarioConfig& c) {
  return {static_cast<long long>(c.n), static_cast<long long>(c.beta), static_cast<long long>(c.epsilon),
          static_cast<long long>(c.n_s), static_cast<long long>(c.n_f), c.p_b};
}

inline std::vector<csv::Cell> replay_cells(const ScenarioConfig& c) {
  return {static_cast<long long>(c.runs), std::to_string(c.seed), config::hash_hex(config::config_hash(c))};
}

template <typename... Parts>
std::vector<csv::Cell> join(Parts&&... parts) {
  std::vector<csv::Cell> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

/// Runs job(k) for k in [0, count) on up to `workers` threads.
template <typename Job>
void parallel_for(std::size_t count, unsigned workers, Job&& job) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < count;) {
          try {
            job(k);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

inline unsigned hardware_threads(unsigned configured) {
  return configured ? configured : std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline const std::vector<std::string> kSimulateHeader{
    "scheme", "n",     "beta",      "epsilon",        "n_s",  "n_f",  "p_b",
    "mdp",    "half_width", "delivered", "total_messages", "runs", "seed", "config_hash"};

/// One row per scheme at the base scenario; any [sweep] section is ignored.
inline void cmd_simulate(const config::ExperimentConfig& x, std::ostream& out) {
  csv::Writer w(out, kSimulateHeader);
  for (Scheme s : x.schemes) {
    ScenarioConfig cfg = x.scenario;
    cfg.scheme = s;
    const auto rep = sim::run_many(cfg);
    w.row(detail::join(std::vector<csv::Cell>{std::string(to_string(s))}, detail::scenario_cells(cfg),
                       std::vector<csv::Cell>{rep.mdp_estimate, rep.half_width_95,
                                              static_cast<long long>(rep.delivered),
                                              static_cast<long long>(rep.total_messages)},
                       detail::replay_cells(cfg)));
  }
}

inline const std::vector<std::string> kAnalyzeHeader{
    "scheme", "axis", "axis_value", "series_axis", "series_value", "n", "beta", "epsilon", "n_s", "n_f",
    "p_b", "mdp", "f_factor", "f_error", "f_nofading", "replication_mode", "runs", "seed", "config_hash"};

inline const std::vector<std::string> kCurvesHeader{
    "scheme", "axis_value", "series_value", "slot", "p_col", "zeta", "zeta_hat", "per_wake", "config_hash"};

/// Analytical MDP for every grid point and scheme. When `curves` is given,
/// the per-slot intermediates go there.
inline void cmd_analyze(const config::ExperimentConfig& x, std::ostream& out, std::ostream* curves = nullptr) {
  // The loss factor depends on geometry, fading and capture only, none of
  // which is a sweep axis.
  const auto f = analysis::interferer_loss_factor(x.analysis_inputs());
  const auto f0 = analysis::interferer_loss_factor_nofading(x.analysis_inputs());
  csv::Writer w(out, kAnalyzeHeader);
  std::optional<csv::Writer> cw;
  if (curves) cw.emplace(*curves, kCurvesHeader);
  for (const auto& g : grid(x)) {
    for (Scheme s : x.schemes) {
      ScenarioConfig cfg = g.cfg;
      cfg.scheme = s;
      analysis::AnalysisInputs in{cfg, x.quad, x.replication_mode};
      const auto c = analysis::evaluate(s, in, f.value);
      const auto hash = config::hash_hex(config::config_hash(cfg));
      w.row(detail::join(
          std::vector<csv::Cell>{std::string(to_string(s)), g.axis, g.axis_value, g.series_axis, g.series_value},
          detail::scenario_cells(cfg),
          std::vector<csv::Cell>{c.mdp, f.value, f.error_estimate, f0.value,
                                 std::string(analysis::to_string(x.replication_mode))},
          detail::replay_cells(cfg)));
      if (cw) {
        for (std::size_t k = 0; k < c.p_col.size(); ++k) {
          auto at = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : std::nan(""); };
          cw->row({std::string(to_string(s)), g.axis_value, g.series_value, static_cast<long long>(k),
                   c.p_col[k], at(c.zeta, k), at(c.zeta_hat, k), at(c.per_wake, k), hash});
        }
      }
    }
  }
}

inline const std::vector<std::string> kSweepHeader{
    "scheme", "axis", "axis_value", "series_axis", "series_value", "n", "beta", "epsilon", "n_s", "n_f", "p_b",
    "sim_mdp", "sim_half_width", "analysis_mdp", "abs_diff", "runs", "seed", "config_hash"};

/// Simulation and analysis side by side over the grid. Points run
/// concurrently; rows come out in grid order.
inline void cmd_sweep(const config::ExperimentConfig& x, std::ostream& out) {
  const auto f = analysis::interferer_loss_factor(x.analysis_inputs());
  const auto points = grid(x);
  struct Job {
    const GridPoint* point;
    Scheme scheme;
    sim::DeliveryReport sim;
    double model = 0.0;
  };
  std::vector<Job> jobs;
  for (const auto& g : points)
    for (Scheme s : x.schemes) jobs.push_back({&g, s, {}, 0.0});

  const unsigned workers = detail::hardware_threads(x.scenario.threads);
  const bool outer = workers > 1 && jobs.size() > 1;
  detail::parallel_for(jobs.size(), outer ? workers : 1, [&](std::size_t k) {
    auto& j = jobs[k];
    ScenarioConfig cfg = j.point->cfg;
    cfg.scheme = j.scheme;
    if (outer) cfg.threads = 1;
    j.sim = sim::run_many(cfg);
    j.model = analysis::evaluate(j.scheme, {cfg, x.quad, x.replication_mode}, f.value).mdp;
  });

  csv::Writer w(out, kSweepHeader);
  for (const auto& j : jobs) {
    ScenarioConfig cfg = j.point->cfg;
    cfg.scheme = j.scheme;
    w.row(detail::join(std::vector<csv::Cell>{std::string(to_string(j.scheme)), j.point->axis,
                                              j.point->axis_value, j.point->series_axis, j.point->series_value},
                       detail::scenario_cells(cfg),
                       std::vector<csv::Cell>{j.sim.mdp_estimate, j.sim.half_width_95, j.model,
                                              std::abs(j.sim.mdp_estimate - j.model)},
                       detail::replay_cells(cfg)));
  }
}

struct AirtimeOverrides {
  std::optional<int> payload_bytes;
  std::optional<double> bandwidth_hz;
  std::optional<int> coding_rate;
  std::optional<int> preamble_symbols;
  std::optional<std::string> low_data_rate;
  std::optional<double> airtime_s;
};

inline void apply(energy::EnergyProfile& p, const AirtimeOverrides& o) {
  if (o.payload_bytes) p.payload_bytes = *o.payload_bytes;
  if (o.bandwidth_hz) p.bandwidth_hz = *o.bandwidth_hz;
  if (o.coding_rate) p.coding_rate = *o.coding_rate;
  if (o.preamble_symbols) p.preamble_symbols = *o.preamble_symbols;
  if (o.low_data_rate) {
    if (*o.low_data_rate == "auto") p.low_data_rate = energy::LowDataRate::Auto;
    else if (*o.low_data_rate == "on") p.low_data_rate = energy::LowDataRate::On;
    else if (*o.low_data_rate == "off") p.low_data_rate = energy::LowDataRate::Off;
    else throw std::invalid_argument("--ldro expects auto, on or off");
  }
  if (o.airtime_s) p.airtime_s = *o.airtime_s;
}

/// Prints N_max and the terms of the budget inequality.
inline void cmd_nmax(const energy::EnergyProfile& p, std::ostream& out) {
  const auto b = energy::n_max(p);
  char buf[64];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << key << " = " << buf << '\n';
  };
  out << "n_max = " << b.n_max << '\n';
  if (!p.airtime_s) {
    for (int sf : p.sf_set) {
      const std::string key = "airtime_sf" + std::to_string(sf) + "_s";
      line(key.c_str(), energy::lora_airtime(sf, p));
    }
  }
  line("mean_airtime_s", b.mean_airtime_s);
  line("battery_mas", b.battery_mas);
  line("compute_mas", b.compute_mas);
  line("per_frame_mas", b.per_frame_mas);
  line("lifetime_charge_at_n_max_mas", energy::lifetime_charge(b.n_max, p));
}

}  // namespace uavec::cli
