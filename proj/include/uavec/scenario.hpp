#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uavec/channel.hpp"

namespace uavec {

enum class Scheme { Fountain, Replication, Baseline, TdmaBestCase };

inline constexpr Scheme kAllSchemes[] = {Scheme::Fountain, Scheme::Replication,
                                         Scheme::Baseline, Scheme::TdmaBestCase};

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Fountain: return "fountain";
    case Scheme::Replication: return "replication";
    case Scheme::Baseline: return "baseline";
    case Scheme::TdmaBestCase: return "tdma";
  }
  return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : kAllSchemes)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

/// Every parameter of one data-collection scenario.
struct ScenarioConfig {
  int n = 30;             // end devices in the cluster
  int beta = 5;           // source messages per device
  int epsilon = 5;        // redundancy budget
  int n_s = 30;           // hovering window in slots
  double slot_len_s = 1.0;
  int n_f = 8;            // orthogonal bands
  std::vector<int> sf_set{7, 8, 9};
  double p_b = 0.25;      // wake-up call reception probability
  Scheme scheme = Scheme::Fountain;
  int q = 256;
  channel::Geometry geometry;
  channel::FadingModel fading;
  channel::CaptureMatrix capture;
  std::optional<int> n_max;  // energy cap on frames per visit
  long runs = 10000;
  std::uint64_t seed = 1;
  std::size_t payload_bytes = 0;  // simulated payload; 0 decodes on coefficients only
  unsigned threads = 0;           // 0 = hardware concurrency

  /// Redundancy after the energy cap: min(epsilon, n_max - beta).
  int effective_epsilon() const {
    if (n_max) return std::max(0, std::min(epsilon, *n_max - beta));
    return epsilon;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("ScenarioConfig: " + what); };
    if (n < 1) fail("n must be >= 1");
    if (beta < 1) fail("beta must be >= 1");
    if (epsilon < 0) fail("epsilon must be >= 0");
    if (n_s < 1) fail("n_s must be >= 1");
    if (n_f < 1) fail("n_f must be >= 1");
    if (sf_set.empty()) fail("sf_set must be nonempty");
    for (int sf : sf_set)
      if (sf < 7 || sf > 12) fail("sf_set entries must lie in 7..12");
    if (!(p_b >= 0.0 && p_b <= 1.0)) fail("p_b must lie in [0,1]");
    if (q < 2) fail("q must be >= 2");
    if (n_max && *n_max < beta) fail("n_max must be >= beta");
    if (runs < 1) fail("runs must be >= 1");
    geometry.validate();
    fading.validate();
  }
};

}  // namespace uavec
