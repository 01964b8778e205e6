#pragma once

// Sensor energy budget: LoRa time on air and the per-visit frame cap.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavec::energy {

enum class LowDataRate { Auto, On, Off };

struct EnergyProfile {
  double battery_mah = 600.0;
  double lifetime_days = 730.0;
  double visits_per_day = 12.0;
  double compute_s_per_day = 20.0;
  double tx_current_ma = 83.0;
  double compute_current_ma = 50.0;
  int payload_bytes = 50;
  std::vector<int> sf_set{7, 8, 9};
  double bandwidth_hz = 125e3;
  int coding_rate = 1;  // 1..4 for 4/5..4/8
  int preamble_symbols = 8;
  bool explicit_header = true;
  bool crc = true;
  LowDataRate low_data_rate = LowDataRate::Auto;  // Auto: on when a symbol lasts >= 16 ms
  std::optional<double> airtime_s;                 // replaces the computed mean airtime

  void validate() const {
    auto fail = [](const std::string& w) { throw std::invalid_argument("EnergyProfile: " + w); };
    if (!(battery_mah > 0) || !(lifetime_days > 0) || !(visits_per_day > 0) || !(tx_current_ma > 0))
      fail("battery, lifetime, visits and tx current must be > 0");
    if (compute_s_per_day < 0 || compute_current_ma < 0) fail("compute time and current must be >= 0");
    if (payload_bytes < 0 || payload_bytes > 255) fail("payload_bytes must lie in 0..255");
    if (sf_set.empty()) fail("sf_set must be nonempty");
    if (!(bandwidth_hz > 0)) fail("bandwidth_hz must be > 0");
    if (coding_rate < 1 || coding_rate > 4) fail("coding_rate must lie in 1..4");
    if (preamble_symbols < 0) fail("preamble_symbols must be >= 0");
    if (airtime_s && !(*airtime_s > 0)) fail("airtime_s must be > 0");
  }
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double symbol_time(int sf, double bandwidth_hz) { return std::ldexp(1.0, sf) / bandwidth_hz; }

/// Semtech time on air for one frame at spreading factor `sf`.
inline double lora_airtime(int sf, const EnergyProfile& p) {
  if (sf < 7 || sf > 12) throw std::out_of_range("lora_airtime: SF outside 7..12");
  const double ts = symbol_time(sf, p.bandwidth_hz);
  bool ldro = false;
  switch (p.low_data_rate) {
    case LowDataRate::On: ldro = true; break;
    case LowDataRate::Off: ldro = false; break;
    case LowDataRate::Auto: ldro = ts >= 16e-3; break;
  }
  const double num = 8.0 * p.payload_bytes - 4.0 * sf + 28.0 + (p.crc ? 16.0 : 0.0) -
                     (p.explicit_header ? 0.0 : 20.0);
  const double den = 4.0 * (sf - (ldro ? 2 : 0));
  const double payload_symbols = 8.0 + std::max(std::ceil(num / den) * (p.coding_rate + 4), 0.0);
  return (p.preamble_symbols + 4.25 + payload_symbols) * ts;
}

/// Mean airtime under a uniform SF choice.
inline double mean_airtime(const EnergyProfile& p) {
  if (p.airtime_s) return *p.airtime_s;
  double sum = 0.0;
  for (int sf : p.sf_set) sum += lora_airtime(sf, p);
  return sum / static_cast<double>(p.sf_set.size());
}

struct BudgetBreakdown {
  long n_max = 0;
  double mean_airtime_s = 0.0;
  double battery_mas = 0.0;        // capacity in mA*s
  double compute_mas = 0.0;        // L * T_c * I_c
  double per_frame_mas = 0.0;      // L * V * mean airtime * I_t
};

/// Charge drawn over the lifetime when sending n frames per visit, in mA*s.
inline double lifetime_charge(long n, const EnergyProfile& p) {
  const double per_day = n * mean_airtime(p) * p.tx_current_ma * p.visits_per_day +
                         p.compute_s_per_day * p.compute_current_ma;
  return per_day * p.lifetime_days;
}

inline bool budget_holds(long n, const EnergyProfile& p) {
  return lifetime_charge(n, p) <= p.battery_mah * 3600.0;
}

/// Largest n with (n * L_f * I_t * V + T_c * I_c) * L <= C_b.
inline BudgetBreakdown n_max(const EnergyProfile& p) {
  p.validate();
  BudgetBreakdown b;
  b.mean_airtime_s = mean_airtime(p);
  b.battery_mas = p.battery_mah * 3600.0;
  b.compute_mas = p.lifetime_days * p.compute_s_per_day * p.compute_current_ma;
  b.per_frame_mas = p.lifetime_days * p.visits_per_day * b.mean_airtime_s * p.tx_current_ma;
  if (b.battery_mas <= b.compute_mas) {
    throw BudgetError("infeasible budget: lifetime compute drain L*T_c*I_c = " +
                      std::to_string(b.compute_mas) + " mA*s is not below battery capacity C_b = " +
                      std::to_string(b.battery_mas) + " mA*s, so (N*L_f*I_t*V + T_c*I_c)*L <= C_b fails for every N >= 0");
  }
  b.n_max = static_cast<long>(std::floor((b.battery_mas - b.compute_mas) / b.per_frame_mas));
  // Guard the floor against rounding right at an integer boundary.
  while (b.n_max > 0 && !budget_holds(b.n_max, p)) --b.n_max;
  while (budget_holds(b.n_max + 1, p)) ++b.n_max;
  return b;
}

}  // namespace uavec::energy
