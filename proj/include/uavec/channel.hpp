#pragma once

// Geometry, Nakagami-m power fading, per-frame radio draws, wake-up call
// reception and the strongest-interferer capture rule.

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavec/random.hpp"

namespace uavec::channel {

/// Devices uniform over a disc of radius `radius_m`, UAV `altitude_m` above
/// its centre.
struct Geometry {
  double radius_m = 30.0;
  double altitude_m = 10.0;
  double path_loss_exp = 2.5;

  double max_distance() const { return std::hypot(radius_m, altitude_m); }

  void validate() const {
    if (!(radius_m > 0) || !(altitude_m > 0) || !(path_loss_exp > 0)) {
      throw std::invalid_argument("Geometry: radius, altitude and path-loss exponent must be > 0");
    }
  }
};

/// Gamma-distributed power coefficient with shape m and mean omega.
struct FadingModel {
  double m_shape = 3.0;
  double omega = 1.0;

  void validate() const {
    if (!(m_shape >= 0.5)) throw std::invalid_argument("FadingModel: m must be >= 0.5");
    if (!(omega > 0)) throw std::invalid_argument("FadingModel: omega must be > 0");
  }
};

/// Capture thresholds xi[k][k'] as linear power ratios: a frame at SF k is
/// lost to an interferer at SF k' when R / R' < xi[k][k'].
class CaptureMatrix {
 public:
  static constexpr int kMinSf = 7;
  static constexpr int kMaxSf = 12;

  CaptureMatrix() : CaptureMatrix(4.0, std::pow(10.0, -1.6)) {}

  CaptureMatrix(double co_sf, double inter_sf) {
    for (int k = kMinSf; k <= kMaxSf; ++k)
      for (int j = kMinSf; j <= kMaxSf; ++j) set(k, j, k == j ? co_sf : inter_sf);
  }

  static CaptureMatrix from_db(double co_sf_db, double inter_sf_db) {
    return {db_to_linear(co_sf_db), db_to_linear(inter_sf_db)};
  }

  static double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

  double operator()(int sf, int interferer_sf) const { return xi_[index(sf, interferer_sf)]; }

  void set(int sf, int interferer_sf, double threshold) {
    if (!(threshold > 0)) throw std::invalid_argument("CaptureMatrix: thresholds must be > 0");
    xi_[index(sf, interferer_sf)] = threshold;
  }

  friend bool operator==(const CaptureMatrix&, const CaptureMatrix&) = default;

 private:
  static std::size_t index(int sf, int other) {
    if (sf < kMinSf || sf > kMaxSf || other < kMinSf || other > kMaxSf) {
      throw std::out_of_range("CaptureMatrix: SF outside 7..12");
    }
    return static_cast<std::size_t>((sf - kMinSf) * 6 + (other - kMinSf));
  }

  double xi_[36]{};
};

/// One frame on the air.
struct FrameTransmission {
  std::size_t ed_id = 0;
  int slot = 0;
  int band = 0;
  int sf = 7;
  double rx_power = 1.0;
  std::size_t frame_index = 0;  // position in the sender's schedule
};

// d = sqrt(h^2 + R^2 U); the density is 2u/R^2 on [h, w].
inline double distance_from_uniform(const Geometry& g, double u01) {
  return std::sqrt(g.altitude_m * g.altitude_m + g.radius_m * g.radius_m * u01);
}

inline double sample_distance(const Geometry& g, Rng& rng) {
  return distance_from_uniform(g, uniform01(rng));
}

inline double sample_fading(const FadingModel& f, Rng& rng) {
  return std::gamma_distribution<double>(f.m_shape, f.omega / f.m_shape)(rng);
}

/// Received power with the transmit power and hardware constant normalised
/// to 1.
inline double received_power(double a, double d, double alpha) {
  if (!(a > 0) || !(d > 0)) throw std::invalid_argument("received_power: a and d must be > 0");
  return a * std::pow(d, -alpha);
}

/// First slot in 0..n_s-1 whose wake-up call is received, or nothing.
inline std::optional<int> sample_wakeup_slot(double p_b, int n_s, Rng& rng) {
  if (!(p_b >= 0.0 && p_b <= 1.0)) throw std::invalid_argument("sample_wakeup_slot: p_b outside [0,1]");
  std::bernoulli_distribution wake(p_b);
  for (int i = 0; i < n_s; ++i)
    if (wake(rng)) return i;
  return std::nullopt;
}

/// True iff `frame` beats every co-channel interferer by its threshold.
inline bool capture_verdict(const FrameTransmission& frame,
                            std::span<const FrameTransmission> cochannel,
                            const CaptureMatrix& xi) {
  for (const auto& other : cochannel) {
    if (frame.rx_power / other.rx_power < xi(frame.sf, other.sf)) return false;
  }
  return true;
}

inline int sample_band(int n_f, Rng& rng) {
  return std::uniform_int_distribution<int>(0, n_f - 1)(rng);
}

inline int sample_sf(std::span<const int> sf_set, Rng& rng) {
  const auto idx = std::uniform_int_distribution<std::size_t>(0, sf_set.size() - 1)(rng);
  return sf_set[idx];
}

}  // namespace uavec::channel
