#pragma once

// Closed-form message-delivery model: wake-up distribution, per-slot
// transmission and collision probabilities, transmission success under the
// strongest-interferer rule, and the delivery probabilities of each scheme.
// The interferer loss factor is obtained by quadrature over SF pairs,
// fading and device distances.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uavec/channel.hpp"
#include "uavec/fountain.hpp"
#include "uavec/protocol.hpp"
#include "uavec/quadrature.hpp"
#include "uavec/scenario.hpp"
#include "uavec/special.hpp"

namespace uavec::analysis {

/// Copy counts of the replication model: `Corrected` uses m_q+1 / m_q+2
/// copies, which is what the transmitter actually sends; `Printed` uses the
/// m_q / m_q+1 exponents.
enum class ReplicationMode { Corrected, Printed };

inline std::string_view to_string(ReplicationMode m) {
  return m == ReplicationMode::Corrected ? "corrected" : "printed";
}

struct QuadratureOptions {
  int nodes = 64;          // starting Gauss-Legendre order per axis
  int max_nodes = 1024;
  double rel_tol = 1e-4;   // stop when successive doublings agree this well
  double gamma_tail = 1e-8;
};

struct AnalysisInputs {
  ScenarioConfig scenario;
  QuadratureOptions quad;
  ReplicationMode replication_mode = ReplicationMode::Corrected;
};

struct ModelCurves {
  Scheme scheme = Scheme::Fountain;
  std::vector<double> p_col;      // per slot s
  std::vector<double> zeta;       // per slot s
  std::vector<double> zeta_hat;   // per wake slot i
  std::vector<double> per_wake;   // S1(i)/S2(i) or their replication analogues
  double mdp = 0.0;
  double f_factor = 0.0;
};

// ---------------------------------------------------------------------------
// Access model

inline double wakeup_pmf(int i, double p_b, int n_s) {
  if (i < 0 || i >= n_s) return 0.0;
  return std::pow(1.0 - p_b, i) * p_b;
}

namespace detail {

// (r, y) of the per-slot transmission probability for a wake slot j.
struct Redundancy {
  int r = 0;  // redundant frames sent when the redundancy branch applies
  int y = 0;  // slack needed for it
};

inline Redundancy redundancy(Scheme scheme, int j, const ScenarioConfig& cfg) {
  const int eps = cfg.effective_epsilon();
  switch (scheme) {
    case Scheme::Fountain: return {eps, eps};
    case Scheme::Replication: {
      const int gamma = cfg.n_s - j - cfg.beta;
      return {std::max(0, std::min(gamma, eps)), 0};
    }
    default: return {0, 0};
  }
}

}  // namespace detail

/// Probability that a device waking in slot i sends a frame in slot s.
inline double tx_prob(int s, int i, Scheme scheme, const ScenarioConfig& cfg) {
  if (s < i || i < 0 || s >= cfg.n_s) return 0.0;
  if (scheme == Scheme::TdmaBestCase) return 0.0;
  const auto cap = protocol::remaining_capacity(i, cfg.n_s, cfg.beta);
  const auto [r, y] = detail::redundancy(scheme, i, cfg);
  const double n_i = cap.n_i;
  if (cap.gamma_i >= y) return (cfg.beta + r) / n_i;
  return std::min(cfg.beta / n_i, 1.0);
}

/// Probability that a given other device transmits in slot s, written as
/// the two wake-slot sums gated by theta_s.
inline double collision_prob(int s, Scheme scheme, const ScenarioConfig& cfg) {
  if (s < 0 || s >= cfg.n_s) throw std::out_of_range("collision_prob: slot outside [0, n_s)");
  if (scheme == Scheme::TdmaBestCase) return 0.0;
  const int y = detail::redundancy(scheme, 0, cfg).y;
  const int split = cfg.n_s - cfg.beta - y;
  double first = 0.0;
  for (int j = 0; j <= std::min(split, s); ++j) {
    const int r = detail::redundancy(scheme, j, cfg).r;
    first += (cfg.beta + r) / static_cast<double>(cfg.n_s - j) * wakeup_pmf(j, cfg.p_b, cfg.n_s);
  }
  const int theta = s > split ? 1 : 0;
  double second = 0.0;
  if (theta) {
    for (int j = std::max(split + 1, 0); j <= s; ++j) {
      second += std::min(cfg.beta / static_cast<double>(cfg.n_s - j), 1.0) *
                wakeup_pmf(j, cfg.p_b, cfg.n_s);
    }
  }
  return first + theta * second;
}

/// Success probability of a frame when each of n-1 others independently
/// destroys it with probability p_col * F / N_f.
inline double tx_success_prob(double p_col, double f_factor, int n_f, int n) {
  if (!(f_factor >= 0.0 && f_factor <= 1.0)) throw std::invalid_argument("tx_success_prob: F outside [0,1]");
  return std::pow(1.0 - p_col * f_factor / n_f, n - 1);
}

/// Mean of zeta over the N(i) slots left after waking in slot i.
inline double avg_success(int i, std::span<const double> zeta) {
  const auto n_s = static_cast<int>(zeta.size());
  if (i < 0 || i >= n_s) throw std::out_of_range("avg_success: wake slot outside [0, n_s)");
  double sum = 0.0;
  for (int s = i; s < n_s; ++s) sum += zeta[static_cast<std::size_t>(s)];
  return sum / (n_s - i);
}

/// Per-message probability of being sent in slot s when uncoded.
inline double uncoded_slot_prob(int s, int i, const ScenarioConfig& cfg) {
  if (s < i || s >= cfg.n_s) return 0.0;
  const double n_i = cfg.n_s - i;
  return std::min(n_i / cfg.beta, 1.0) / n_i;
}

inline double binomial_pmf(int trials, int k, double p) {
  if (k < 0 || k > trials) return 0.0;
  const double logc = std::lgamma(trials + 1.0) - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0);
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == trials ? 1.0 : 0.0;
  return std::exp(logc + k * std::log(p) + (trials - k) * std::log1p(-p));
}

namespace detail {

inline ModelCurves slot_curves(Scheme scheme, const ScenarioConfig& cfg, double f_factor) {
  ModelCurves c;
  c.scheme = scheme;
  c.f_factor = f_factor;
  const auto n_s = static_cast<std::size_t>(cfg.n_s);
  c.p_col.resize(n_s);
  c.zeta.resize(n_s);
  c.zeta_hat.resize(n_s);
  c.per_wake.assign(n_s, 0.0);
  for (int s = 0; s < cfg.n_s; ++s) {
    c.p_col[static_cast<std::size_t>(s)] = collision_prob(s, scheme, cfg);
    c.zeta[static_cast<std::size_t>(s)] = tx_success_prob(c.p_col[static_cast<std::size_t>(s)], f_factor, cfg.n_f, cfg.n);
  }
  for (int i = 0; i < cfg.n_s; ++i) c.zeta_hat[static_cast<std::size_t>(i)] = avg_success(i, c.zeta);
  return c;
}

inline double uncoded_delivery(int i, const ScenarioConfig& cfg, const std::vector<double>& zeta) {
  double s2 = 0.0;
  for (int s = i; s < cfg.n_s; ++s) s2 += uncoded_slot_prob(s, i, cfg) * zeta[static_cast<std::size_t>(s)];
  return s2;
}

}  // namespace detail

/// Fountain coding: S1(i) where at least eps slack remains (binomial number
/// of received frames weighted by the decoding probability), S2(i) otherwise.
/// With zero effective redundancy no coding is applied and every wake slot
/// takes the uncoded branch.
inline ModelCurves mdp_fountain(const AnalysisInputs& in, double f_factor) {
  const auto& cfg = in.scenario;
  auto c = detail::slot_curves(Scheme::Fountain, cfg, f_factor);
  const int eps = cfg.effective_epsilon();
  const int total = cfg.beta + eps;
  for (int i = 0; i < cfg.n_s; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const int gamma = cfg.n_s - i - cfg.beta;
    double v;
    if (eps > 0 && gamma >= eps) {
      v = 0.0;
      for (int z = cfg.beta; z <= total; ++z) {
        v += binomial_pmf(total, z, c.zeta_hat[ii]) * fountain::decode_probability(z, cfg.beta, cfg.q);
      }
    } else {
      v = detail::uncoded_delivery(i, cfg, c.zeta);
    }
    c.per_wake[ii] = v;
    c.mdp += wakeup_pmf(i, cfg.p_b, cfg.n_s) * v;
  }
  return c;
}

/// Message replication: at-least-one-copy probability where slack is
/// positive, uncoded delivery otherwise.
inline ModelCurves mdp_replication(const AnalysisInputs& in, double f_factor) {
  const auto& cfg = in.scenario;
  auto c = detail::slot_curves(Scheme::Replication, cfg, f_factor);
  const int eps = cfg.effective_epsilon();
  const int shift = in.replication_mode == ReplicationMode::Corrected ? 1 : 0;
  for (int i = 0; i < cfg.n_s; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const int gamma = cfg.n_s - i - cfg.beta;
    double v;
    if (gamma > 0) {
      const auto [m_q, m_r] = protocol::replication_counts(std::min(gamma, eps), cfg.beta);
      const double p1 = static_cast<double>(cfg.beta - m_r) / cfg.beta;
      const double p2 = static_cast<double>(m_r) / cfg.beta;
      const double miss = 1.0 - c.zeta_hat[ii];
      v = p1 * (1.0 - std::pow(miss, m_q + shift)) + p2 * (1.0 - std::pow(miss, m_q + 1 + shift));
    } else {
      v = detail::uncoded_delivery(i, cfg, c.zeta);
    }
    c.per_wake[ii] = v;
    c.mdp += wakeup_pmf(i, cfg.p_b, cfg.n_s) * v;
  }
  return c;
}

/// No redundancy: the fountain expression with epsilon = 0.
inline ModelCurves mdp_baseline(const AnalysisInputs& in, double f_factor) {
  AnalysisInputs base = in;
  base.scenario.epsilon = 0;
  auto c = mdp_fountain(base, f_factor);
  c.scheme = Scheme::Baseline;
  return c;
}

/// Best-case TDMA: a device that hears the single wake-up call delivers
/// everything.
inline ModelCurves mdp_tdma(const AnalysisInputs& in) {
  ModelCurves c;
  c.scheme = Scheme::TdmaBestCase;
  c.mdp = in.scenario.p_b;
  return c;
}

inline ModelCurves evaluate(Scheme scheme, const AnalysisInputs& in, double f_factor) {
  switch (scheme) {
    case Scheme::Fountain: return mdp_fountain(in, f_factor);
    case Scheme::Replication: return mdp_replication(in, f_factor);
    case Scheme::Baseline: return mdp_baseline(in, f_factor);
    case Scheme::TdmaBestCase: return mdp_tdma(in);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Interferer loss factor

struct LossFactor {
  double value = 0.0;
  double error_estimate = 0.0;  // |last - previous| of the node doubling
  int nodes = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved relative change " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

inline double distance_pdf(double u, const channel::Geometry& g) {
  if (u < g.altitude_m || u > g.max_distance()) return 0.0;
  return 2.0 * u / (g.radius_m * g.radius_m);
}

inline double distance_cdf(double u, const channel::Geometry& g) {
  if (u < g.altitude_m) return 0.0;
  if (u > g.max_distance()) return 1.0;
  return (u * u - g.altitude_m * g.altitude_m) / (g.radius_m * g.radius_m);
}

namespace detail {

// P(R/R' < xi) for fixed distances is
//   int_0^inf [1 - F_A(a (u/d0)^alpha / xi)] f_A(a) da.
// With x = m a / omega and x = v^2 the weight becomes
// 2 v^{2m-1} e^{-v^2} / Gamma(m), smooth for m >= 1/2.
struct FadingAxis {
  std::vector<double> v2;      // x = v^2 at the nodes
  std::vector<double> weight;  // includes the gamma density
};

inline FadingAxis fading_axis(const channel::FadingModel& f, int nodes, double tail) {
  const double x_max = special::gamma_p_inverse(f.m_shape, 1.0 - tail);
  const double v_max = std::sqrt(x_max);
  constexpr int kPanels = 4;
  const auto ref = quad::gauss_legendre(nodes);
  FadingAxis ax;
  const double lg = std::lgamma(f.m_shape);
  for (int p = 0; p < kPanels; ++p) {
    const auto r = quad::map_to(ref, v_max * p / kPanels, v_max * (p + 1) / kPanels);
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      const double v = r.nodes[k];
      ax.v2.push_back(v * v);
      ax.weight.push_back(r.weights[k] * 2.0 *
                          std::exp((2.0 * f.m_shape - 1.0) * std::log(v) - v * v - lg));
    }
  }
  return ax;
}

inline double pair_loss_fading(double xi, const channel::Geometry& g, const channel::FadingModel& f,
                               int nodes, double tail) {
  const auto ax = fading_axis(f, nodes, tail);
  const auto ref = quad::gauss_legendre(nodes);
  const auto dist = quad::map_to(ref, g.altitude_m, g.max_distance());
  double total = 0.0;
  for (std::size_t iu = 0; iu < dist.nodes.size(); ++iu) {
    const double u = dist.nodes[iu];
    const double wu = dist.weights[iu] * distance_pdf(u, g);
    for (std::size_t id = 0; id < dist.nodes.size(); ++id) {
      const double d0 = dist.nodes[id];
      const double wd = dist.weights[id] * distance_pdf(d0, g);
      // A' exceeds a * t for a loss; F_A is evaluated at x * t in normalised units.
      const double t = std::pow(u / d0, g.path_loss_exp) / xi;
      double inner = 0.0;
      for (std::size_t k = 0; k < ax.v2.size(); ++k) {
        inner += ax.weight[k] * (1.0 - special::gamma_p(f.m_shape, ax.v2[k] * t));
      }
      total += wu * wd * inner;
    }
  }
  return total;
}

template <typename PairFn>
LossFactor average_over_pairs(const ScenarioConfig& cfg, PairFn&& pair_value) {
  std::map<double, double> cache;
  double sum = 0.0;
  for (int k : cfg.sf_set) {
    for (int kp : cfg.sf_set) {
      const double xi = cfg.capture(k, kp);
      auto it = cache.find(xi);
      if (it == cache.end()) it = cache.emplace(xi, pair_value(xi)).first;
      sum += it->second;
    }
  }
  const double pairs = static_cast<double>(cfg.sf_set.size() * cfg.sf_set.size());
  LossFactor out;
  out.value = sum / pairs;
  return out;
}

}  // namespace detail

/// Probability that a co-channel frame is strong enough to destroy the
/// desired one, averaged over the uniform SF pair, Nakagami fading of both
/// frames and both device distances. Node counts double from
/// quad.nodes until the relative change is below quad.rel_tol.
inline LossFactor interferer_loss_factor(const AnalysisInputs& in) {
  const auto& cfg = in.scenario;
  cfg.geometry.validate();
  cfg.fading.validate();
  auto at = [&](int nodes) {
    return detail::average_over_pairs(cfg, [&](double xi) {
      return detail::pair_loss_fading(xi, cfg.geometry, cfg.fading, nodes, in.quad.gamma_tail);
    });
  };
  int nodes = in.quad.nodes;
  LossFactor prev = at(nodes);
  double change = 1.0;
  while (nodes * 2 <= in.quad.max_nodes) {
    nodes *= 2;
    LossFactor cur = at(nodes);
    change = std::abs(cur.value - prev.value);
    cur.error_estimate = change;
    cur.nodes = nodes;
    if (change <= in.quad.rel_tol * std::max(std::abs(cur.value), 1e-12)) {
      cur.converged = true;
      cur.value = std::clamp(cur.value, 0.0, 1.0);
      return cur;
    }
    prev = cur;
  }
  throw QuadratureError("interferer_loss_factor: quadrature did not converge",
                        change / std::max(std::abs(prev.value), 1e-12));
}

// Without fading a frame from distance d0 is lost to one from distance u
// iff d0 > u / t, t = xi^{1/alpha}.
inline double nofading_conditional_loss(double u, double xi, const channel::Geometry& g) {
  const double t = std::pow(xi, 1.0 / g.path_loss_exp);
  return 1.0 - distance_cdf(u / t, g);
}

/// int_h^w F~(u) f_D(u) du by Gauss-Legendre on the pieces between the
/// breakpoints t h and t w.
inline double nofading_integral_quadrature(double xi, const channel::Geometry& g, int nodes = 32) {
  const double h = g.altitude_m;
  const double w = g.max_distance();
  const double t = std::pow(xi, 1.0 / g.path_loss_exp);
  std::vector<double> cuts{h, w};
  for (double c : {t * h, t * w})
    if (c > h && c < w) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  const auto ref = quad::gauss_legendre(nodes);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += quad::integrate(
        [&](double u) { return nofading_conditional_loss(u, xi, g) * distance_pdf(u, g); },
        cuts[k], cuts[k + 1], ref);
  }
  return total;
}

enum class NofadingBranch { Zero = 1, Lower = 2, Upper = 3, One = 4 };

inline NofadingBranch nofading_branch(double xi, const channel::Geometry& g) {
  const double t = std::pow(xi, 1.0 / g.path_loss_exp);
  const double h = g.altitude_m;
  const double w = g.max_distance();
  if (t < h / w) return NofadingBranch::Zero;
  if (t < 1.0) return NofadingBranch::Lower;
  if (t < w / h) return NofadingBranch::Upper;
  return NofadingBranch::One;
}

/// Piecewise closed form of the no-fading integral, printed variant.
inline double nofading_integral_printed(double xi, const channel::Geometry& g) {
  const double h = g.altitude_m;
  const double w = g.max_distance();
  const double r2 = g.radius_m * g.radius_m;
  const double t = std::pow(xi, 1.0 / g.path_loss_exp);
  const double a = t * h;
  const double b = t * w;
  const double c = 1.0 / r2 + h * h / (r2 * r2);
  const double inv_t2 = 1.0 / (t * t);
  switch (nofading_branch(xi, g)) {
    case NofadingBranch::Zero: return 0.0;
    case NofadingBranch::Lower: return (b * b - h * h) * c - inv_t2 * (std::pow(b, 4) - std::pow(h, 4));
    case NofadingBranch::Upper:
      return (a * a - h * h) / r2 + (w * w - h * h) * c - inv_t2 / (2.0 * r2) * (std::pow(w, 4) - std::pow(a, 4));
    case NofadingBranch::One: return 1.0;
  }
  return 0.0;
}

/// Closed form of the same integral with the quartic term scaled by
/// 1/(2 R^4) and the middle term of the upper branch integrated from a.
inline double nofading_integral_closed(double xi, const channel::Geometry& g) {
  const double h = g.altitude_m;
  const double w = g.max_distance();
  const double r2 = g.radius_m * g.radius_m;
  const double r4 = r2 * r2;
  const double t = std::pow(xi, 1.0 / g.path_loss_exp);
  const double a = t * h;
  const double b = t * w;
  const double c = 1.0 / r2 + h * h / r4;
  const double inv_t2 = 1.0 / (t * t);
  switch (nofading_branch(xi, g)) {
    case NofadingBranch::Zero: return 0.0;
    case NofadingBranch::Lower: return (b * b - h * h) * c - inv_t2 * (std::pow(b, 4) - std::pow(h, 4)) / (2.0 * r4);
    case NofadingBranch::Upper:
      return (a * a - h * h) / r2 + (w * w - a * a) * c - inv_t2 * (std::pow(w, 4) - std::pow(a, 4)) / (2.0 * r4);
    case NofadingBranch::One: return 1.0;
  }
  return 0.0;
}

enum class NofadingMethod { Quadrature, ClosedForm, Printed };

/// Loss factor with fading ignored on both links.
inline LossFactor interferer_loss_factor_nofading(const AnalysisInputs& in,
                                                  NofadingMethod method = NofadingMethod::Quadrature) {
  const auto& cfg = in.scenario;
  cfg.geometry.validate();
  auto out = detail::average_over_pairs(cfg, [&](double xi) {
    switch (method) {
      case NofadingMethod::ClosedForm: return nofading_integral_closed(xi, cfg.geometry);
      case NofadingMethod::Printed: return nofading_integral_printed(xi, cfg.geometry);
      case NofadingMethod::Quadrature: break;
    }
    return nofading_integral_quadrature(xi, cfg.geometry);
  });
  out.converged = true;
  out.nodes = 32;
  return out;
}

}  // namespace uavec::analysis
