#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "uavec/analysis.hpp"
#include "uavec/protocol.hpp"

namespace an = uavec::analysis;
using uavec::Scheme;
using uavec::ScenarioConfig;

namespace {

an::AnalysisInputs inputs(const ScenarioConfig& cfg) { return {cfg, {}, an::ReplicationMode::Corrected}; }

void expect_probability(double p) {
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
}

// Gauss-Legendre double integral of g(d0, u) f_D(d0) f_D(u).
template <typename G>
double distance_pair_integral(const uavec::channel::Geometry& geo, G&& g, int nodes = 96) {
  const auto r = uavec::quad::map_to(uavec::quad::gauss_legendre(nodes), geo.altitude_m, geo.max_distance());
  double s = 0.0;
  for (std::size_t a = 0; a < r.nodes.size(); ++a)
    for (std::size_t b = 0; b < r.nodes.size(); ++b)
      s += r.weights[a] * r.weights[b] * an::distance_pdf(r.nodes[a], geo) * an::distance_pdf(r.nodes[b], geo) *
           g(r.nodes[a], r.nodes[b]);
  return s;
}

}  // namespace

TEST(Analysis, WakeupPmf) {
  EXPECT_DOUBLE_EQ(an::wakeup_pmf(0, 1.0, 30), 1.0);
  EXPECT_DOUBLE_EQ(an::wakeup_pmf(2, 0.25, 30), 0.140625);
  EXPECT_EQ(an::wakeup_pmf(30, 0.25, 30), 0.0);
  double sum = 0.0;
  for (int i = 0; i < 30; ++i) sum += an::wakeup_pmf(i, 0.25, 30);
  EXPECT_NEAR(sum, 1.0 - std::pow(0.75, 30), 1e-15);
}

TEST(Analysis, TxProb) {
  ScenarioConfig cfg;
  EXPECT_EQ(an::tx_prob(3, 4, Scheme::Fountain, cfg), 0.0);
  EXPECT_NEAR(an::tx_prob(0, 0, Scheme::Fountain, cfg), 1.0 / 3, 1e-15);
  EXPECT_NEAR(an::tx_prob(29, 27, Scheme::Baseline, cfg), 1.0, 1e-15);
  EXPECT_NEAR(an::tx_prob(10, 10, Scheme::Baseline, cfg), 0.25, 1e-15);
  // Replication with gamma = 2 < epsilon sends beta + 2 frames.
  EXPECT_NEAR(an::tx_prob(24, 23, Scheme::Replication, cfg), 1.0, 1e-15);
  EXPECT_NEAR(an::tx_prob(22, 22, Scheme::Replication, cfg), 8.0 / 8, 1e-15);
  EXPECT_NEAR(an::tx_prob(21, 21, Scheme::Replication, cfg), 9.0 / 9, 1e-15);
  EXPECT_NEAR(an::tx_prob(15, 15, Scheme::Replication, cfg), 10.0 / 15, 1e-15);
}

TEST(Analysis, CollisionProbReducesAtCertainWakeup) {
  ScenarioConfig cfg;
  cfg.p_b = 1.0;
  for (int s = 0; s <= cfg.n_s - cfg.beta - cfg.epsilon; ++s)
    EXPECT_NEAR(an::collision_prob(s, Scheme::Fountain, cfg), 10.0 / 30, 1e-15);
}

// The gated two-sum form equals the plain mixture over wake slots.
TEST(Analysis, CollisionProbIsWakeMixture) {
  for (double p_b : {0.1, 0.25, 0.6, 1.0}) {
    for (int eps : {0, 1, 3, 5, 12}) {
      ScenarioConfig cfg;
      cfg.p_b = p_b;
      cfg.epsilon = eps;
      for (Scheme sc : {Scheme::Fountain, Scheme::Replication, Scheme::Baseline}) {
        for (int s = 0; s < cfg.n_s; ++s) {
          double mix = 0.0;
          for (int j = 0; j <= s; ++j) mix += an::wakeup_pmf(j, p_b, cfg.n_s) * an::tx_prob(s, j, sc, cfg);
          const double p = an::collision_prob(s, sc, cfg);
          expect_probability(p);
          EXPECT_NEAR(p, mix, 1e-13) << to_string(sc) << " s=" << s << " eps=" << eps;
        }
      }
    }
  }
}

TEST(Analysis, CollisionProbMatchesSimulatedFrequency) {
  ScenarioConfig cfg;
  cfg.epsilon = 3;
  const int trials = 40000;
  uavec::Rng rng(99);
  const uavec::fountain::SourceBlock block{0, std::vector<uavec::fountain::ByteRow>(5)};
  int cells = 0, outside = 0;
  for (Scheme sc : {Scheme::Fountain, Scheme::Replication}) {
    std::vector<int> hits(30, 0);
    for (int t = 0; t < trials; ++t) {
      const auto w = uavec::channel::sample_wakeup_slot(cfg.p_b, cfg.n_s, rng);
      if (!w) continue;
      for (const auto& e : uavec::protocol::plan_transmissions(sc, *w, cfg, block, rng).entries)
        ++hits[static_cast<std::size_t>(e.slot)];
    }
    for (int s = 0; s < cfg.n_s; ++s) {
      const double p = an::collision_prob(s, sc, cfg);
      const double sigma = std::sqrt(p * (1 - p) / trials);
      const double got = static_cast<double>(hits[static_cast<std::size_t>(s)]) / trials;
      ++cells;
      outside += std::abs(got - p) > 3 * sigma;
      EXPECT_LE(std::abs(got - p), 5 * sigma) << to_string(sc) << " s=" << s;
    }
  }
  EXPECT_LE(outside, 2) << "of " << cells;
}

TEST(Analysis, TxSuccessProb) {
  EXPECT_NEAR(an::tx_success_prob(0.3, 0.5, 8, 30), std::pow(1 - 0.01875, 29), 1e-15);
  EXPECT_NEAR(an::tx_success_prob(0.3, 0.5, 8, 30), 0.5776, 1e-4);
  EXPECT_EQ(an::tx_success_prob(0.7, 0.9, 8, 1), 1.0);
  EXPECT_EQ(an::tx_success_prob(0.7, 0.0, 8, 30), 1.0);
  EXPECT_THROW(an::tx_success_prob(0.5, 1.5, 8, 30), std::invalid_argument);
}

TEST(Analysis, AvgSuccess) {
  const std::vector<double> c(30, 0.7);
  EXPECT_NEAR(an::avg_success(0, c), 0.7, 1e-15);
  EXPECT_NEAR(an::avg_success(17, c), 0.7, 1e-15);
  const std::vector<double> ramp{0.1, 0.2, 0.3, 0.4};
  EXPECT_NEAR(an::avg_success(1, ramp), 0.3, 1e-15);
}

TEST(Analysis, SingleDeviceCertainWakeupDecodesWithFieldProbability) {
  ScenarioConfig cfg;
  cfg.n = 1;
  cfg.p_b = 1.0;
  const auto c = an::mdp_fountain(inputs(cfg), 0.3);
  EXPECT_NEAR(c.mdp, uavec::fountain::decode_probability(10, 5), 1e-14);
}

TEST(Analysis, ZeroRedundancyCollapsesToBaseline) {
  ScenarioConfig cfg;
  cfg.epsilon = 0;
  for (double p_b : {0.1, 0.5, 0.9}) {
    cfg.p_b = p_b;
    const double base = an::mdp_baseline(inputs(cfg), 0.28).mdp;
    EXPECT_NEAR(an::mdp_fountain(inputs(cfg), 0.28).mdp, base, 1e-15);
    EXPECT_NEAR(an::mdp_replication(inputs(cfg), 0.28).mdp, base, 1e-15);
  }
}

TEST(Analysis, ReplicationCorrectedModeIsOneWithoutLosses) {
  ScenarioConfig cfg;
  cfg.p_b = 0.4;
  const auto c = an::mdp_replication(inputs(cfg), 0.0);
  for (int i = 0; i < cfg.n_s - cfg.beta; ++i) EXPECT_NEAR(c.per_wake[static_cast<std::size_t>(i)], 1.0, 1e-15);
  auto printed = inputs(cfg);
  printed.replication_mode = an::ReplicationMode::Printed;
  EXPECT_LT(an::mdp_replication(printed, 0.3).mdp, an::mdp_replication(inputs(cfg), 0.3).mdp);
}

TEST(Analysis, TdmaEqualsWakeupProbability) {
  ScenarioConfig cfg;
  cfg.p_b = 0.37;
  EXPECT_DOUBLE_EQ(an::mdp_tdma(inputs(cfg)).mdp, 0.37);
}

TEST(Analysis, CurvesAreProbabilitiesAndMonotone) {
  const double f = 0.284;
  for (Scheme sc : {Scheme::Fountain, Scheme::Replication, Scheme::Baseline}) {
    double prev = -1.0;
    for (int k = 1; k <= 10; ++k) {
      ScenarioConfig cfg;
      cfg.p_b = 0.1 * k;
      const auto c = an::evaluate(sc, inputs(cfg), f);
      for (const auto* v : {&c.p_col, &c.zeta, &c.zeta_hat, &c.per_wake})
        for (double x : *v) expect_probability(x);
      EXPECT_GE(c.mdp, prev - 1e-12) << to_string(sc) << " p_b=" << cfg.p_b;
      prev = c.mdp;
    }
    prev = 2.0;
    for (int n = 10; n <= 50; n += 10) {
      ScenarioConfig cfg;
      cfg.n = n;
      cfg.n_s = 60;
      const double v = an::evaluate(sc, inputs(cfg), f).mdp;
      EXPECT_LE(v, prev + 1e-12);
      prev = v;
    }
    double lo = an::evaluate(sc, inputs(ScenarioConfig{}), f).mdp;
    ScenarioConfig more_bands;
    more_bands.n_f = 16;
    EXPECT_GE(an::evaluate(sc, inputs(more_bands), f).mdp, lo);
  }
}

TEST(Analysis, DistanceDensity) {
  uavec::channel::Geometry g;
  EXPECT_EQ(an::distance_cdf(10.0, g), 0.0);
  EXPECT_EQ(an::distance_cdf(g.max_distance(), g), 1.0);
  const auto total = uavec::quad::integrate([&](double u) { return an::distance_pdf(u, g); }, 10.0,
                                            g.max_distance(), uavec::quad::gauss_legendre(8));
  EXPECT_NEAR(total, 1.0, 1e-13);
}

TEST(Analysis, LossFactorLimits) {
  ScenarioConfig cfg;
  cfg.capture = uavec::channel::CaptureMatrix(1e9, 1e9);
  EXPECT_NEAR(an::interferer_loss_factor(inputs(cfg)).value, 1.0, 1e-4);
  cfg.capture = uavec::channel::CaptureMatrix(1e-9, 1e-9);
  EXPECT_NEAR(an::interferer_loss_factor(inputs(cfg)).value, 0.0, 1e-4);
}

// Rayleigh power on both links: P(A' > A t) = 1 / (1 + t).
TEST(Analysis, ExponentialFadingInnerIntegral) {
  ScenarioConfig cfg;
  cfg.fading.m_shape = 1.0;
  cfg.sf_set = {7};
  const double xi = 4.0;
  cfg.capture = uavec::channel::CaptureMatrix(xi, 0.1);
  const auto& g = cfg.geometry;
  const double want = distance_pair_integral(g, [&](double d0, double u) {
    const double t = std::pow(u / d0, g.path_loss_exp) / xi;
    return 1.0 / (1.0 + t);
  });
  EXPECT_NEAR(an::interferer_loss_factor(inputs(cfg)).value, want, 1e-4 * want);
}

TEST(Analysis, LossFactorMatchesMonteCarlo) {
  ScenarioConfig cfg;
  const auto f = an::interferer_loss_factor(inputs(cfg));
  EXPECT_TRUE(f.converged);
  uavec::Rng rng(12345);
  const int n = 1000000;
  long lost = 0;
  for (int k = 0; k < n; ++k) {
    const int sf = uavec::channel::sample_sf(cfg.sf_set, rng);
    const int sf2 = uavec::channel::sample_sf(cfg.sf_set, rng);
    const double a = uavec::channel::sample_fading(cfg.fading, rng);
    const double a2 = uavec::channel::sample_fading(cfg.fading, rng);
    const double d0 = uavec::channel::sample_distance(cfg.geometry, rng);
    const double u = uavec::channel::sample_distance(cfg.geometry, rng);
    const double ratio = uavec::channel::received_power(a, d0, 2.5) / uavec::channel::received_power(a2, u, 2.5);
    lost += ratio < cfg.capture(sf, sf2);
  }
  const double p = static_cast<double>(lost) / n;
  EXPECT_NEAR(f.value, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(Analysis, NonConvergenceIsReported) {
  ScenarioConfig cfg;
  an::AnalysisInputs in = inputs(cfg);
  in.quad.nodes = 4;
  in.quad.max_nodes = 8;
  in.quad.rel_tol = 1e-14;
  EXPECT_THROW(an::interferer_loss_factor(in), an::QuadratureError);
}

TEST(Analysis, NakagamiLimitApproachesNoFading) {
  ScenarioConfig cfg;
  cfg.fading.m_shape = 200.0;
  const double fading = an::interferer_loss_factor(inputs(cfg)).value;
  const double plain = an::interferer_loss_factor_nofading(inputs(cfg)).value;
  EXPECT_NEAR(fading, plain, 0.02);
}

TEST(Analysis, NoFadingQuadratureMatchesSampling) {
  uavec::channel::Geometry g;
  const double xi = 4.0;
  const double q = an::nofading_integral_quadrature(xi, g);
  uavec::Rng rng(77);
  const int n = 1000000;
  long lost = 0;
  for (int k = 0; k < n; ++k) {
    const double d0 = uavec::channel::sample_distance(g, rng);
    const double u = uavec::channel::sample_distance(g, rng);
    lost += std::pow(d0, -2.5) / std::pow(u, -2.5) < xi;
  }
  const double p = static_cast<double>(lost) / n;
  EXPECT_NEAR(q, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(Analysis, NoFadingBranches) {
  uavec::channel::Geometry g;
  using B = an::NofadingBranch;
  const std::pair<double, B> cases[] = {{0.01, B::Zero}, {0.2, B::Lower}, {0.9, B::Lower},
                                        {4.0, B::Upper}, {15.0, B::Upper}, {40.0, B::One}};
  for (auto [xi, branch] : cases) {
    EXPECT_EQ(an::nofading_branch(xi, g), branch) << xi;
    const double q = an::nofading_integral_quadrature(xi, g, 64);
    EXPECT_NEAR(an::nofading_integral_closed(xi, g), q, 1e-10) << xi;
    const double printed = an::nofading_integral_printed(xi, g);
    if (branch == B::Zero || branch == B::One) {
      EXPECT_NEAR(printed, q, 1e-12);
    } else {
      // The printed middle branches do not reproduce the integral.
      EXPECT_GT(std::abs(printed - q), 1e-3) << xi;
    }
  }
  ScenarioConfig cfg;
  cfg.capture = uavec::channel::CaptureMatrix(1e-3, 1e-3);
  EXPECT_EQ(an::interferer_loss_factor_nofading(inputs(cfg)).value, 0.0);
  cfg.capture = uavec::channel::CaptureMatrix(1e3, 1e3);
  EXPECT_NEAR(an::interferer_loss_factor_nofading(inputs(cfg)).value, 1.0, 1e-15);
}
