#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "uavec/channel.hpp"
#include "uavec/special.hpp"

namespace ch = uavec::channel;

namespace {

double chi_square_uniform(const std::vector<long>& counts) {
  long total = 0;
  for (long c : counts) total += c;
  const double e = static_cast<double>(total) / static_cast<double>(counts.size());
  double x = 0.0;
  for (long c : counts) x += (c - e) * (c - e) / e;
  return x;
}

ch::FrameTransmission frame(int sf, double power) {
  ch::FrameTransmission f;
  f.sf = sf;
  f.rx_power = power;
  return f;
}

}  // namespace

TEST(Channel, DistanceBoundaries) {
  ch::Geometry g;
  EXPECT_DOUBLE_EQ(ch::distance_from_uniform(g, 0.0), 10.0);
  EXPECT_DOUBLE_EQ(ch::distance_from_uniform(g, 1.0), std::sqrt(1000.0));
  EXPECT_DOUBLE_EQ(g.max_distance(), std::sqrt(1000.0));
}

TEST(Channel, DistanceCdfMatches) {
  ch::Geometry g;
  uavec::Rng rng(1);
  std::vector<double> d(100000);
  for (auto& x : d) x = ch::sample_distance(g, rng);
  std::sort(d.begin(), d.end());
  double sup = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double f = (d[k] * d[k] - 100.0) / 900.0;
    sup = std::max({sup, std::abs(f - static_cast<double>(k) / d.size()),
                    std::abs(f - static_cast<double>(k + 1) / d.size())});
  }
  EXPECT_LT(sup, 0.01);
}

TEST(Channel, FadingMomentsAndCdf) {
  ch::FadingModel f{3.0, 1.0};
  uavec::Rng rng(2);
  const int n = 100000;
  std::vector<double> a(n);
  double sum = 0, sum2 = 0;
  for (auto& x : a) {
    x = ch::sample_fading(f, rng);
    ASSERT_GT(x, 0.0);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n, var = sum2 / n - mean * mean;
  // Gamma(m, 1/m): variance 1/m, fourth central moment 3(m+2)/m^3.
  EXPECT_NEAR(mean, 1.0, 3 * std::sqrt(1.0 / 3 / n));
  const double mu4 = 3.0 * (3 + 2) / 27.0;
  EXPECT_NEAR(var, 1.0 / 3, 3 * std::sqrt((mu4 - 1.0 / 9) / n));
  std::sort(a.begin(), a.end());
  double sup = 0.0;
  for (std::size_t k = 0; k < a.size(); k += 7) {
    const double cdf = uavec::special::gamma_p(3.0, 3.0 * a[k]);
    sup = std::max(sup, std::abs(cdf - static_cast<double>(k) / n));
  }
  EXPECT_LT(sup, 0.01);
}

TEST(Channel, RayleighPowerIsExponential) {
  uavec::Rng rng(3);
  const int n = 100000;
  int below = 0;
  for (int k = 0; k < n; ++k) below += ch::sample_fading({1.0, 2.0}, rng) < 2.0;
  const double p = 1 - std::exp(-1.0);
  EXPECT_NEAR(static_cast<double>(below) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(Channel, ReceivedPower) {
  EXPECT_DOUBLE_EQ(ch::received_power(1, 1, 2.5), 1.0);
  EXPECT_NEAR(ch::received_power(1, 10, 2.5), 3.1623e-3, 1e-7);
  EXPECT_DOUBLE_EQ(ch::received_power(2, 7, 2.5), 2 * ch::received_power(1, 7, 2.5));
  EXPECT_THROW(ch::received_power(0, 1, 2.5), std::invalid_argument);
}

TEST(Channel, WakeupSlot) {
  uavec::Rng rng(4);
  EXPECT_EQ(ch::sample_wakeup_slot(1.0, 30, rng), 0);
  EXPECT_FALSE(ch::sample_wakeup_slot(0.0, 30, rng));
  const int n = 100000, n_s = 30;
  std::vector<int> hist(n_s + 1, 0);
  for (int k = 0; k < n; ++k) {
    const auto w = ch::sample_wakeup_slot(0.25, n_s, rng);
    ++hist[static_cast<std::size_t>(w ? *w : n_s)];
  }
  int outside_3sigma = 0;
  for (int i = 0; i <= n_s; ++i) {
    const double p = i < n_s ? std::pow(0.75, i) * 0.25 : std::pow(0.75, n_s);
    const double got = static_cast<double>(hist[static_cast<std::size_t>(i)]) / n;
    const double sigma = std::sqrt(p * (1 - p) / n) + 1e-12;
    outside_3sigma += std::abs(got - p) > 3 * sigma;
    EXPECT_LE(std::abs(got - p), 5 * sigma) << "slot " << i;
  }
  EXPECT_LE(outside_3sigma, 2);
}

TEST(Channel, BandAndSfUniform) {
  uavec::Rng rng(5);
  std::vector<long> bands(8, 0), sfs(3, 0);
  const std::vector<int> set{7, 8, 9};
  for (int k = 0; k < 100000; ++k) {
    ++bands[static_cast<std::size_t>(ch::sample_band(8, rng))];
    ++sfs[static_cast<std::size_t>(ch::sample_sf(set, rng) - 7)];
  }
  EXPECT_LT(chi_square_uniform(bands), 18.48);  // 1% critical value, 7 dof
  EXPECT_LT(chi_square_uniform(sfs), 9.21);     // 2 dof
}

TEST(Channel, CaptureVerdict) {
  const ch::CaptureMatrix xi;
  const auto f = frame(7, 1.0);
  EXPECT_TRUE(ch::capture_verdict(f, {}, xi));
  std::vector<ch::FrameTransmission> same{frame(7, 1.0)};
  EXPECT_FALSE(ch::capture_verdict(f, same, xi));
  std::vector<ch::FrameTransmission> weak{frame(7, 0.2)};
  EXPECT_TRUE(ch::capture_verdict(f, weak, xi));
  // Inter-SF thresholds below one let both frames survive.
  const auto a = frame(7, 1.0), b = frame(9, 1.0);
  EXPECT_TRUE(ch::capture_verdict(a, std::vector{b}, xi));
  EXPECT_TRUE(ch::capture_verdict(b, std::vector{a}, xi));
  // Every interferer must be beaten.
  std::vector<ch::FrameTransmission> two{frame(8, 0.01), frame(7, 0.5)};
  EXPECT_FALSE(ch::capture_verdict(f, two, xi));
}

TEST(Channel, CaptureMatrixDefaultsAndOverrides) {
  ch::CaptureMatrix xi;
  EXPECT_DOUBLE_EQ(xi(8, 8), 4.0);
  EXPECT_DOUBLE_EQ(xi(7, 9), std::pow(10.0, -1.6));
  xi.set(7, 9, 0.5);
  EXPECT_DOUBLE_EQ(xi(7, 9), 0.5);
  EXPECT_DOUBLE_EQ(xi(9, 7), std::pow(10.0, -1.6));
  EXPECT_THROW(xi.set(7, 9, 0.0), std::invalid_argument);
  EXPECT_THROW(xi.set(6, 9, 1.0), std::out_of_range);
  EXPECT_NEAR(ch::CaptureMatrix::from_db(6.0, -16.0)(7, 7), 3.981, 1e-3);
}
