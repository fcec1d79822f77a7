#include <gtest/gtest.h>

#include "mhdelay/traffic.hpp"
#include "oracles.hpp"

using namespace mhd;

TEST(Traffic, ZeroRequestRateRejected) {
  auto c = TrafficConfig::from_rate(8000.0, 0.0);
  EXPECT_THROW(generate_arrivals(c, 10), ConfigError);
}

TEST(Traffic, InconsistentRatesRejected) {
  auto c = TrafficConfig::from_rate(8000.0, 1.0);
  c.mean_burst_bits = 4000.0;
  EXPECT_THROW(c.validate(), ConfigError);
  auto ok = TrafficConfig::from_rate(8000.0, 1.0);
  EXPECT_THROW(generate_arrivals(ok, 0), ConfigError);
}

TEST(Traffic, SixteenMbpsIs8000BitsPerSlot) {
  EXPECT_DOUBLE_EQ(bits_per_slot(16.0, 0.5e-3), 8000.0);
}

TEST(Traffic, FixedBurstMeanWithinOnePercent) {
  auto c = TrafficConfig::from_rate(8000.0, 1.0, BurstDistribution::fixed, 11);
  auto a = generate_arrivals(c, 100000);
  double s = 0.0;
  for (auto v : a) {
    EXPECT_EQ(v % 8000, 0);
    s += static_cast<double>(v);
  }
  EXPECT_NEAR(s / 1e5, 8000.0, 80.0);
}

TEST(Traffic, ExponentialBurstMean) {
  auto c = TrafficConfig::from_rate(8000.0, 2.0, BurstDistribution::exponential, 12);
  auto a = generate_arrivals(c, 100000);
  double s = 0.0;
  for (auto v : a) s += static_cast<double>(v);
  // floor() on each burst loses 0.5 bit on average
  EXPECT_NEAR(s / 1e5, 8000.0 - 1.0, 80.0);
}

TEST(Traffic, Reproducible) {
  auto c = TrafficConfig::from_rate(8000.0, 1.0, BurstDistribution::exponential, 99);
  EXPECT_EQ(generate_arrivals(c, 5000), generate_arrivals(c, 5000));
  auto d = c;
  d.seed = 100;
  EXPECT_NE(generate_arrivals(c, 5000), generate_arrivals(d, 5000));
}

TEST(Traffic, SlotsUncorrelated) {
  auto a = generate_arrivals(TrafficConfig::from_rate(8000.0, 1.0, BurstDistribution::fixed, 5), 100000);
  for (std::size_t k = 1; k <= 10; ++k) {
    auto ac = oracle::autocovariance(a, k);
    EXPECT_LT(std::abs(ac.value), 3.0 * ac.se) << "lag " << k;
  }
}
