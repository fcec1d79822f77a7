#include <gtest/gtest.h>

#include <cmath>

#include "mhdelay/channel.hpp"
#include "oracles.hpp"

using namespace mhd;

namespace {

ChannelConfig uma() {
  auto c = ChannelConfig::defaults_for(ChannelModel::UMa);
  c.carrier_frequency_ghz = 28.0;
  return c;
}

}  // namespace

// Frozen from a hand evaluation of the UMa/UMi formulas (hBS 25 / 10 m, hUT 1.5 m).
TEST(PathLoss, GoldenValuesAt100m) {
  EXPECT_NEAR(path_loss_db(uma(), 100.0, LinkState::LOS), 101.19995641669125, 1e-9);
  EXPECT_NEAR(path_loss_db(uma(), 100.0, LinkState::NLOS), 121.09932332989962, 1e-9);
  auto umi = ChannelConfig::defaults_for(ChannelModel::UMi);
  EXPECT_NEAR(path_loss_db(umi, 100.0, LinkState::LOS), 103.3759888423402, 1e-9);
}

TEST(PathLoss, DoublingDistanceAdds22Log2) {
  // far enough that d3d ~ d2d
  auto c = uma();
  double d1 = path_loss_db(c, 1000.0, LinkState::LOS), d2 = path_loss_db(c, 2000.0, LinkState::LOS);
  EXPECT_NEAR(d2 - d1, 22.0 * std::log10(2.0), 0.01);
}

TEST(PathLoss, MonotoneAndNlosAboveLos) {
  for (auto model : {ChannelModel::UMa, ChannelModel::UMi}) {
    auto c = ChannelConfig::defaults_for(model);
    double prev = 0.0;
    for (int i = 0; i < 100; ++i) {
      double d = 10.0 + i * 49.0;
      double los = path_loss_db(c, d, LinkState::LOS), nlos = path_loss_db(c, d, LinkState::NLOS);
      EXPECT_GE(nlos, los);
      EXPECT_GE(los, prev);
      EXPECT_TRUE(std::isfinite(los) && los > 0.0);
      prev = los;
    }
  }
}

TEST(PathLoss, OutOfRangeNamesTheBound) {
  try {
    path_loss_db(uma(), 5.0, LinkState::LOS);
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("[10, 5000]"), std::string::npos);
  }
  EXPECT_THROW(path_loss_db(uma(), 6000.0, LinkState::LOS), RangeError);
  auto c = uma();
  c.carrier_frequency_ghz = 150.0;
  EXPECT_THROW(path_loss_db(c, 100.0, LinkState::LOS), RangeError);
}

TEST(LosProbability, Shape) {
  auto c = uma();
  EXPECT_DOUBLE_EQ(los_probability(c, 10.0), 1.0);
  EXPECT_NEAR(los_probability(c, 100.0), 0.18 + std::exp(-100.0 / 63.0) * 0.82, 1e-12);
  EXPECT_GT(los_probability(c, 50.0), los_probability(c, 200.0));
}

TEST(Service, ZeroBandwidthRejected) {
  auto c = uma();
  c.bandwidth_hz = 0.0;
  EXPECT_THROW(draw_service(c, 10, 0.5e-3), ConfigError);
}

TEST(Service, NoShadowingIsConstant) {
  auto c = uma();
  c.shadow_sigma_db = 0.0;
  auto s = draw_service(c, 1000, 0.5e-3);
  for (auto v : s) EXPECT_EQ(v, s.front());
  EXPECT_EQ(s.front(), capacity_bits(c.bandwidth_hz, median_sinr_db(c, LinkState::LOS), 0.5e-3));
}

TEST(Service, MeanMatchesQuadrature) {
  auto c = uma();
  c.bandwidth_hz = 2.0e6;
  c.seed = 31;
  auto s = draw_service(c, 100000, 0.5e-3);
  double m = 0.0;
  for (auto v : s) m += static_cast<double>(v);
  m /= 1e5;
  double ref = oracle::mean_capacity_bits(c.bandwidth_hz, median_sinr_db(c, LinkState::LOS), c.shadow_sigma_db, 0.5e-3);
  EXPECT_NEAR(m / ref, 1.0, 0.02);
}

TEST(Service, InterferenceLowersSinr) {
  auto c = uma();
  double clean = median_sinr_db(c, LinkState::LOS);
  c.interferer_powers_dbm = {-90.0};
  EXPECT_LT(median_sinr_db(c, LinkState::LOS), clean);
}

TEST(Service, HopsIndependent) {
  auto a = uma(), b = uma();
  a.seed = derive_seed(5, 0, "channel", 0);
  b.seed = derive_seed(5, 0, "channel", 1);
  auto sa = draw_service(a, 100000, 0.5e-3), sb = draw_service(b, 100000, 0.5e-3);
  EXPECT_LT(std::abs(oracle::pearson(sa, sb)), 3.0 / std::sqrt(1e5));
}

TEST(Service, ProbabilisticLosMixes) {
  auto c = uma();
  c.los = LinkState::probabilistic;
  c.shadow_sigma_db = 0.0;
  c.link_distance_m = 60.0;
  auto s = draw_service(c, 20000, 0.5e-3);
  Bits hi = capacity_bits(c.bandwidth_hz, median_sinr_db(c, LinkState::LOS), 0.5e-3);
  std::size_t los = 0;
  for (auto v : s) los += v == hi ? 1 : 0;
  double p = los_probability(c, 60.0);
  EXPECT_NEAR(static_cast<double>(los) / 20000.0, p, 4.0 * std::sqrt(p * (1 - p) / 20000.0));
}

TEST(Service, Reproducible) {
  auto c = uma();
  c.seed = 4;
  EXPECT_EQ(draw_service(c, 500, 0.5e-3), draw_service(c, 500, 0.5e-3));
}
