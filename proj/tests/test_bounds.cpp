#include <gtest/gtest.h>

#include "mhdelay/bounds.hpp"
#include "mhdelay/montecarlo.hpp"

using namespace mhd;

namespace {

// constant arrivals r per slot, empty queues
BacklogPath steady(Slot len, Bits r, std::size_t hops = 2) {
  BacklogPath p;
  p.hops = hops;
  p.A1.resize(len);
  for (Slot k = 0; k < len; ++k) p.A1[k] = r * static_cast<Bits>(k);
  p.Q.assign(hops * len, 0);
  p.total.assign(len, 0);
  return p;
}

std::vector<BacklogPath> tandem_paths(std::size_t n, std::uint64_t seed, std::size_t from = 0) {
  Scenario s;
  s.hops = 2;
  s.traffic = TrafficConfig::from_rate(8000.0, 1.0);
  auto c = ChannelConfig::defaults_for(ChannelModel::UMa);
  c.bandwidth_hz = 2.0e6;
  s.channels.assign(2, c);
  s.horizon = 600;
  s.master_seed = seed;
  std::vector<BacklogPath> out;
  for (std::size_t r = from; r < from + n; ++r) out.push_back(slice(realization_backlog(s, r), 200, 600));
  return out;
}

}  // namespace

TEST(Xmsb, DeterministicArrivals) {
  std::vector<BacklogPath> ps{steady(300, 40)};
  for (Slot w : {1u, 10u, 50u})
    for (double th : {1e-4, 0.01, 0.3}) {
      auto x = estimate_xmsb(ps, th, w);
      EXPECT_NEAR(x.log_moment, -th * 40.0 * static_cast<double>(w), 1e-9 * th * 40.0 * w);
      EXPECT_DOUBLE_EQ(x.mean_xmsb, -40.0 * static_cast<double>(w));
      EXPECT_EQ(x.sample_count, 300u - w);
      EXPECT_NEAR(x.log_moment_se, 0.0, 1e-12);
    }
}

TEST(Xmsb, SmallThetaVanishes) {
  auto ps = tandem_paths(5, 3);
  auto x = estimate_xmsb(ps, 1e-12, 16, false);
  EXPECT_NEAR(x.log_moment, 1e-12 * x.mean_xmsb, 1e-14);
  auto d = dupb(x, 0.0);
  EXPECT_NEAR(d.bound, 1.0, 1e-6);
}

TEST(Xmsb, Errors) {
  std::vector<BacklogPath> ps{steady(50, 1)};
  EXPECT_THROW(estimate_xmsb(ps, 0.0, 5), ConfigError);
  EXPECT_THROW(estimate_xmsb(ps, 0.1, 0), ConfigError);
  EXPECT_THROW(estimate_xmsb(ps, 0.1, 5), InsufficientData);
}

// two disjoint halves of the realizations agree within the bootstrap error
TEST(Xmsb, SplitSampleConsistent) {
  const double th = 1e-6;  // 1e-3 per kbit
  auto a = estimate_xmsb(tandem_paths(100, 9, 0), th, 16);
  auto b = estimate_xmsb(tandem_paths(100, 9, 100), th, 16);
  EXPECT_GT(a.log_moment_se, 0.0);
  double tol = 4.0 * std::hypot(a.log_moment_se, b.log_moment_se);
  EXPECT_NEAR(a.log_moment, b.log_moment, tol);
}

TEST(Dupb, ClosedForm) {
  XmsbEstimate x;
  x.theta = 0.01;
  x.window = 8;
  x.log_moment = -5.0;
  auto d = dupb(x, 100.0);
  EXPECT_NEAR(d.log_bound, -4.0, 1e-12);
  EXPECT_NEAR(d.bound, std::exp(-4.0), 1e-15);
  EXPECT_DOUBLE_EQ(dupb(x, 1000.0).bound, 1.0);
  EXPECT_GT(dupb(x, 1000.0).raw_bound, 1.0);
}

TEST(Dupb, PerRealizationAtLeastMean) {
  std::vector<double> q{0, 0, 500, 12000, 3000, 0, 80};
  for (double th : {1e-6, 1e-4, 1e-3}) {
    double m = effective_backlog(q, th, BacklogMode::mean);
    double p = effective_backlog(q, th, BacklogMode::per_realization);
    EXPECT_GE(p, m - 1e-9);
    EXPECT_LE(p, 12000.0 + 1e-9);
  }
  std::vector<double> same(5, 700.0);
  EXPECT_NEAR(effective_backlog(same, 0.01, BacklogMode::per_realization), 700.0, 1e-9);
  EXPECT_THROW(effective_backlog(std::vector<double>{}, 0.1, BacklogMode::mean), InsufficientData);
}

TEST(Dupb, Rmse) {
  std::vector<double> d{3.0, -4.0};
  EXPECT_NEAR(rmse(d), std::sqrt(12.5), 1e-15);
  EXPECT_EQ(rmse(std::vector<double>{}), 0.0);
}
