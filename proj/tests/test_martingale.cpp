#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mhdelay/montecarlo.hpp"
#include "mhdelay/selftest.hpp"
#include "oracles.hpp"

using namespace mhd;

TEST(EstimateRate, ConstantProcess) {
  std::vector<double> x(200, 3.5);
  for (double th : {1e-3, 0.5, 4.0})
    for (Slot wb : {1u, 7u, 50u}) EXPECT_NEAR(estimate_rate(x, th, wb).value, 3.5, 1e-12);
}

TEST(EstimateRate, SmallThetaIsTheMean) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(0.25);
  std::vector<double> x(10000);
  for (auto& v : x) v = e(rng);
  double m = mean_var(x).mean;
  EXPECT_NEAR(estimate_rate(x, 1e-6, 1).value / m, 1.0, 1e-3);
}

TEST(EstimateRate, TwoPointClosedForm) {
  std::vector<double> x;
  for (int i = 0; i < 5000; ++i) x.insert(x.end(), {0.0, 2.0});
  EXPECT_NEAR(estimate_rate(x, 1.0, 1).value, std::log((1.0 + std::exp(2.0)) / 2.0), 1e-12);
  EXPECT_NEAR(estimate_rate(x, 1.0, 1).value, 1.4338, 1e-4);
}

TEST(EstimateRate, MatchesWindowOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(-1.0, 3.0);
  std::vector<double> x(3000);
  for (auto& v : x) v = g(rng);
  for (Slot wb : {1u, 5u, 40u})
    for (double th : {0.01, 0.3, 2.0})
      EXPECT_NEAR(estimate_rate(x, th, wb).value * th, oracle::window_log_mgf(x, th, wb), 1e-9);
}

TEST(EstimateRate, Errors) {
  std::vector<double> x(5, 1.0);
  EXPECT_THROW(estimate_rate(x, 0.0, 1), ConfigError);
  EXPECT_THROW(estimate_rate(x, 1.0, 0), ConfigError);
  EXPECT_THROW(estimate_rate(x, 1.0, 5), InsufficientData);
}

namespace {

std::vector<BacklogPath> small_paths(std::size_t hops, std::size_t n, double bandwidth = 2.0e6) {
  Scenario s;
  s.hops = hops;
  s.traffic = TrafficConfig::from_rate(8000.0, 1.0);
  auto c = ChannelConfig::defaults_for(ChannelModel::UMa);
  c.bandwidth_hz = bandwidth;
  s.channels.assign(hops, c);
  s.horizon = 600;
  s.master_seed = 17;
  std::vector<BacklogPath> out;
  for (std::size_t r = 0; r < n; ++r) out.push_back(slice(realization_backlog(s, r), 200, 600));
  return out;
}

}  // namespace

// The table-compressed estimator against the plain sliding-window estimator.
TEST(SeriesMgf, AgreesWithEstimateRate) {
  auto paths = small_paths(2, 1);
  const auto& p = paths[0];
  std::vector<double> inc(p.len() - 1);
  for (Slot k = 1; k < p.len(); ++k) inc[k - 1] = static_cast<double>(p.A1[k] - p.A1[k - 1]);
  for (Slot w : {1u, 10u, 30u}) {
    SeriesMgf m(WindowSeries{paths, Series::arrivals, 0, w});
    EXPECT_EQ(m.count(), p.len() - w);
    for (double th : {1e-6, 1e-4, 1e-3})
      EXPECT_NEAR(m.rate(th).value, estimate_rate(inc, th, w).value, 1e-6 * 8000.0);
  }
}

TEST(SeriesMgf, ThetaTimesDConvexAndDMonotone) {
  auto paths = small_paths(3, 5);
  for (auto kind : {Series::arrivals, Series::hop_backlog}) {
    SeriesMgf m(WindowSeries{paths, kind, 1, 12});
    std::vector<double> th, f, d;
    for (int i = 0; i < 20; ++i) th.push_back(1e-5 * (i + 1));
    for (double t : th) {
      d.push_back(m.rate(t).value);
      f.push_back(t * d.back());
    }
    for (int i = 1; i + 1 < 20; ++i) EXPECT_GE(f[i + 1] - 2 * f[i] + f[i - 1], -1e-9 * std::abs(f[i]));
    for (int i = 1; i < 20; ++i) EXPECT_GE(d[i], d[i - 1] - 1e-9 * std::abs(d[i]));
  }
}

TEST(SeriesMgf, FiniteOverSolverBracket) {
  auto paths = small_paths(4, 3);
  SolverOptions so;
  for (auto kind : {Series::arrivals, Series::hop_backlog, Series::xmsb})
    for (std::size_t h = 0; h < 4; ++h) {
      SeriesMgf m(WindowSeries{paths, kind, h, 19});
      for (int k = 0; k <= 40; ++k) {
        double th = so.theta_min * std::pow(so.theta_max / so.theta_min, k / 40.0);
        EXPECT_TRUE(std::isfinite(m.rate(th).value)) << th;
      }
    }
}

TEST(BacklogMartingale, NoBusyPeriod) {
  std::vector<Bits> a(50, 5);
  std::vector<std::vector<Bits>> s{std::vector<Bits>(50, 5)};
  auto tr = simulate(1, a, s);
  EXPECT_THROW(backlog_martingale(tr.per_hop[0], 0.1), InsufficientData);
}

TEST(BacklogMartingale, ProductFormIdentity) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> q(400);
  for (auto& v : q) v = coin(rng) ? 1.0 : -2.0;
  auto m = backlog_martingale_from(q, 0.3);
  for (Slot t : {1u, 10u, 200u, 400u})
    EXPECT_NEAR(m.product_form(t) / backlog_closed_form(m, t), 1.0, 1e-9);
}

TEST(BacklogMartingale, OnSimulatedQueue) {
  auto c = selftest::reference_channel(9);
  auto a = generate_arrivals(selftest::reference_traffic(8), 20000);
  std::vector<std::vector<Bits>> s{draw_service(c, 20000, 0.5e-3)};
  auto tr = simulate(1, a, s);
  auto m = backlog_martingale(tr.per_hop[0], 1e-5);
  EXPECT_GT(m.process().size(), 100u);
  EXPECT_NEAR(m.product_form(50) / backlog_closed_form(m, 50), 1.0, 1e-9);
}

// theta per kbit, as in the selftest
TEST(UnitMean, WithinThreeSigma) {
  const double thetas[] = {1e-4, 1e-3, 1e-2, 1e-1};
  for (const auto& c : selftest::unit_mean_suite(thetas, 20000, 21)) {
    EXPECT_TRUE(c.pass) << c.process << " theta=" << c.theta_per_kbit << " mean=" << c.um.mean
                        << " se=" << c.um.se;
    EXPECT_EQ(c.um.n, 20000u);
  }
}

TEST(SlidingBlock, ConstantIncrementIsOne) {
  std::vector<double> x(100);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.5 * static_cast<double>(i);
  auto m = sliding_block_martingale(x, 0.7, 9);
  for (Slot t = 0; t <= m.last_start(); ++t) EXPECT_NEAR(m.value(t), 1.0, 1e-9);
  EXPECT_THROW(m.value(m.last_start() + 1), RangeError);
}

// E[M(t+1) / M(t) | M(t)] = 1 within each decile of M(t), i.i.d. increments.
TEST(SlidingBlock, ConditionalMeanRatio) {
  const double theta = 0.2;
  std::mt19937_64 rng(4);
  std::poisson_distribution<int> pois(1.0);
  std::vector<double> big(1000000);
  for (auto& v : big) v = pois(rng);
  auto rate = estimate_rate(big, theta, 1);
  const Slot t = 10;
  std::vector<std::pair<double, double>> mm;
  for (int p = 0; p < 10000; ++p) {
    std::vector<double> x(t + 2, 0.0);
    for (Slot j = 1; j < x.size(); ++j) x[j] = x[j - 1] + pois(rng);
    MartingaleView v(x, theta, 1, rate);
    mm.emplace_back(v.product_form(t), v.product_form(t + 1) / v.product_form(t));
  }
  std::stable_sort(mm.begin(), mm.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (int b = 0; b < 10; ++b) {
    std::vector<double> r;
    for (int i = b * 1000; i < (b + 1) * 1000; ++i) r.push_back(mm[i].second);
    auto mv = mean_var(r);
    EXPECT_NEAR(mv.mean, 1.0, 4.0 * std::sqrt(mv.var / 1000.0)) << "decile " << b;
  }
}

TEST(SlidingBlock, FinitePositiveOnTandem) {
  Scenario s;
  s.hops = 3;
  s.traffic = TrafficConfig::from_rate(8000.0, 1.0);
  auto c = ChannelConfig::defaults_for(ChannelModel::UMa);
  c.bandwidth_hz = 2.0e6;
  s.channels.assign(3, c);
  s.horizon = 2000;
  auto tr = realization_trace(s, 0);
  auto as_d = [](const std::vector<Bits>& v) { return std::vector<double>(v.begin(), v.end()); };
  std::vector<std::vector<double>> procs{as_d(tr.per_hop[0].A)};
  for (const auto& h : tr.per_hop) procs.push_back(as_d(h.Q));
  for (const auto& x : procs) {
    auto m = sliding_block_martingale(x, 1e-5, 20);
    for (Slot t = 1; t < m.last_start(); ++t) {
      double v = m.value(t);
      EXPECT_TRUE(std::isfinite(v) && v > 0.0);
    }
  }
}
