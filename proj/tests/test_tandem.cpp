#include <gtest/gtest.h>

#include <random>

#include "mhdelay/selftest.hpp"
#include "mhdelay/tandem.hpp"
#include "oracles.hpp"

using namespace mhd;

TEST(Tandem, SingleHopHandExample) {
  std::vector<Bits> a{3, 1, 4};
  std::vector<std::vector<Bits>> s{{2, 2, 2}};
  auto tr = simulate(1, a, s);
  const auto& h = tr.per_hop[0];
  EXPECT_EQ((std::vector<Bits>{h.Q[1], h.Q[2], h.Q[3]}), (std::vector<Bits>{1, 0, 2}));
  EXPECT_EQ((std::vector<Bits>{h.Astar[1], h.Astar[2], h.Astar[3]}), (std::vector<Bits>{2, 4, 6}));
}

TEST(Tandem, DelayHandExample) {
  std::vector<Bits> a{5, 0, 0};
  std::vector<std::vector<Bits>> s{{2, 2, 2}};
  auto tr = simulate(1, a, s);
  EXPECT_EQ(tr.per_hop[0].Q[1], 3);
  auto d = delay(tr, 1);
  EXPECT_FALSE(d.censored);
  EXPECT_EQ(d.value, 2u);
}

TEST(Tandem, EmptySystem) {
  std::vector<Bits> a(20, 0);
  std::vector<std::vector<Bits>> s(3, std::vector<Bits>(20, 4));
  auto tr = simulate(3, a, s);
  for (Slot t = 0; t <= 20; ++t) {
    EXPECT_EQ(tr.total_backlog(t), 0);
    EXPECT_EQ(delay(tr, t).value, 0u);
  }
}

TEST(Tandem, ShapeErrors) {
  std::vector<Bits> a(5, 1);
  std::vector<std::vector<Bits>> s(2, std::vector<Bits>(4, 1));
  EXPECT_THROW(simulate(2, a, s), ShapeError);
  std::vector<std::vector<Bits>> s1(1, std::vector<Bits>(5, 1));
  EXPECT_THROW(simulate(2, a, s1), ShapeError);
  EXPECT_THROW(simulate(0, a, {}), ShapeError);
  auto tr = simulate(1, a, s1);
  EXPECT_THROW(delay(tr, 6), RangeError);
}

TEST(Tandem, MinPlusOracleTwoHop) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    auto in = oracle::random_instance(rng, 2, 50);
    in.hops = 2;
    in.services.resize(2, in.services.front());
    auto tr = simulate(2, in.arrivals, in.services);
    auto D = oracle::tandem_departures(in.arrivals, in.services);
    for (std::size_t h = 0; h < 2; ++h) EXPECT_EQ(tr.per_hop[h].Astar, D[h]);
  }
}

TEST(Tandem, IdentitiesEverySlot) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    auto in = oracle::random_instance(rng);
    auto tr = simulate(in.hops, in.arrivals, in.services);
    for (Slot t = 1; t <= tr.horizon(); ++t) {
      Bits sum = 0;
      for (std::size_t h = 0; h < in.hops; ++h) {
        const auto& x = tr.per_hop[h];
        EXPECT_EQ(x.Astar[t], x.A[t] - x.Q[t]);
        EXPECT_GE(x.Q[t], 0);
        EXPECT_LE(x.departures(t), x.s[t]);
        if (h + 1 < in.hops) {
          EXPECT_EQ(tr.per_hop[h + 1].a[t], x.departures(t));
        }
        sum += x.Q[t];
      }
      // concatenation: everything that entered hop 1 is queued somewhere or has left the last hop
      EXPECT_EQ(tr.A1(t), sum + tr.final_departures()[t]);
    }
  }
}

TEST(Tandem, DelayDefinitionsAgree) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    auto in = oracle::random_instance(rng, 4, 30);
    auto tr = simulate(in.hops, in.arrivals, in.services);
    auto D = oracle::tandem_departures(in.arrivals, in.services);
    auto A1 = oracle::cumulative(in.arrivals);
    for (Slot t = 0; t <= tr.horizon(); ++t) {
      auto ref = oracle::virtual_delay(A1, D.back(), t);
      auto got = delay(tr, t);
      EXPECT_EQ(got.censored, ref.censored);
      EXPECT_EQ(got.value, ref.value);
    }
  }
}

TEST(Tandem, BacklogPathMatchesFullTrace) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    auto in = oracle::random_instance(rng);
    auto tr = simulate(in.hops, in.arrivals, in.services);
    auto lean = simulate_backlog(in.hops, in.arrivals, in.services);
    auto full = to_backlog_path(tr);
    EXPECT_EQ(lean.A1, full.A1);
    EXPECT_EQ(lean.Q, full.Q);
    EXPECT_EQ(lean.total, full.total);
    for (Slot t = 0; t <= tr.horizon(); ++t) EXPECT_EQ(delay(lean, t).value, delay(tr, t).value);
  }
}

TEST(Tandem, AppendingArrivalsNeverShortensDelay) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    auto in = oracle::random_instance(rng, 3, 30);
    auto base = simulate(in.hops, in.arrivals, in.services);
    auto more = in;
    std::uniform_int_distribution<std::size_t> pick(0, in.arrivals.size() - 1);
    more.arrivals[pick(rng)] += 5;
    auto tr = simulate(more.hops, more.arrivals, more.services);
    for (Slot t = 0; t <= base.horizon(); ++t) {
      auto d0 = delay(base, t), d1 = delay(tr, t);
      if (!d0.censored) {
        EXPECT_TRUE(d1.censored || d1.value >= d0.value);
      }
    }
  }
}

TEST(Unreliability, Basics) {
  std::vector<Delay> zero(10, Delay{0, false});
  std::vector<Slot> grid{0, 1, 5};
  auto p = delay_unreliability(zero, grid);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  std::vector<Delay> mixed{{0, false}, {3, false}, {2, true}, {7, false}};
  auto q = delay_unreliability(mixed, grid);
  EXPECT_DOUBLE_EQ(q[1], 0.75);
  EXPECT_DOUBLE_EQ(q[2], 0.5);  // censored counts as exceeding
  EXPECT_THROW(delay_unreliability(std::vector<Delay>{}, grid), ShapeError);
}

// 10^3 realizations against a 10^6-realization ground truth of a small queue.
TEST(Unreliability, AgreesAcrossSampleSizes) {
  auto sample = [](std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::poisson_distribution<int> a(1.0);
    std::uniform_int_distribution<int> s(0, 3);
    std::vector<Delay> d(n);
    for (auto& x : d) {
      std::vector<Bits> arr(40);
      std::vector<std::vector<Bits>> sv(2, std::vector<Bits>(40));
      for (auto& v : arr) v = a(rng);
      for (auto& h : sv)
        for (auto& v : h) v = s(rng);
      x = delay(simulate_backlog(2, arr, sv), 20);
    }
    return d;
  };
  std::vector<Slot> grid{1, 2, 4};
  auto truth = delay_unreliability(sample(1, 1000000), grid);
  auto small = delay_unreliability(sample(2, 1000), grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    auto k = static_cast<std::size_t>(std::lround(small[j] * 1000));
    auto ci = wilson(k, 1000);
    EXPECT_GE(truth[j], ci.lo);
    EXPECT_LE(truth[j], ci.hi);
  }
  for (std::size_t j = 1; j < grid.size(); ++j) EXPECT_LE(truth[j], truth[j - 1]);
}

TEST(BusyPeriod, IncrementsUncorrelated) {
  auto run = selftest::long_busy_period(77, 100000);
  ASSERT_GE(run.q.size(), 100000u);
  for (std::size_t k = 1; k <= 10; ++k) {
    auto ac = oracle::autocovariance(run.q, k);
    EXPECT_LT(std::abs(ac.value), 3.0 * ac.se) << "lag " << k;
  }
}

TEST(BusyPeriod, MomentsMatchInputs) {
  auto run = selftest::long_busy_period(78, 100000);
  auto q = mean_var(run.q);
  const auto& c = run.channel;
  double sinr = median_sinr_db(c, LinkState::LOS);
  double es = oracle::mean_capacity_bits(c.bandwidth_hz, sinr, c.shadow_sigma_db, run.slot_seconds);
  double es2 = oracle::capacity_second_moment(c.bandwidth_hz, sinr, c.shadow_sigma_db, run.slot_seconds);
  double ea = run.traffic.mean_rate_bits_per_slot;
  double va = run.traffic.request_rate * run.traffic.mean_burst_bits * run.traffic.mean_burst_bits;
  EXPECT_NEAR(q.mean / (ea - es), 1.0, 0.02);
  EXPECT_NEAR(q.var / (va + es2 - es * es), 1.0, 0.02);
}
