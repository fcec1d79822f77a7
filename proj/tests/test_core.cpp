#include <gtest/gtest.h>

#include <vector>

#include "mhdelay/core.hpp"

using namespace mhd;

TEST(Db, RoundTrip) {
  for (double x : {-30.0, 0.0, 3.0, 17.5}) EXPECT_NEAR(db::from_linear(db::to_linear(x)), x, 1e-12);
  EXPECT_NEAR(db::to_linear(10.0), 10.0, 1e-12);
  EXPECT_NEAR(db::dbm_to_mw(30.0), 1000.0, 1e-9);
  EXPECT_NEAR(db::mw_to_dbm(1.0), 0.0, 1e-12);
}

TEST(Db, NoiseAndPowerSum) {
  // -174 dBm/Hz over 1 MHz
  EXPECT_NEAR(db::noise_dbm(-174.0, 1e6), -114.0, 1e-9);
  std::vector<double> p{0.0, 0.0};
  EXPECT_NEAR(db::sum_mw(p), 2.0, 1e-12);
}

TEST(LogMeanExp, StableForHugeArguments) {
  std::vector<double> v{1000.0, 1000.0 + std::log(3.0)};
  EXPECT_NEAR(log_mean_exp(v), 1000.0 + std::log(2.0), 1e-9);
  EXPECT_EQ(log_mean_exp(std::vector<double>{}), -kInf);
}

TEST(ShiftedExpSum, MatchesLogMeanExp) {
  std::vector<double> v{-3.0, 0.5, 2.0, 2.0};
  ShiftedExpSum s{2.0};
  for (double x : v) s.add(x);
  EXPECT_NEAR(s.log_mean(), log_mean_exp(v), 1e-12);
}

TEST(Seeds, DeterministicAndTagged) {
  EXPECT_EQ(derive_seed(7, 3, "traffic"), derive_seed(7, 3, "traffic"));
  EXPECT_NE(derive_seed(7, 3, "traffic"), derive_seed(7, 3, "channel"));
  EXPECT_NE(derive_seed(7, 3, "channel", 0), derive_seed(7, 3, "channel", 1));
  EXPECT_NE(derive_seed(7, 3, "traffic"), derive_seed(7, 4, "traffic"));
  EXPECT_NE(derive_seed(7, 3, "traffic"), derive_seed(8, 3, "traffic"));
}

TEST(Stats, MeanVarUnbiased) {
  auto mv = mean_var(std::vector<int>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(mv.mean, 2.5);
  EXPECT_NEAR(mv.var, 5.0 / 3.0, 1e-12);
  EXPECT_EQ(mv.n, 4u);
}

TEST(Stats, WilsonInterval) {
  // frozen: k=0, n=100 at z=2.5758 -> hi = z^2/(n+z^2)
  auto iv = wilson(0, 100);
  const double z2 = 2.5758293035489004 * 2.5758293035489004;
  EXPECT_DOUBLE_EQ(iv.lo, 0.0);
  EXPECT_NEAR(iv.hi, z2 / (100.0 + z2), 1e-12);
  auto mid = wilson(50, 100);
  EXPECT_NEAR(0.5 - mid.lo, mid.hi - 0.5, 1e-12);
  EXPECT_LT(mid.lo, 0.5);
}

TEST(Stats, QuantileSorted) {
  std::vector<double> s{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 1.0), 5.0);
}
