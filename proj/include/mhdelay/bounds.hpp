#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "core.hpp"
#include "martingale.hpp"

namespace mhd {

struct XmsbEstimate {
  double theta = 0.0;
  Slot window = 0;
  double log_moment = 0.0;     // ln E[exp(theta X_msb)]
  double log_moment_se = 0.0;  // block bootstrap, block = window
  double mean_xmsb = 0.0;
  std::size_t sample_count = 0;
};

inline constexpr std::size_t kMinWindows = 100;

namespace detail {

// SD of the bootstrap distribution of ln(mean exp(c v)), resampling
// non-overlapping blocks of `block` consecutive windows within each path.
inline double block_bootstrap_se(const WindowSeries& s, double c, double shift, Slot block,
                                 std::size_t reps = 200, std::uint64_t seed = 0x5eedULL) {
  std::vector<double> sums;
  std::vector<double> counts;
  for (const auto& p : s.paths) {
    const std::size_t m = s.per_path(p);
    for (Slot k0 = 0; k0 < m; k0 += block) {
      double sum = 0.0;
      Slot k1 = std::min<Slot>(m, k0 + block);
      for (Slot k = k0; k < k1; ++k) sum += std::exp(c * s.at(p, k) - shift);
      sums.push_back(sum);
      counts.push_back(static_cast<double>(k1 - k0));
    }
  }
  if (sums.size() < 2) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sums.size() - 1);
  std::vector<double> est(reps);
  for (auto& e : est) {
    double sum = 0.0, cnt = 0.0;
    for (std::size_t j = 0; j < sums.size(); ++j) {
      auto i = pick(rng);
      sum += sums[i];
      cnt += counts[i];
    }
    e = sum > 0.0 ? std::log(sum / cnt) : -kInf;
  }
  auto mv = mean_var(est);
  return std::isfinite(mv.var) ? std::sqrt(mv.var) : kInf;
}

}  // namespace detail

// X_msb = sum_i (Q_i(t+w) - Q_i(t)) - A1(t+w) + A1(t), pooled over every start slot.
inline XmsbEstimate estimate_xmsb(std::span<const BacklogPath> paths, double theta, Slot w,
                                  bool with_se = true) {
  if (!(theta > 0.0)) throw ConfigError("estimate_xmsb: theta must be > 0");
  if (w < 1) throw ConfigError("estimate_xmsb: window must be >= 1");
  SeriesMgf mgf(WindowSeries{paths, Series::xmsb, 0, w});
  if (mgf.count() < kMinWindows)
    throw InsufficientData("estimate_xmsb: fewer than 100 windows", mgf.count());
  XmsbEstimate e;
  e.theta = theta;
  e.window = w;
  e.sample_count = mgf.count();
  e.mean_xmsb = mgf.mean();
  e.log_moment = mgf.log_mgf(theta);
  if (with_se) e.log_moment_se = detail::block_bootstrap_se(mgf.series(), theta, theta * mgf.max(), w);
  return e;
}

enum class BacklogMode { per_realization, mean };

inline const char* to_string(BacklogMode m) {
  return m == BacklogMode::mean ? "mean" : "per_realization";
}

struct DupbResult {
  double theta = 0.0;
  Slot window = 0;
  double total_backlog_at_t = 0.0;  // effective backlog, see dupb()
  double log_bound = 0.0;
  double raw_bound = 0.0;
  double bound = 0.0;  // min(raw_bound, 1)
  XmsbEstimate xmsb;
  BacklogMode mode = BacklogMode::mean;
  // solver diagnostics, filled by the caller
  std::size_t iterations = 0;
  Interval bracket;
  double wall_time = 0.0;
};

inline DupbResult dupb(const XmsbEstimate& x, double total_backlog_at_t,
                       BacklogMode mode = BacklogMode::mean) {
  DupbResult r;
  r.theta = x.theta;
  r.window = x.window;
  r.xmsb = x;
  r.mode = mode;
  r.total_backlog_at_t = total_backlog_at_t;
  r.log_bound = x.log_moment + x.theta * total_backlog_at_t;
  r.raw_bound = std::exp(r.log_bound);
  r.bound = std::min(1.0, r.raw_bound);
  return r;
}

// Backlog term from observed per-realization totals at t. per_realization uses
// mean_r exp(theta Q_r), folded into an effective backlog (1/theta) ln mean_r exp(theta Q_r).
inline double effective_backlog(std::span<const double> backlog, double theta, BacklogMode mode) {
  if (backlog.empty()) throw InsufficientData("dupb: no backlog samples", 0);
  if (mode == BacklogMode::mean) return mean_var(backlog).mean;
  std::vector<double> z(backlog.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = theta * backlog[i];
  return log_mean_exp(z) / theta;
}

inline DupbResult dupb(const XmsbEstimate& x, std::span<const double> backlog, BacklogMode mode) {
  return dupb(x, effective_backlog(backlog, x.theta, mode), mode);
}

inline DupbResult dupb(std::span<const BacklogPath> paths, double theta, Slot w,
                       double total_backlog_at_t) {
  return dupb(estimate_xmsb(paths, theta, w), total_backlog_at_t, BacklogMode::mean);
}

inline double rmse(std::span<const double> deviations) {
  if (deviations.empty()) return 0.0;
  double s = 0.0;
  for (double d : deviations) s += d * d;
  return std::sqrt(s / static_cast<double>(deviations.size()));
}

}  // namespace mhd
