#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "martingale.hpp"

namespace mhd {

// ---- micro-interval upcrossing estimate ----

inline std::size_t count_exceedances(std::span<const double> y, double a) {
  std::size_t n = 0;
  for (double v : y) n += v > a ? 1 : 0;
  return n;
}

struct UpcrossingPartition {
  double a = 0.0;
  double delta = 0.0;
  std::size_t sb_seg = 0;
  std::vector<Interval> sub_intervals;  // [sb_l, sb_h]
};

inline UpcrossingPartition make_partition(double a, double delta, double max_y) {
  UpcrossingPartition p{a, delta, 0, {}};
  if (!(max_y > a)) return p;
  if (!(delta > 0.0)) throw ConfigError("make_partition: delta must be > 0 when max Y > a");
  p.sb_seg = static_cast<std::size_t>(std::ceil((max_y - a) / delta));
  p.sub_intervals.reserve(p.sb_seg);
  double l = a;
  for (std::size_t i = 0; i < p.sb_seg; ++i, l += delta) p.sub_intervals.push_back({l, l + delta});
  return p;
}

// mean |y_t - y_{t-1}| pooled over every path
inline double mean_abs_increment(std::span<const std::vector<double>> ys) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& y : ys)
    for (std::size_t t = 1; t < y.size(); ++t) {
      s += std::abs(y[t] - y[t - 1]);
      ++n;
    }
  return n ? s / static_cast<double>(n) : 0.0;
}

namespace detail {

// sum_i 2 E_t[(y_t - sb_l^i)^-] / delta for one path, (z)^- = max(-z, 0).
inline double path_upcrossing_bound(std::span<const double> y, double a, double delta,
                                    std::size_t* segments = nullptr) {
  if (y.empty()) return 0.0;
  double mx = *std::max_element(y.begin(), y.end());
  if (!(mx > a)) {
    if (segments) *segments = 0;
    return 0.0;
  }
  if (!(delta > 0.0)) return kInf;
  auto part = make_partition(a, delta, mx);
  if (segments) *segments = part.sb_seg;
  std::vector<double> s(y.begin(), y.end());
  std::sort(s.begin(), s.end());
  std::vector<double> prefix(s.size() + 1, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) prefix[i + 1] = prefix[i] + s[i];
  const double n = static_cast<double>(s.size());
  double total = 0.0;
  for (const auto& iv : part.sub_intervals) {
    auto k = static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), iv.lo) - s.begin());
    double neg = iv.lo * static_cast<double>(k) - prefix[k];  // sum of (sb_l - y)^+ over y < sb_l
    total += 2.0 * (neg / n) / delta;
  }
  return total;
}

}  // namespace detail

struct UpcrossingEstimate {
  double bound = 0.0;  // mean over paths of the per-path upcrossing count bound
  double delta = 0.0;
  double drift = 0.0;    // pooled mean increment
  double drift_z = 0.0;  // drift / path-level standard error
  bool drift_warning = false;
  std::size_t paths = 0;
  std::size_t paths_exceeding = 0;
  std::size_t max_segments = 0;
  double mean_rate = 0.0;  // mean over paths of bound_r / T_r
};

namespace detail {

inline std::pair<double, double> drift_and_z(std::span<const std::vector<double>> ys) {
  double s = 0.0;
  std::size_t n = 0;
  std::vector<double> per_path;
  for (const auto& y : ys) {
    if (y.size() < 2) continue;
    s += y.back() - y.front();
    n += y.size() - 1;
    per_path.push_back((y.back() - y.front()) / static_cast<double>(y.size() - 1));
  }
  if (n == 0) return {0.0, 0.0};
  double drift = s / static_cast<double>(n);
  double se = 0.0;
  if (per_path.size() >= 2) {
    se = std::sqrt(mean_var(per_path).var / static_cast<double>(per_path.size()));
  } else {
    const auto& y = ys.front();
    std::vector<double> inc(y.size() - 1);
    for (std::size_t t = 1; t < y.size(); ++t) inc[t - 1] = y[t] - y[t - 1];
    se = std::sqrt(mean_var(inc).var / static_cast<double>(inc.size()));
  }
  double z = se > 0.0 ? drift / se : (drift > 0.0 ? kInf : 0.0);
  return {drift, z};
}

}  // namespace detail

// Upcrossing estimate applied path by path with a pooled delta.
inline UpcrossingEstimate upcrossing_estimate(std::span<const std::vector<double>> ys, double a,
                                              double delta = -1.0) {
  UpcrossingEstimate e;
  e.paths = ys.size();
  e.delta = delta > 0.0 ? delta : mean_abs_increment(ys);
  std::tie(e.drift, e.drift_z) = detail::drift_and_z(ys);
  e.drift_warning = e.drift > 0.0 && e.drift_z > 3.0;
  double sum = 0.0, rate = 0.0;
  for (const auto& y : ys) {
    std::size_t seg = 0;
    double b = detail::path_upcrossing_bound(y, a, e.delta, &seg);
    if (seg > 0) ++e.paths_exceeding;
    e.max_segments = std::max(e.max_segments, seg);
    sum += b;
    if (!y.empty()) rate += b / static_cast<double>(y.size());
  }
  if (e.paths) {
    e.bound = sum / static_cast<double>(e.paths);
    e.mean_rate = rate / static_cast<double>(e.paths);
  }
  return e;
}

inline double upcrossing_bound(std::span<const std::vector<double>> ys, double a) {
  return upcrossing_estimate(ys, a).bound;
}

inline double upcrossing_bound(std::span<const double> y, double a) {
  std::vector<std::vector<double>> one{{y.begin(), y.end()}};
  return upcrossing_bound(one, a);
}

// ---- maximum occurrence rate ----

struct OccurrenceRate {
  double mr = 0.0;
  UpcrossingEstimate upcrossing;
  std::size_t samples_per_path = 0;
  double freq_nonneg = 0.0;  // pooled frequency of {Y >= 0}
};

// Y_t = sum_i Q_i(t+w) - A1(t+w) + A1(t) for every start slot of each path.
inline std::vector<double> ydelay_path(const BacklogPath& p, Slot w) {
  WindowSeries s{{&p, 1}, Series::ydelay, 0, w};
  std::vector<double> y(s.per_path(p));
  for (Slot k = 0; k < y.size(); ++k) y[k] = s.at(p, k);
  return y;
}

inline OccurrenceRate max_occurrence_rate(std::span<const BacklogPath> paths, Slot w,
                                          double unstable_z = 4.0) {
  if (paths.empty()) throw InsufficientData("max_occurrence_rate: no paths", 0);
  std::vector<std::vector<double>> ys;
  ys.reserve(paths.size());
  std::size_t nonneg = 0, total = 0;
  for (const auto& p : paths) {
    ys.push_back(ydelay_path(p, w));
    for (double v : ys.back()) nonneg += v >= 0.0 ? 1 : 0;
    total += ys.back().size();
  }
  if (total < 2) throw InsufficientData("max_occurrence_rate: paths too short for the window", total);
  OccurrenceRate r;
  r.upcrossing = upcrossing_estimate(ys, 0.0);
  if (r.upcrossing.drift > 0.0 && r.upcrossing.drift_z > unstable_z)
    throw UnstableError("max_occurrence_rate: Y^delay drifts upward (z = " +
                            std::to_string(r.upcrossing.drift_z) + "); scenario is unstable",
                        r.upcrossing.drift, r.upcrossing.drift_z);
  r.mr = r.upcrossing.mean_rate;
  r.samples_per_path = ys.front().size();
  r.freq_nonneg = static_cast<double>(nonneg) / static_cast<double>(total);
  return r;
}

// ---- stability slack and the theta program ----

// slack(theta) = w D_A1(theta) - sum_i w D_Qi(theta) - sum_i Q_i(t)
class StabilitySlack {
 public:
  StabilitySlack(std::span<const BacklogPath> paths, Slot w, double backlog_at_t)
      : w_(w), backlog_(backlog_at_t), arrivals_(WindowSeries{paths, Series::arrivals, 0, w}) {
    const std::size_t hops = paths.empty() ? 0 : paths.front().hops;
    for (std::size_t h = 0; h < hops; ++h)
      hops_.emplace_back(WindowSeries{paths, Series::hop_backlog, h, w});
  }

  double scaled_rate(const SeriesMgf& m, double theta) const {
    return static_cast<double>(w_) * m.rate(theta).value;
  }

  double slack(double theta) const {
    double s = scaled_rate(arrivals_, theta) - backlog_;
    for (const auto& h : hops_) s -= scaled_rate(h, theta);
    return s;
  }
  double operator()(double theta) const { return slack(theta); }

  Slot window() const { return w_; }
  double backlog() const { return backlog_; }

 private:
  Slot w_;
  double backlog_;
  SeriesMgf arrivals_;
  std::vector<SeriesMgf> hops_;
};

struct SolverOptions {
  double theta_min = 1e-8;
  double theta_max = 10.0;
  double rel_tol = 1e-6;
  bool use_cap = true;
  bool verify_interval = true;
};

struct ThetaSolution {
  double theta = 0.0;
  double mr = 0.0;
  double theta_cap = 0.0;  // NaN when undefined
  bool capped = false;     // the cap narrowed the bracket
  std::string fallback;    // why the cap was not used, empty otherwise
  std::size_t iterations = 0;
  Interval bracket_initial;
  Interval bracket_final;
  double wall_time = 0.0;
  double slack = 0.0;
  bool interval_verified = true;
};

struct InfeasibleError : std::runtime_error {
  std::vector<std::pair<double, double>> slack_profile;  // (theta, slack)
  InfeasibleError(const std::string& what, std::vector<std::pair<double, double>> prof)
      : std::runtime_error(what), slack_profile(std::move(prof)) {}
};

// theta cap = ln(mr) / (E[X_msb] + sum Q(t)); NaN when not a positive finite number.
inline double theta_cap(double mr, double mean_xmsb, double backlog_at_t) {
  double den = mean_xmsb + backlog_at_t;
  if (!(mr > 0.0) || !(mr < 1.0) || !(den < 0.0)) return std::nan("");
  return std::log(mr) / den;
}

template <class Slack>
ThetaSolution solve_theta(const Slack& slack, double mr, double mean_xmsb, double backlog_at_t,
                          const SolverOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  ThetaSolution sol;
  sol.mr = mr;
  sol.theta_cap = theta_cap(mr, mean_xmsb, backlog_at_t);
  double lo = opt.theta_min, hi = opt.theta_max;
  if (opt.use_cap) {
    double cap = sol.theta_cap;
    if (!(mr > 0.0)) sol.fallback = "mr is zero";
    else if (!(mr < 1.0)) sol.fallback = "mr >= 1";
    else if (!(mean_xmsb + backlog_at_t < 0.0)) sol.fallback = "E[X_msb] + backlog >= 0";
    else if (!(cap > opt.theta_min)) sol.fallback = "cap below theta_min";
    else if (cap >= opt.theta_max) sol.fallback = "cap above theta_max";
    else {
      hi = cap;
      sol.capped = true;
    }
  }
  sol.bracket_initial = {lo, hi};

  auto feasible = [&](double th) {
    ++sol.iterations;
    return slack(th) >= 0.0;
  };

  if (feasible(hi)) {
    lo = hi;
  } else {
    if (!feasible(lo)) {
      std::vector<std::pair<double, double>> prof;
      for (int k = 0; k <= 20; ++k) {
        double th = opt.theta_min * std::pow(opt.theta_max / opt.theta_min, k / 20.0);
        prof.emplace_back(th, slack(th));
      }
      throw InfeasibleError("solve_theta: stability slack negative at theta_min", std::move(prof));
    }
    while (hi - lo > opt.rel_tol * hi) {
      double mid = 0.5 * (lo + hi);
      if (feasible(mid)) lo = mid;
      else hi = mid;
    }
  }
  sol.theta = lo;
  sol.bracket_final = {lo, hi};
  sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  sol.slack = slack(lo);
  if (opt.verify_interval) {
    for (int k = 0; k < 16 && sol.interval_verified; ++k) {
      double th = opt.theta_min * std::pow(lo / opt.theta_min, k / 15.0);
      if (slack(th) < 0.0) sol.interval_verified = false;
    }
  }
  return sol;
}

}  // namespace mhd
