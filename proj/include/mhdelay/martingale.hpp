#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "tandem.hpp"

namespace mhd {

struct RateFunction {
  double theta = 0.0;
  double value = 0.0;  // D_X(theta), bits/slot
  Slot window_wb = 1;
  std::size_t sample_count = 0;
};

// ---- window series over backlog paths ----

enum class Series { arrivals, hop_backlog, total_backlog, xmsb, ydelay };

// Windowed differences of one process, one window per start slot t with
// t + w inside the path.
struct WindowSeries {
  std::span<const BacklogPath> paths;
  Series kind = Series::arrivals;
  std::size_t hop = 0;
  Slot w = 1;

  Bits value(const BacklogPath& p, Slot k) const {
    const Slot n = p.len();
    switch (kind) {
      case Series::arrivals:
        return p.A1[k + w] - p.A1[k];
      case Series::hop_backlog:
        return p.Q[hop * n + k + w] - p.Q[hop * n + k];
      case Series::total_backlog:
        return p.total[k + w] - p.total[k];
      case Series::xmsb:
        return (p.total[k + w] - p.total[k]) - (p.A1[k + w] - p.A1[k]);
      case Series::ydelay:
        return p.total[k + w] - (p.A1[k + w] - p.A1[k]);
    }
    return 0;
  }
  double at(const BacklogPath& p, Slot k) const { return static_cast<double>(value(p, k)); }

  std::size_t per_path(const BacklogPath& p) const { return p.len() > w ? p.len() - w : 0; }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& p : paths) {
      const std::size_t m = per_path(p);
      for (Slot k = 0; k < m; ++k) f(value(p, k));
    }
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& p : paths) n += per_path(p);
    return n;
  }
};

// ln E[exp(c * v)] for c > 0 over a window series. Window values are integers
// with heavy repetition, so they are held as a sorted (value, count) table.
class SeriesMgf {
 public:
  explicit SeriesMgf(WindowSeries s) : s_(s) {
    Bits lo = std::numeric_limits<Bits>::max(), hi = std::numeric_limits<Bits>::min();
    long double sum = 0.0L;
    s_.for_each([&](Bits v) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += static_cast<long double>(v);
    });
    n_ = s_.count();
    if (n_ == 0) return;
    max_ = static_cast<double>(hi);
    mean_ = static_cast<double>(sum / static_cast<long double>(n_));
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range <= std::max<std::uint64_t>(1u << 22, 2 * n_)) {
      std::vector<std::uint32_t> hist(range, 0);
      s_.for_each([&](Bits v) { ++hist[static_cast<std::size_t>(v - lo)]; });
      for (std::size_t i = 0; i < range; ++i)
        if (hist[i]) {
          values_.push_back(static_cast<double>(lo + static_cast<Bits>(i)));
          counts_.push_back(hist[i]);
        }
    } else {
      std::vector<Bits> all;
      all.reserve(n_);
      s_.for_each([&](Bits v) { all.push_back(v); });
      std::sort(all.begin(), all.end());
      for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        values_.push_back(static_cast<double>(all[i]));
        counts_.push_back(static_cast<std::uint32_t>(j - i));
        i = j;
      }
    }
  }

  double log_mgf(double c) const {
    if (n_ == 0) return -kInf;
    const double shift = c * max_;
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) sum += counts_[i] * std::exp(c * values_[i] - shift);
    return shift + std::log(sum / static_cast<double>(n_));
  }

  // D_X(theta) = (1/theta) ln E[exp(theta * window / w)]
  RateFunction rate(double theta) const {
    return {theta, log_mgf(theta / static_cast<double>(s_.w)) / theta, s_.w, n_};
  }

  std::size_t count() const { return n_; }
  std::size_t distinct() const { return values_.size(); }
  double max() const { return max_; }
  double mean() const { return mean_; }
  const WindowSeries& series() const { return s_; }

 private:
  WindowSeries s_;
  std::size_t n_ = 0;
  double max_ = 0.0;
  double mean_ = 0.0;
  std::vector<double> values_;
  std::vector<std::uint32_t> counts_;
};

// ---- estimate_rate on a plain per-slot increment sequence ----

inline RateFunction estimate_rate(std::span<const double> increments, double theta, Slot wb) {
  if (!(theta > 0.0)) throw ConfigError("estimate_rate: theta must be > 0");
  if (wb < 1) throw ConfigError("estimate_rate: wb must be >= 1");
  if (increments.size() < wb + 1)
    throw InsufficientData("estimate_rate: need at least wb + 1 increments", increments.size());
  const std::size_t m = increments.size() - wb + 1;
  std::vector<double> z(m);
  double run = 0.0;
  for (Slot k = 0; k < wb; ++k) run += increments[k];
  const double c = theta / static_cast<double>(wb);
  z[0] = c * run;
  for (std::size_t j = 1; j < m; ++j) {
    run += increments[j + wb - 1] - increments[j - 1];
    z[j] = c * run;
  }
  return {theta, log_mean_exp(z) / theta, wb, m};
}

// Mean and standard error of exp(theta (x - D)).
struct UnitMean {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline UnitMean unit_mean(std::span<const double> x, double theta, double d) {
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) f[i] = std::exp(theta * (x[i] - d));
  auto mv = mean_var(f);
  return {mv.mean, std::sqrt(mv.var / static_cast<double>(std::max<std::size_t>(mv.n, 1))), mv.n};
}

// ---- martingale views ----

class MartingaleView {
 public:
  MartingaleView(std::vector<double> cumulative, double theta, Slot wb, RateFunction rate)
      : x_(std::move(cumulative)), theta_(theta), wb_(wb), rate_(rate) {}

  double log_value(Slot t) const {
    if (t + wb_ >= x_.size())
      throw RangeError("MartingaleView: t + wb = " + std::to_string(t + wb_) + " beyond horizon " +
                       std::to_string(x_.size() - 1));
    return theta_ * (x_[t + wb_] - x_[t] - static_cast<double>(wb_) * rate_.value);
  }
  double value(Slot t) const { return std::exp(log_value(t)); }

  // product of one-step factors exp(theta (x(j) - D)), j = 1..t
  double product_form(Slot t) const {
    double p = 1.0;
    for (Slot j = 1; j <= t; ++j) p *= std::exp(theta_ * (x_[j] - x_[j - 1] - rate_.value));
    return p;
  }

  double theta() const { return theta_; }
  Slot window() const { return wb_; }
  const RateFunction& rate() const { return rate_; }
  const std::vector<double>& process() const { return x_; }
  Slot last_start() const { return x_.size() > wb_ ? x_.size() - 1 - wb_ : 0; }

 private:
  std::vector<double> x_;
  double theta_;
  Slot wb_;
  RateFunction rate_;
};

inline MartingaleView sliding_block_martingale(std::span<const double> cumulative, double theta,
                                               Slot wb) {
  if (!(theta > 0.0)) throw ConfigError("sliding_block_martingale: theta must be > 0");
  if (wb < 1) throw ConfigError("sliding_block_martingale: wb must be >= 1");
  if (cumulative.size() < 2) throw InsufficientData("sliding_block_martingale: process too short", cumulative.size());
  std::vector<double> inc(cumulative.size() - 1);
  for (std::size_t i = 1; i < cumulative.size(); ++i) inc[i - 1] = cumulative[i] - cumulative[i - 1];
  auto rate = estimate_rate(inc, theta, wb);
  return MartingaleView({cumulative.begin(), cumulative.end()}, theta, wb, rate);
}

template <class Int>
std::vector<double> as_double(std::span<const Int> v) {
  return {v.begin(), v.end()};
}

// q(t) over busy slots, concatenated.
inline std::vector<double> busy_increments(const QueueTrace& h) {
  std::vector<double> q;
  for (Slot t : busy_slots(h)) q.push_back(static_cast<double>(h.q[t]));
  return q;
}

// Backlog martingale: window 1 over the concatenated busy-period q(t);
// value(t) and product_form(t) are the two sides of the product identity.
inline MartingaleView backlog_martingale_from(std::span<const double> q, double theta) {
  if (!(theta > 0.0)) throw ConfigError("backlog_martingale: theta must be > 0");
  if (q.size() < 2) throw InsufficientData("backlog_martingale: no busy period found", q.size());
  std::vector<double> x(q.size() + 1, 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) x[i + 1] = x[i] + q[i];
  auto rate = estimate_rate(q, theta, 1);
  return MartingaleView(std::move(x), theta, 1, rate);
}

inline MartingaleView backlog_martingale(const QueueTrace& h, double theta) {
  auto q = busy_increments(h);
  if (q.empty()) throw InsufficientData("backlog_martingale: no busy period found", 0);
  return backlog_martingale_from(q, theta);
}

// Product identity at t (t busy slots in): exp(theta (X(t) - t D)).
inline double backlog_closed_form(const MartingaleView& m, Slot t) {
  return std::exp(m.theta() * (m.process()[t] - static_cast<double>(t) * m.rate().value));
}

}  // namespace mhd
