#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mhd {

using Bits = std::int64_t;
using Slot = std::size_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- errors ----

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InsufficientData : std::runtime_error {
  std::size_t count;
  InsufficientData(const std::string& what, std::size_t n)
      : std::runtime_error(what + " (have " + std::to_string(n) + ")"), count(n) {}
};

struct UnstableError : std::runtime_error {
  double drift;
  double z;
  UnstableError(const std::string& what, double d, double zscore)
      : std::runtime_error(what), drift(d), z(zscore) {}
};

// ---- dB <-> linear ----

namespace db {

inline double to_linear(double v_db) { return std::exp(v_db * 0.23025850929940458); }  // 10^(v/10)
inline double from_linear(double v) { return 10.0 * std::log10(v); }

// dBm -> milliwatt and back
inline double dbm_to_mw(double p_dbm) { return to_linear(p_dbm); }
inline double mw_to_dbm(double p_mw) { return from_linear(p_mw); }

// dBm/Hz over a bandwidth -> dBm
inline double noise_dbm(double density_dbm_hz, double bandwidth_hz) {
  return density_dbm_hz + from_linear(bandwidth_hz);
}

// sum of powers given in dBm, returned in mW
inline double sum_mw(std::span<const double> powers_dbm) {
  double s = 0.0;
  for (double p : powers_dbm) s += dbm_to_mw(p);
  return s;
}

}  // namespace db

// ---- log-domain helpers ----

// ln(mean(exp(v))) with max shift
inline double log_mean_exp(std::span<const double> v) {
  if (v.empty()) return -kInf;
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s / static_cast<double>(v.size()));
}

// Streaming accumulator for ln(mean(exp(.))) when the max is known up front.
struct ShiftedExpSum {
  double shift = 0.0;
  double sum = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += std::exp(x - shift);
    ++n;
  }
  double log_mean() const {
    if (n == 0) return -kInf;
    return shift + std::log(sum / static_cast<double>(n));
  }
};

// ---- seeds ----

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t tag_hash(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// seed = hash(master, index, tag, sub)
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::string_view tag, std::uint64_t sub = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ tag_hash(tag));
  return splitmix64(h ^ sub);
}

// ---- small statistics ----

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  std::size_t n = 0;
};

template <class Range>
MeanVar mean_var(const Range& xs) {
  MeanVar r;
  double m = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (auto x : xs) {
    ++n;
    double d = static_cast<double>(x) - m;
    m += d / static_cast<double>(n);
    m2 += d * (static_cast<double>(x) - m);
  }
  r.n = n;
  r.mean = m;
  r.var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return r;
}

// Wilson score interval for k successes out of n
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline Interval wilson(std::size_t k, std::size_t n, double z = 2.5758293035489004) {
  if (n == 0) return {0.0, 1.0};
  double nn = static_cast<double>(n);
  double p = static_cast<double>(k) / nn;
  double z2 = z * z;
  double den = 1.0 + z2 / nn;
  double c = (p + z2 / (2.0 * nn)) / den;
  double h = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / den;
  return {std::max(0.0, c - h), std::min(1.0, c + h)};
}

inline double quantile_sorted(std::span<const double> s, double q) {
  if (s.empty()) return std::nan("");
  double pos = q * static_cast<double>(s.size() - 1);
  auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= s.size()) return s.back();
  double f = pos - static_cast<double>(i);
  return s[i] * (1.0 - f) + s[i + 1] * f;
}

}  // namespace mhd
