#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "core.hpp"

namespace mhd {

enum class BurstDistribution { fixed, exponential };

inline const char* to_string(BurstDistribution b) {
  return b == BurstDistribution::fixed ? "fixed" : "exponential";
}

inline double bits_per_slot(double mbps, double slot_seconds) {
  return mbps * 1e6 * slot_seconds;
}

// Compound Poisson source: Poisson(request_rate) bursts per slot.
struct TrafficConfig {
  double mean_rate_bits_per_slot = 8000.0;
  BurstDistribution burst = BurstDistribution::fixed;
  double mean_burst_bits = 8000.0;
  double request_rate = 1.0;
  std::uint64_t seed = 1;

  // Keeps request_rate * mean_burst_bits == mean rate.
  static TrafficConfig from_rate(double mean_rate, double request_rate,
                                 BurstDistribution b = BurstDistribution::fixed,
                                 std::uint64_t seed = 1) {
    TrafficConfig c;
    c.mean_rate_bits_per_slot = mean_rate;
    c.request_rate = request_rate;
    c.burst = b;
    c.mean_burst_bits = request_rate > 0.0 ? mean_rate / request_rate : 0.0;
    c.seed = seed;
    return c;
  }

  void validate() const {
    if (!(mean_rate_bits_per_slot > 0.0))
      throw ConfigError("traffic.mean_rate_bits_per_slot must be > 0");
    if (!(request_rate > 0.0)) throw ConfigError("traffic.request_rate must be > 0");
    if (!(mean_burst_bits > 0.0)) throw ConfigError("traffic.mean_burst_bits must be > 0");
    double implied = request_rate * mean_burst_bits;
    if (std::abs(implied - mean_rate_bits_per_slot) > 1e-9 * mean_rate_bits_per_slot)
      throw ConfigError("traffic: request_rate * mean_burst_bits != mean_rate_bits_per_slot");
  }
};

// Fills out[0..horizon) with per-slot arrival sizes.
inline void generate_arrivals_into(const TrafficConfig& cfg, std::span<Bits> out) {
  std::mt19937_64 rng(cfg.seed);
  boost::random::poisson_distribution<int> requests(cfg.request_rate);
  boost::random::exponential_distribution<double> size(1.0 / cfg.mean_burst_bits);
  const Bits fixed = static_cast<Bits>(std::floor(cfg.mean_burst_bits));
  for (auto& a : out) {
    int n = requests(rng);
    Bits bits = 0;
    if (cfg.burst == BurstDistribution::fixed) {
      bits = fixed * n;
    } else {
      for (int k = 0; k < n; ++k) bits += static_cast<Bits>(std::floor(size(rng)));
    }
    a = bits;
  }
}

inline std::vector<Bits> generate_arrivals(const TrafficConfig& cfg, Slot horizon) {
  cfg.validate();
  if (horizon < 1) throw ConfigError("generate_arrivals: horizon must be >= 1");
  std::vector<Bits> out(horizon);
  generate_arrivals_into(cfg, out);
  return out;
}

}  // namespace mhd
