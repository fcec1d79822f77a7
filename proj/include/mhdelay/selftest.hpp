#pragma once

#include <random>
#include <string>
#include <vector>

#include "channel.hpp"
#include "martingale.hpp"
#include "solver.hpp"
#include "tandem.hpp"
#include "traffic.hpp"

namespace mhd::selftest {

// ---- upcrossing estimate on synthetic supermartingales ----

struct WalkCase {
  double drift = 0.0;
  double step_sd = 1.0;
  bool lattice = false;  // +-1 steps instead of Gaussian
  Slot T = 0;
  double a = 0.0;
  std::size_t observed = 0;
  double bound = 0.0;
};

inline std::vector<double> random_walk(const WalkCase& c, std::mt19937_64& rng) {
  std::vector<double> y(c.T);
  std::normal_distribution<double> g(c.drift, c.step_sd);
  std::bernoulli_distribution up(0.5 * (1.0 + c.drift));
  double v = 0.0;
  for (auto& x : y) {
    v += c.lattice ? (up(rng) ? 1.0 : -1.0) : g(rng);
    x = v;
  }
  return y;
}

struct UpcrossingSummary {
  std::vector<WalkCase> cases;
  std::size_t failures = 0;
  double min_ratio = kInf;  // bound / observed over cases with observed > 0
};

inline UpcrossingSummary upcrossing_suite(std::size_t instances, std::uint64_t seed) {
  UpcrossingSummary s;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> drift(-0.5, -0.05), sd(0.5, 2.0), logT(3.0, 4.0);
  const double levels[] = {0.0, 2.0, 5.0};
  for (std::size_t i = 0; i < instances; ++i) {
    WalkCase c;
    c.drift = drift(rng);
    c.lattice = i % 2 == 1;
    c.step_sd = c.lattice ? 1.0 : sd(rng);
    c.T = static_cast<Slot>(std::pow(10.0, logT(rng)));
    c.a = levels[i % 3];
    auto y = random_walk(c, rng);
    c.observed = count_exceedances(y, c.a);
    c.bound = upcrossing_bound(std::span<const double>(y), c.a);
    if (static_cast<double>(c.observed) > c.bound) ++s.failures;
    if (c.observed > 0) s.min_ratio = std::min(s.min_ratio, c.bound / static_cast<double>(c.observed));
    s.cases.push_back(c);
  }
  return s;
}

// ---- unit mean of the one-step factor ----

struct UnitMeanCase {
  std::string process;
  double theta_per_kbit = 0.0;
  double d = 0.0;
  UnitMean um;
  bool pass = false;
};

// Stationary single-hop reference: 8000-bit bursts at one request per slot,
// UMa LOS link sized for roughly 0.9 utilization.
inline ChannelConfig reference_channel(std::uint64_t seed) {
  ChannelConfig c = ChannelConfig::defaults_for(ChannelModel::UMa);
  c.link_distance_m = 200.0;
  c.tx_power_dbm = 30.0;
  c.bandwidth_hz = 1.75e6;
  c.seed = seed;
  return c;
}

inline TrafficConfig reference_traffic(std::uint64_t seed) {
  return TrafficConfig::from_rate(8000.0, 1.0, BurstDistribution::fixed, seed);
}

// q(t) in kbit over busy slots of a single-hop trace
inline std::vector<double> busy_q_kbit(std::uint64_t seed, std::size_t want) {
  std::vector<double> out;
  Slot H = want * 3;
  for (int round = 0; out.size() < want && round < 8; ++round, H *= 2) {
    auto a = generate_arrivals(reference_traffic(derive_seed(seed, round, "a")), H);
    std::vector<std::vector<Bits>> s{draw_service(reference_channel(derive_seed(seed, round, "s")), H, 0.5e-3)};
    auto tr = simulate(1, a, s);
    out.clear();
    for (Slot t : busy_slots(tr.per_hop[0])) {
      out.push_back(static_cast<double>(tr.per_hop[0].q[t]) / 1000.0);
      if (out.size() == want) break;
    }
  }
  return out;
}

// One long busy period: a large burst in slot 1, then the reference traffic on a
// link with twice the bandwidth, so the queue drains slowly and never idles.
struct BusyRun {
  TrafficConfig traffic;
  ChannelConfig channel;
  double slot_seconds = 0.5e-3;
  std::vector<double> q;  // bits, busy slots only
  std::vector<double> a;
  std::vector<double> s;
};

inline BusyRun long_busy_period(std::uint64_t seed, std::size_t want) {
  BusyRun r;
  r.traffic = reference_traffic(derive_seed(seed, 0, "a"));
  r.channel = reference_channel(derive_seed(seed, 0, "s"));
  r.channel.bandwidth_hz *= 2.0;
  const Slot H = want + 2;
  auto a = generate_arrivals(r.traffic, H);
  std::vector<std::vector<Bits>> s{draw_service(r.channel, H, r.slot_seconds)};
  Bits drain = 0;
  for (Slot t = 1; t < H; ++t) drain += s[0][t] - a[t];
  a[0] += std::max<Bits>(drain, 0) * 2 + 1;
  auto tr = simulate(1, a, s);
  for (Slot t : busy_slots(tr.per_hop[0])) {
    const auto& h = tr.per_hop[0];
    r.q.push_back(static_cast<double>(h.q[t]));
    r.a.push_back(static_cast<double>(h.a[t]));
    r.s.push_back(static_cast<double>(h.s[t]));
  }
  return r;
}

inline std::vector<double> arrivals_kbit(std::uint64_t seed, std::size_t n) {
  auto a = generate_arrivals(reference_traffic(seed), n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(a[i]) / 1000.0;
  return out;
}

// D is estimated on an independent sample ten times larger than the test sample.
inline std::vector<UnitMeanCase> unit_mean_suite(std::span<const double> thetas_per_kbit,
                                                 std::size_t samples, std::uint64_t seed) {
  std::vector<UnitMeanCase> out;
  const auto q_fit = busy_q_kbit(derive_seed(seed, 0, "fit-q"), 10 * samples);
  const auto q_test = busy_q_kbit(derive_seed(seed, 1, "test-q"), samples);
  const auto a_fit = arrivals_kbit(derive_seed(seed, 0, "fit-a"), 10 * samples);
  const auto a_test = arrivals_kbit(derive_seed(seed, 1, "test-a"), samples);
  struct P { const char* name; const std::vector<double>& fit; const std::vector<double>& test; };
  for (const P& p : {P{"busy_q", q_fit, q_test}, P{"arrivals", a_fit, a_test}})
    for (double th : thetas_per_kbit) {
      UnitMeanCase c;
      c.process = p.name;
      c.theta_per_kbit = th;
      c.d = estimate_rate(p.fit, th, 1).value;
      c.um = unit_mean(p.test, th, c.d);
      c.pass = std::abs(c.um.mean - 1.0) <= 3.0 * c.um.se;
      out.push_back(c);
    }
  return out;
}

}  // namespace mhd::selftest
