#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bounds.hpp"
#include "channel.hpp"
#include "core.hpp"
#include "martingale.hpp"
#include "provision.hpp"
#include "solver.hpp"
#include "tandem.hpp"
#include "traffic.hpp"

namespace mhd {

enum class ThetaMode { per_grid, fixed };

inline const char* to_string(ThetaMode m) { return m == ThetaMode::fixed ? "fixed" : "per_grid"; }

struct Scenario {
  std::string id = "scenario";
  std::size_t hops = 4;
  TrafficConfig traffic;
  std::vector<ChannelConfig> channels;
  double slot_seconds = 0.5e-3;
  Slot horizon = 0;
  Slot warmup = 0;
  Slot analysis_slot = 0;
  std::vector<Slot> wb_grid;  // delay bounds in slots
  double epsilon = 1e-5;
  std::size_t realizations = 100000;
  std::uint64_t master_seed = 1;
  double estimation_fraction = 0.2;
  BacklogMode backlog_mode = BacklogMode::mean;
  ThetaMode theta_mode = ThetaMode::per_grid;
  SolverOptions solver;
  bool compare_uncapped = false;

  Slot max_wb() const { return wb_grid.empty() ? 0 : *std::max_element(wb_grid.begin(), wb_grid.end()); }
  double slot_ms() const { return slot_seconds * 1e3; }
  std::size_t estimation_count() const {
    return static_cast<std::size_t>(std::ceil(estimation_fraction * static_cast<double>(realizations)));
  }

  // Fills horizon / warmup / analysis_slot left at 0 with the defaults.
  void apply_defaults() {
    Slot m = max_wb();
    if (warmup == 0) warmup = 10 * m;
    if (horizon == 0) horizon = 2 * warmup + 4 * m;
    if (analysis_slot == 0) analysis_slot = std::max(warmup, horizon / 2);
  }

  void validate() const {
    if (hops < 1 || hops > 16) throw ConfigError("scenario.hops must be in [1, 16]");
    if (channels.size() != hops)
      throw ConfigError("scenario: " + std::to_string(channels.size()) + " channel configs for " +
                        std::to_string(hops) + " hops");
    traffic.validate();
    for (const auto& c : channels) c.validate();
    if (!(slot_seconds > 0.0)) throw ConfigError("scenario.slot_ms must be > 0");
    if (realizations < 100) throw ConfigError("scenario.realizations must be >= 100");
    if (wb_grid.empty()) throw ConfigError("qos.wb_slots must not be empty");
    for (std::size_t i = 0; i < wb_grid.size(); ++i) {
      if (wb_grid[i] < 2) throw ConfigError("qos.wb_slots: every delay bound must be >= 2 slots");
      if (i && wb_grid[i] <= wb_grid[i - 1]) throw ConfigError("qos.wb_slots must be strictly increasing");
    }
    if (analysis_slot < warmup) throw ConfigError("scenario.analysis_slot must be >= warmup");
    if (horizon < analysis_slot + 4 * max_wb())
      throw ConfigError("scenario.horizon must be >= analysis_slot + 4 * max(wb)");
    if (!(estimation_fraction > 0.0 && estimation_fraction < 1.0))
      throw ConfigError("scenario.estimation_fraction must be in (0, 1)");
    if (estimation_count() < 1 || estimation_count() >= realizations)
      throw ConfigError("scenario.estimation_fraction leaves an empty subset");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("qos.epsilon must be in (0, 1)");
  }
};

// Martingale window for a delay bound: {W(t) >= wb} = {Y_t(wb - 1) > 0} in slotted time.
inline Slot martingale_window(Slot wb) { return wb - 1; }

// ---- realizations ----

inline TrafficConfig realization_traffic(const Scenario& s, std::size_t r) {
  TrafficConfig t = s.traffic;
  t.seed = derive_seed(s.master_seed, r, "traffic");
  return t;
}

inline ChannelConfig realization_channel(const Scenario& s, std::size_t r, std::size_t hop) {
  ChannelConfig c = s.channels[hop];
  c.seed = derive_seed(s.master_seed, r, "channel", hop);
  return c;
}

inline std::vector<Bits> realization_arrivals(const Scenario& s, std::size_t r) {
  std::vector<Bits> a(s.horizon);
  generate_arrivals_into(realization_traffic(s, r), a);
  return a;
}

inline std::vector<std::vector<Bits>> realization_services(const Scenario& s, std::size_t r) {
  std::vector<std::vector<Bits>> sv(s.hops, std::vector<Bits>(s.horizon));
  for (std::size_t h = 0; h < s.hops; ++h)
    draw_service_into(realization_channel(s, r, h), s.slot_seconds, sv[h]);
  return sv;
}

inline TandemTrace realization_trace(const Scenario& s, std::size_t r) {
  auto a = realization_arrivals(s, r);
  auto sv = realization_services(s, r);
  return simulate(s.hops, a, sv);
}

inline BacklogPath realization_backlog(const Scenario& s, std::size_t r) {
  auto a = realization_arrivals(s, r);
  auto sv = realization_services(s, r);
  return simulate_backlog(s.hops, a, sv);
}

inline BacklogPath slice(const BacklogPath& p, Slot from, Slot to) {
  BacklogPath out;
  out.hops = p.hops;
  out.first = from;
  const Slot n = to - from + 1, src = p.len();
  out.A1.assign(p.A1.begin() + (from - p.first), p.A1.begin() + (to - p.first + 1));
  out.total.assign(p.total.begin() + (from - p.first), p.total.begin() + (to - p.first + 1));
  out.Q.resize(n * p.hops);
  for (std::size_t h = 0; h < p.hops; ++h)
    std::copy_n(p.Q.begin() + h * src + (from - p.first), n, out.Q.begin() + h * n);
  return out;
}

// Runs f(i) for i in [0, n) on `workers` threads; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& f) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard lk(mu);
          if (!err) err = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

inline std::size_t default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---- report ----

struct GridRow {
  Slot wb = 0;
  double wb_ms = 0.0;
  Slot window = 0;
  std::size_t exceed = 0;
  double empirical = 0.0;
  Interval empirical_ci;
  double freq_nonneg = 0.0;         // {Y_t >= 0} at the analysis slot, evaluation realizations
  double freq_nonneg_pooled = 0.0;  // over every start slot of the estimation paths
  double mean_backlog = 0.0;
  double bound = 0.0;
  double deviation = 0.0;  // bound - empirical
  bool dominates = false;         // bound >= 99% lower confidence limit of empirical
  bool dominates_strict = false;  // bound >= empirical
  bool chain_ok = false;          // empirical <= freq_nonneg <= mr
  bool chain_ok_ci = false;       // empirical <= freq_nonneg, 99% lower limit of freq_nonneg <= mr
  Interval freq_nonneg_ci;
  OccurrenceRate occurrence;
  ThetaSolution solution;
  std::optional<ThetaSolution> uncapped;
  DupbResult dupb;
  ProvisionResult provision;
  std::array<double, 5> batch_quantiles{};  // min, q25, median, q75, max
};

struct ComparisonReport {
  std::string id;
  std::size_t hops = 0;
  std::size_t realizations = 0;
  std::size_t estimation = 0;
  std::size_t evaluation = 0;
  std::size_t censored = 0;
  Slot analysis_slot = 0;
  double mean_arrival_rate = 0.0;  // bits/slot, all realizations
  std::vector<GridRow> rows;
  double max_deviation = 0.0;
  double rmse = 0.0;
  double tail_ratio = 0.0;  // bound / empirical at the largest wb
  double wall_time_simulation = 0.0;
  double wall_time_analysis = 0.0;

  bool all_dominate() const {
    return std::all_of(rows.begin(), rows.end(), [](const GridRow& r) { return r.dominates; });
  }
  bool chain_holds() const {
    return std::all_of(rows.begin(), rows.end(), [](const GridRow& r) { return r.chain_ok; });
  }
  bool chain_holds_ci() const {
    return std::all_of(rows.begin(), rows.end(), [](const GridRow& r) { return r.chain_ok_ci; });
  }
};

struct RunOptions {
  std::size_t workers = default_workers();
  std::size_t batches = 10;
};

namespace detail {

struct RealizationRecord {
  Delay delay;
  std::vector<std::uint8_t> y_nonneg;  // per grid point
  double arrival_rate = 0.0;
  double backlog_at_t = 0.0;
};

inline std::string context(const Scenario& s, const std::string& what) {
  return "scenario '" + s.id + "': " + what;
}

}  // namespace detail

inline ComparisonReport run_scenario(Scenario scn, const RunOptions& ro = {}) {
  scn.apply_defaults();
  try {
    scn.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(detail::context(scn, e.what()));
  }
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();

  const std::size_t N = scn.realizations, n_est = scn.estimation_count(), n_eval = N - n_est;
  const Slot ta = scn.analysis_slot;
  const std::size_t G = scn.wb_grid.size();

  std::vector<detail::RealizationRecord> rec(N);
  std::vector<BacklogPath> est(n_est);

  parallel_for(N, ro.workers, [&](std::size_t r) {
    BacklogPath full = realization_backlog(scn, r);
    auto& out = rec[r];
    out.delay = delay(full, ta);
    out.arrival_rate = static_cast<double>(full.A1.back()) / static_cast<double>(scn.horizon);
    out.backlog_at_t = static_cast<double>(full.total_backlog(ta));
    out.y_nonneg.resize(G);
    for (std::size_t j = 0; j < G; ++j) {
      Slot w = martingale_window(scn.wb_grid[j]);
      Bits y = full.total_backlog(ta + w) - (full.arrivals(ta + w) - full.arrivals(ta));
      out.y_nonneg[j] = y >= 0 ? 1 : 0;
    }
    if (r < n_est) est[r] = slice(full, scn.warmup, scn.horizon);
  });

  auto t1 = clock::now();

  ComparisonReport rep;
  rep.id = scn.id;
  rep.hops = scn.hops;
  rep.realizations = N;
  rep.estimation = n_est;
  rep.evaluation = n_eval;
  rep.analysis_slot = ta;
  double rate_sum = 0.0;
  for (const auto& r : rec) rate_sum += r.arrival_rate;
  rep.mean_arrival_rate = rate_sum / static_cast<double>(N);
  for (std::size_t r = n_est; r < N; ++r) rep.censored += rec[r].delay.censored ? 1 : 0;

  std::vector<double> backlog_est(n_est);
  for (std::size_t r = 0; r < n_est; ++r) backlog_est[r] = rec[r].backlog_at_t;
  const double mean_backlog = mean_var(backlog_est).mean;

  std::optional<double> fixed_theta;
  std::vector<double> deviations;
  for (std::size_t j = 0; j < G; ++j) {
    GridRow row;
    row.wb = scn.wb_grid[j];
    row.wb_ms = static_cast<double>(row.wb) * scn.slot_ms();
    row.window = martingale_window(row.wb);
    row.mean_backlog = mean_backlog;

    std::size_t nonneg = 0;
    for (std::size_t r = n_est; r < N; ++r) {
      row.exceed += exceeds(rec[r].delay, row.wb) ? 1 : 0;
      nonneg += rec[r].y_nonneg[j];
    }
    row.empirical = static_cast<double>(row.exceed) / static_cast<double>(n_eval);
    row.empirical_ci = wilson(row.exceed, n_eval);
    row.freq_nonneg = static_cast<double>(nonneg) / static_cast<double>(n_eval);
    row.freq_nonneg_ci = wilson(nonneg, n_eval);

    const std::size_t B = std::min<std::size_t>(ro.batches, n_eval);
    std::vector<double> bp;
    for (std::size_t b = 0; b < B; ++b) {
      std::size_t lo = n_est + b * n_eval / B, hi = n_est + (b + 1) * n_eval / B;
      std::size_t k = 0;
      for (std::size_t r = lo; r < hi; ++r) k += exceeds(rec[r].delay, row.wb) ? 1 : 0;
      bp.push_back(static_cast<double>(k) / static_cast<double>(hi - lo));
    }
    std::sort(bp.begin(), bp.end());
    row.batch_quantiles = {bp.front(), quantile_sorted(bp, 0.25), quantile_sorted(bp, 0.5),
                           quantile_sorted(bp, 0.75), bp.back()};

    try {
      row.occurrence = max_occurrence_rate(est, row.window);
      row.freq_nonneg_pooled = row.occurrence.freq_nonneg;
      const double mean_x = SeriesMgf(WindowSeries{est, Series::xmsb, 0, row.window}).mean();
      StabilitySlack lemma(est, row.window, mean_backlog);

      if (scn.theta_mode == ThetaMode::fixed && fixed_theta) {
        row.solution.theta = *fixed_theta;
        row.solution.mr = row.occurrence.mr;
        row.solution.theta_cap = theta_cap(row.occurrence.mr, mean_x, mean_backlog);
        row.solution.fallback = "theta held fixed";
        row.solution.slack = lemma(*fixed_theta);
      } else {
        SolverOptions so = scn.solver;
        so.use_cap = true;
        row.solution = solve_theta(lemma, row.occurrence.mr, mean_x, mean_backlog, so);
        fixed_theta = row.solution.theta;
      }
      if (scn.compare_uncapped) {
        SolverOptions so = scn.solver;
        so.use_cap = false;
        so.verify_interval = false;
        row.uncapped = solve_theta(lemma, row.occurrence.mr, mean_x, mean_backlog, so);
      }
      auto x = estimate_xmsb(est, row.solution.theta, row.window);
      row.dupb = dupb(x, backlog_est, scn.backlog_mode);
      row.dupb.iterations = row.solution.iterations;
      row.dupb.bracket = row.solution.bracket_final;
      row.dupb.wall_time = row.solution.wall_time;
      row.provision = minimum_service_rate(x, {row.wb, row.wb_ms, scn.epsilon}, row.solution.theta,
                                           rep.mean_arrival_rate);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(detail::context(scn, "wb=" + std::to_string(row.wb) + ": " + e.what()),
                            e.slack_profile);
    } catch (const UnstableError& e) {
      throw UnstableError(detail::context(scn, e.what()), e.drift, e.z);
    } catch (const InsufficientData& e) {
      throw InsufficientData(detail::context(scn, e.what()), e.count);
    }

    row.bound = row.dupb.bound;
    row.deviation = row.bound - row.empirical;
    row.dominates = row.bound >= row.empirical_ci.lo;
    row.dominates_strict = row.bound >= row.empirical;
    row.chain_ok = row.empirical <= row.freq_nonneg && row.freq_nonneg <= row.occurrence.mr;
    row.chain_ok_ci = row.empirical <= row.freq_nonneg && row.freq_nonneg_ci.lo <= row.occurrence.mr;
    deviations.push_back(row.deviation);
    rep.rows.push_back(std::move(row));
  }

  rep.rmse = rmse(deviations);
  for (double d : deviations) rep.max_deviation = std::max(rep.max_deviation, std::abs(d));
  const auto& last = rep.rows.back();
  rep.tail_ratio = last.empirical > 0.0 ? last.bound / last.empirical : kInf;
  rep.wall_time_simulation = std::chrono::duration<double>(t1 - t0).count();
  rep.wall_time_analysis = std::chrono::duration<double>(clock::now() - t1).count();
  return rep;
}

// Same traffic; channels beyond the base list replicate its last entry.
inline Scenario with_hops(const Scenario& base, std::size_t hops) {
  Scenario s = base;
  s.hops = hops;
  s.channels.clear();
  for (std::size_t i = 0; i < hops; ++i)
    s.channels.push_back(base.channels[std::min(i, base.channels.size() - 1)]);
  s.id = base.id + "_hops" + std::to_string(hops);
  return s;
}

inline std::vector<ComparisonReport> run_hop_sweep(const Scenario& base,
                                                   std::span<const std::size_t> hop_range,
                                                   const RunOptions& ro = {}) {
  std::vector<ComparisonReport> out;
  for (auto h : hop_range) {
    if (h < 1 || h > 16) throw ConfigError("run_hop_sweep: hop count must be in [1, 16]");
    out.push_back(run_scenario(with_hops(base, h), ro));
  }
  return out;
}

// Same scenario at a different traffic level; bandwidth and tx power scale with
// the rate so spectral efficiency (and utilization) stay put.
inline Scenario scale_traffic(const Scenario& base, double mbps) {
  Scenario s = base;
  const double target = bits_per_slot(mbps, base.slot_seconds);
  const double ratio = target / base.traffic.mean_rate_bits_per_slot;
  s.traffic = TrafficConfig::from_rate(target, base.traffic.request_rate, base.traffic.burst);
  for (auto& c : s.channels) {
    c.bandwidth_hz *= ratio;
    c.tx_power_dbm += db::from_linear(ratio);
  }
  return s;
}

struct ProvisionCell {
  double traffic_mbps = 0.0;
  double wb_ms = 0.0;
  Slot wb = 0;
  double epsilon = 0.0;
  double mean_downlink = 0.0;
  ProvisionResult result;
  double empirical = 0.0;
  double bound = 0.0;
};

inline std::vector<ProvisionCell> run_provision_matrix(const Scenario& base,
                                                       std::span<const double> traffic_mbps,
                                                       std::span<const double> wb_ms,
                                                       const RunOptions& ro = {}) {
  std::vector<ProvisionCell> out;
  for (double mbps : traffic_mbps) {
    Scenario s = scale_traffic(base, mbps);
    s.id = base.id + "_" + std::to_string(static_cast<int>(std::lround(mbps * 10))) + "dMbps";
    s.wb_grid.clear();
    for (double ms : wb_ms) s.wb_grid.push_back(static_cast<Slot>(std::lround(ms / s.slot_ms())));
    std::sort(s.wb_grid.begin(), s.wb_grid.end());
    s.horizon = s.warmup = s.analysis_slot = 0;
    auto rep = run_scenario(s, ro);
    for (const auto& row : rep.rows) {
      ProvisionCell c;
      c.traffic_mbps = mbps;
      c.wb_ms = row.wb_ms;
      c.wb = row.wb;
      c.epsilon = s.epsilon;
      c.mean_downlink = rep.mean_arrival_rate;
      c.result = row.provision;
      c.empirical = row.empirical;
      c.bound = row.bound;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace mhd
