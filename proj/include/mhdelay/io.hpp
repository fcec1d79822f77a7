#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "channel.hpp"
#include "montecarlo.hpp"
#include "tandem.hpp"

namespace mhd::io {

inline std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Artifact {
  std::string name;
  std::string checksum;  // FNV-1a 64
  std::size_t bytes = 0;
};

// temp file + rename
inline Artifact write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
  return {path.filename().string(), fnv1a64_hex(content), content.size()};
}

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- traces ----

inline std::string trace_csv(const TandemTrace& tr) {
  std::ostringstream o;
  o << "slot,hop,a,s,q,Q,A,Astar\n";
  for (Slot t = 1; t <= tr.horizon(); ++t)
    for (std::size_t h = 0; h < tr.hops; ++h) {
      const auto& x = tr.per_hop[h];
      o << t << ',' << h + 1 << ',' << x.a[t] << ',' << x.s[t] << ',' << x.q[t] << ',' << x.Q[t] << ','
        << x.A[t] << ',' << x.Astar[t] << '\n';
    }
  return o.str();
}

inline std::string service_csv(const ServiceProcess& sp) {
  std::ostringstream o;
  o << "slot,hop,s_bits\n";
  const Slot H = sp.per_hop.empty() ? 0 : sp.per_hop.front().size();
  for (Slot t = 1; t <= H; ++t)
    for (std::size_t h = 0; h < sp.per_hop.size(); ++h) o << t << ',' << h + 1 << ',' << sp.per_hop[h][t - 1] << '\n';
  return o.str();
}

// Reads a trace dump back; the result is re-simulated from hop 1 arrivals and
// per-hop services, then checked against the stored columns.
inline TandemTrace read_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("slot,hop,a,s,q,Q,A,Astar", 0) != 0)
    throw ShapeError("read_trace_csv: bad header");
  struct Row { Slot t; std::size_t h; Bits a, s, q, Q, A, As; };
  std::vector<Row> rows;
  std::size_t hops = 0;
  Slot H = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Row r{};
    long long v[8];
    if (std::sscanf(line.c_str(), "%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld", &v[0], &v[1], &v[2], &v[3],
                    &v[4], &v[5], &v[6], &v[7]) != 8)
      throw ShapeError("read_trace_csv: malformed row '" + line + "'");
    r = {static_cast<Slot>(v[0]), static_cast<std::size_t>(v[1]), v[2], v[3], v[4], v[5], v[6], v[7]};
    hops = std::max(hops, r.h);
    H = std::max(H, r.t);
    rows.push_back(r);
  }
  if (rows.size() != hops * H) throw ShapeError("read_trace_csv: row count does not match slots x hops");
  std::vector<Bits> arrivals(H);
  std::vector<std::vector<Bits>> services(hops, std::vector<Bits>(H));
  for (const auto& r : rows) {
    if (r.h == 1) arrivals[r.t - 1] = r.a;
    services[r.h - 1][r.t - 1] = r.s;
  }
  auto tr = simulate(hops, arrivals, services);
  for (const auto& r : rows) {
    const auto& x = tr.per_hop[r.h - 1];
    if (x.a[r.t] != r.a || x.q[r.t] != r.q || x.Q[r.t] != r.Q || x.A[r.t] != r.A || x.Astar[r.t] != r.As)
      throw ShapeError("read_trace_csv: stored columns disagree with the recursion at slot " +
                       std::to_string(r.t) + ", hop " + std::to_string(r.h));
  }
  return tr;
}

// ---- reports ----

inline std::string results_header() {
  return "hops,wb_slots,wb_ms,theta,bound,empirical,deviation,rmse_group_id\n";
}

inline std::string results_rows(const ComparisonReport& r) {
  std::ostringstream o;
  for (const auto& row : r.rows)
    o << r.hops << ',' << row.wb << ',' << num(row.wb_ms) << ',' << num(row.solution.theta) << ','
      << num(row.bound) << ',' << num(row.empirical) << ',' << num(row.deviation) << ',' << r.id << '\n';
  return o.str();
}

inline std::string solver_header() {
  return "scenario_id,hops,wb,theta,theta_cap,mr,iterations,iterations_uncapped,fallback\n";
}

inline std::string solver_rows(const ComparisonReport& r) {
  std::ostringstream o;
  for (const auto& row : r.rows) {
    o << r.id << ',' << r.hops << ',' << row.wb << ',' << num(row.solution.theta) << ','
      << num(row.solution.theta_cap) << ',' << num(row.solution.mr) << ',' << row.solution.iterations << ',';
    if (row.uncapped) o << row.uncapped->iterations;
    else o << "NA";
    o << ',' << (row.solution.fallback.empty() ? "none" : row.solution.fallback) << '\n';
  }
  return o.str();
}

// Everything the report knows per grid point, for offline inspection.
inline std::string detail_csv(const ComparisonReport& r) {
  std::ostringstream o;
  o << "wb_slots,wb_ms,window,empirical,ci_lo,ci_hi,exceed,evaluation,freq_y_nonneg,freq_y_nonneg_pooled,mr,"
       "bound,raw_bound,log_bound,log_moment,log_moment_se,mean_xmsb,total_backlog_at_t,mean_backlog,theta,"
       "theta_cap,dominates,chain_ok,interval_verified,c_bits_per_slot,provision_branch\n";
  for (const auto& row : r.rows)
    o << row.wb << ',' << num(row.wb_ms) << ',' << row.window << ',' << num(row.empirical) << ','
      << num(row.empirical_ci.lo) << ',' << num(row.empirical_ci.hi) << ',' << row.exceed << ',' << r.evaluation
      << ',' << num(row.freq_nonneg) << ',' << num(row.freq_nonneg_pooled) << ',' << num(row.occurrence.mr)
      << ',' << num(row.bound) << ',' << num(row.dupb.raw_bound) << ',' << num(row.dupb.log_bound) << ','
      << num(row.dupb.xmsb.log_moment) << ',' << num(row.dupb.xmsb.log_moment_se) << ','
      << num(row.dupb.xmsb.mean_xmsb) << ',' << num(row.dupb.total_backlog_at_t) << ','
      << num(row.mean_backlog) << ',' << num(row.solution.theta) << ',' << num(row.solution.theta_cap) << ','
      << row.dominates << ',' << row.chain_ok << ',' << row.solution.interval_verified << ','
      << num(row.provision.c_bits_per_slot) << ',' << to_string(row.provision.branch) << '\n';
  return o.str();
}

// x = wb in ms; y series: empirical, bound, per-batch quantiles
inline std::string plot_csv(const ComparisonReport& r) {
  std::ostringstream o;
  o << "wb_ms,empirical,bound,batch_min,batch_q25,batch_median,batch_q75,batch_max\n";
  for (const auto& row : r.rows) {
    o << num(row.wb_ms) << ',' << num(row.empirical) << ',' << num(row.bound);
    for (double q : row.batch_quantiles) o << ',' << num(q);
    o << '\n';
  }
  return o.str();
}

inline std::string sweep_summary_csv(const std::vector<ComparisonReport>& reps) {
  std::ostringstream o;
  o << "hops,rmse,max_deviation,theta,iterations,tail_ratio\n";
  for (const auto& r : reps) {
    const auto& last = r.rows.back();
    std::size_t it = 0;
    for (const auto& row : r.rows) it += row.solution.iterations;
    o << r.hops << ',' << num(r.rmse) << ',' << num(r.max_deviation) << ',' << num(last.solution.theta) << ','
      << it << ',' << num(r.tail_ratio) << '\n';
  }
  return o.str();
}

inline std::string provision_header() {
  return "traffic_mbps,wb_ms,epsilon,c_bits_per_slot,mean_downlink_bits_per_slot\n";
}

}  // namespace mhd::io
