#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"

namespace mhd {

// One hop. Every array has horizon + 1 entries; index 0 is time 0 (all zero).
struct QueueTrace {
  std::vector<Bits> a, s, q, Q, A, S, Astar;

  Slot horizon() const { return a.empty() ? 0 : a.size() - 1; }
  Bits departures(Slot t) const { return Astar[t] - Astar[t - 1]; }
};

struct TandemTrace {
  std::size_t hops = 0;
  std::vector<QueueTrace> per_hop;

  Slot horizon() const { return per_hop.empty() ? 0 : per_hop.front().horizon(); }
  Bits A1(Slot t) const { return per_hop.front().A[t]; }
  Bits total_backlog(Slot t) const {
    Bits s = 0;
    for (const auto& h : per_hop) s += h.Q[t];
    return s;
  }
  const std::vector<Bits>& final_departures() const { return per_hop.back().Astar; }
};

namespace detail {

inline void check_shapes(std::size_t hops, std::size_t horizon,
                         std::span<const std::vector<Bits>> services) {
  if (hops < 1) throw ShapeError("simulate: hops must be >= 1");
  if (services.size() != hops)
    throw ShapeError("simulate: " + std::to_string(services.size()) + " service sequences for " +
                     std::to_string(hops) + " hops");
  for (const auto& s : services)
    if (s.size() != horizon)
      throw ShapeError("simulate: service length " + std::to_string(s.size()) +
                       " != arrival length " + std::to_string(horizon));
}

}  // namespace detail

// FIFO tandem via per-hop Lindley recursion; departures of hop i feed hop i+1.
inline TandemTrace simulate(std::size_t hops, std::span<const Bits> arrivals,
                            std::span<const std::vector<Bits>> services) {
  const Slot H = arrivals.size();
  detail::check_shapes(hops, H, services);
  TandemTrace tr;
  tr.hops = hops;
  tr.per_hop.resize(hops);
  for (auto& h : tr.per_hop)
    for (auto* v : {&h.a, &h.s, &h.q, &h.Q, &h.A, &h.S, &h.Astar}) v->assign(H + 1, 0);

  for (Slot t = 1; t <= H; ++t) {
    Bits in = arrivals[t - 1];
    for (std::size_t i = 0; i < hops; ++i) {
      auto& h = tr.per_hop[i];
      Bits sv = services[i][t - 1];
      Bits prev = h.Q[t - 1];
      Bits now = std::max<Bits>(0, prev + in - sv);
      h.a[t] = in;
      h.s[t] = sv;
      h.Q[t] = now;
      h.q[t] = now - prev;
      h.A[t] = h.A[t - 1] + in;
      h.S[t] = h.S[t - 1] + sv;
      h.Astar[t] = h.A[t] - now;
      in = prev + in - now;
    }
  }
  return tr;
}

// Compact record of A1 and the per-hop backlogs over slots [first, first + len).
// This is what the estimators consume; a full TandemTrace converts to it.
struct BacklogPath {
  std::size_t hops = 0;
  Slot first = 0;
  std::vector<Bits> A1;     // A1[k] = A_1(first + k)
  std::vector<Bits> Q;      // Q[h * len + k] = Q_h(first + k)
  std::vector<Bits> total;  // sum over hops

  Slot len() const { return A1.size(); }
  Slot last() const { return first + len() - 1; }
  Bits arrivals(Slot t) const { return A1[t - first]; }
  Bits backlog(std::size_t h, Slot t) const { return Q[h * len() + (t - first)]; }
  Bits total_backlog(Slot t) const { return total[t - first]; }
};

inline BacklogPath to_backlog_path(const TandemTrace& tr, Slot from, Slot to) {
  if (from > to || to > tr.horizon()) throw RangeError("to_backlog_path: bad slot range");
  BacklogPath p;
  p.hops = tr.hops;
  p.first = from;
  Slot n = to - from + 1;
  p.A1.resize(n);
  p.total.assign(n, 0);
  p.Q.resize(n * tr.hops);
  for (Slot k = 0; k < n; ++k) p.A1[k] = tr.A1(from + k);
  for (std::size_t h = 0; h < tr.hops; ++h)
    for (Slot k = 0; k < n; ++k) {
      Bits q = tr.per_hop[h].Q[from + k];
      p.Q[h * n + k] = q;
      p.total[k] += q;
    }
  return p;
}

inline BacklogPath to_backlog_path(const TandemTrace& tr) { return to_backlog_path(tr, 0, tr.horizon()); }

// Lean simulation that only keeps A1 and backlogs (index 0 = time 0).
inline BacklogPath simulate_backlog(std::size_t hops, std::span<const Bits> arrivals,
                                    std::span<const std::vector<Bits>> services) {
  const Slot H = arrivals.size();
  detail::check_shapes(hops, H, services);
  BacklogPath p;
  p.hops = hops;
  p.first = 0;
  const Slot n = H + 1;
  p.A1.assign(n, 0);
  p.total.assign(n, 0);
  p.Q.assign(n * hops, 0);
  for (Slot t = 1; t <= H; ++t) {
    Bits in = arrivals[t - 1];
    p.A1[t] = p.A1[t - 1] + in;
    Bits sum = 0;
    for (std::size_t i = 0; i < hops; ++i) {
      Bits prev = p.Q[i * n + t - 1];
      Bits now = std::max<Bits>(0, prev + in - services[i][t - 1]);
      p.Q[i * n + t] = now;
      sum += now;
      in = prev + in - now;
    }
    p.total[t] = sum;
  }
  return p;
}

// Right-censored when no tau exists before the horizon; value then holds the
// remainder (last - t) that was searched.
struct Delay {
  Slot value = 0;
  bool censored = false;
};

// W(t) = min tau >= 0 with sum_i Q_i(t+tau) <= A1(t+tau) - A1(t).
template <class Path>
Delay delay_on(const Path& p, Slot t, Slot first, Slot last) {
  if (t < first || t > last) throw RangeError("delay: slot " + std::to_string(t) + " outside trace");
  const Bits base = p.A1(t);
  for (Slot u = t; u <= last; ++u)
    if (p.total_backlog(u) <= p.A1(u) - base) return {u - t, false};
  return {last - t, true};
}

inline Delay delay(const TandemTrace& tr, Slot t) {
  if (tr.per_hop.empty()) throw ShapeError("delay: empty trace");
  return delay_on(tr, t, 0, tr.horizon());
}

inline Delay delay(const BacklogPath& p, Slot t) {
  struct View {
    const BacklogPath& p;
    Bits A1(Slot u) const { return p.arrivals(u); }
    Bits total_backlog(Slot u) const { return p.total_backlog(u); }
  } v{p};
  return delay_on(v, t, p.first, p.last());
}

// Fraction with W >= wb; censored delays always count as exceeding.
inline bool exceeds(const Delay& d, Slot wb) { return d.censored || d.value >= wb; }

inline std::vector<double> delay_unreliability(std::span<const Delay> delays,
                                               std::span<const Slot> wb_grid) {
  if (delays.empty()) throw ShapeError("delay_unreliability: empty collection");
  std::vector<double> out;
  out.reserve(wb_grid.size());
  for (Slot wb : wb_grid) {
    std::size_t k = 0;
    for (const auto& d : delays) k += exceeds(d, wb) ? 1 : 0;
    out.push_back(static_cast<double>(k) / static_cast<double>(delays.size()));
  }
  return out;
}

inline std::vector<double> delay_unreliability(std::span<const TandemTrace> traces,
                                               std::span<const Slot> wb_grid, Slot t) {
  std::vector<Delay> d;
  d.reserve(traces.size());
  for (const auto& tr : traces) d.push_back(delay(tr, t));
  return delay_unreliability(d, wb_grid);
}

// Slots inside a busy period: Q(t-1) > 0 and Q(t) > 0, where q(t) = a(t) - s(t).
inline std::vector<Slot> busy_slots(const QueueTrace& h) {
  std::vector<Slot> out;
  for (Slot t = 1; t <= h.horizon(); ++t)
    if (h.Q[t - 1] > 0 && h.Q[t] > 0) out.push_back(t);
  return out;
}

}  // namespace mhd
