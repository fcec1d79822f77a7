#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "montecarlo.hpp"

namespace mhd {

// Scenario file: `[section]` headers and `key = value` lines, `#` comments.
// Sections: scenario, traffic, channel (defaults for every hop),
// channel.hop.N (1-based overrides), qos, solver.
struct RunConfig {
  Scenario scenario;
  std::vector<double> provision_traffic_mbps;
  std::vector<double> provision_wb_ms;
};

namespace cfg {

struct Entry {
  std::string value;
  int line = 0;
};

struct Document {
  std::string source = "<config>";
  std::map<std::string, std::map<std::string, Entry>> sections;
};

inline std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string where(const Document& d, int line) {
  if (line == 0) return d.source + " (override or default): ";
  return d.source + ":" + std::to_string(line) + ": ";
}

inline Document parse_text(const std::string& text, const std::string& source = "<config>") {
  Document d;
  d.source = source;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where(d, line) + "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(where(d, line) + "empty section name");
      d.sections[section];
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where(d, line) + "expected key = value");
    if (section.empty()) throw ConfigError(where(d, line) + "key outside of any section");
    std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(where(d, line) + "empty key");
    auto& sec = d.sections[section];
    if (sec.count(key)) throw ConfigError(where(d, line) + "duplicate key '" + section + "." + key + "'");
    sec[key] = {val, line};
  }
  return d;
}

inline Document parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str(), path);
}

// `section.key=value`; the section may itself contain dots (channel.hop.2.bandwidth_hz).
inline void apply_override(Document& d, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + kv + "': expected key=value");
  std::string path = trim(kv.substr(0, eq)), val = trim(kv.substr(eq + 1));
  auto dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw ConfigError("override '" + kv + "': key must be section.key");
  d.sections[path.substr(0, dot)][path.substr(dot + 1)] = {val, 0};
}

inline double to_double(const Document& d, const std::string& key, const Entry& e) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || p != e.value.data() + e.value.size() || !std::isfinite(v))
    throw ConfigError(where(d, e.line) + "key '" + key + "': expected a number, got '" + e.value + "'");
  return v;
}

inline std::uint64_t to_uint(const Document& d, const std::string& key, const Entry& e) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || p != e.value.data() + e.value.size())
    throw ConfigError(where(d, e.line) + "key '" + key + "': expected a non-negative integer, got '" +
                      e.value + "'");
  return v;
}

inline bool to_bool(const Document& d, const std::string& key, const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError(where(d, e.line) + "key '" + key + "': expected true/false, got '" + e.value + "'");
}

inline std::vector<double> to_list(const Document& d, const std::string& key, const Entry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double(d, key, {item, e.line}));
  }
  return out;
}

// Typed, checked access to one section; unknown keys are reported by finish().
class Section {
 public:
  Section(const Document& d, const std::string& name) : d_(d), name_(name) {
    auto it = d.sections.find(name);
    if (it != d.sections.end()) s_ = &it->second;
  }

  const Entry* find(const std::string& key) {
    used_.push_back(key);
    if (!s_) return nullptr;
    auto it = s_->find(key);
    return it == s_->end() ? nullptr : &it->second;
  }
  std::string full(const std::string& key) const { return name_ + "." + key; }

  void get(const std::string& k, double& v) { if (auto e = find(k)) v = to_double(d_, full(k), *e); }
  void get(const std::string& k, bool& v) { if (auto e = find(k)) v = to_bool(d_, full(k), *e); }
  void get(const std::string& k, std::string& v) { if (auto e = find(k)) v = e->value; }
  void get(const std::string& k, std::vector<double>& v) { if (auto e = find(k)) v = to_list(d_, full(k), *e); }
  template <class U>
    requires std::is_integral_v<U>
  void get(const std::string& k, U& v) {
    if (auto e = find(k)) v = static_cast<U>(to_uint(d_, full(k), *e));
  }

  template <class E>
  void get_enum(const std::string& k, E& v, std::initializer_list<std::pair<const char*, E>> names) {
    auto e = find(k);
    if (!e) return;
    for (auto& [n, val] : names)
      if (e->value == n) {
        v = val;
        return;
      }
    std::string opts;
    for (auto& [n, val] : names) opts += std::string(opts.empty() ? "" : ", ") + n;
    throw ConfigError(where(d_, e->line) + "key '" + full(k) + "': expected one of {" + opts + "}, got '" +
                      e->value + "'");
  }

  int line_of(const std::string& k) const {
    if (!s_) return 0;
    auto it = s_->find(k);
    return it == s_->end() ? 0 : it->second.line;
  }

  void finish() const {
    if (!s_) return;
    for (const auto& [k, e] : *s_)
      if (std::find(used_.begin(), used_.end(), k) == used_.end())
        throw ConfigError(where(d_, e.line) + "unknown key '" + full(k) + "'");
  }

 private:
  const Document& d_;
  std::string name_;
  const std::map<std::string, Entry>* s_ = nullptr;
  std::vector<std::string> used_;
};

inline void read_channel(Section& s, ChannelConfig& c) {
  s.get_enum("los", c.los, {{"LOS", LinkState::LOS}, {"NLOS", LinkState::NLOS},
                            {"probabilistic", LinkState::probabilistic}});
  s.get("carrier_frequency_ghz", c.carrier_frequency_ghz);
  s.get("bs_height_m", c.bs_height_m);
  s.get("ut_height_m", c.ut_height_m);
  s.get("inter_site_distance_m", c.inter_site_distance_m);
  s.get("street_width_m", c.street_width_m);
  s.get("building_height_m", c.building_height_m);
  s.get("shadow_sigma_db", c.shadow_sigma_db);
  s.get("link_distance_m", c.link_distance_m);
  s.get("tx_power_dbm", c.tx_power_dbm);
  s.get("noise_density_dbm_hz", c.noise_density_dbm_hz);
  s.get("bandwidth_hz", c.bandwidth_hz);
  s.get("interferer_powers_dbm", c.interferer_powers_dbm);
}

inline ChannelModel peek_model(Section& s, ChannelModel fallback) {
  ChannelModel m = fallback;
  s.get_enum("model", m, {{"UMa", ChannelModel::UMa}, {"UMi", ChannelModel::UMi}});
  return m;
}

inline Slot ms_to_slots(const Document& d, const std::string& key, int line, double ms, double slot_ms) {
  double x = ms / slot_ms;
  double r = std::round(x);
  if (std::abs(x - r) > 1e-9 * std::max(1.0, x) || r < 1.0)
    throw ConfigError(where(d, line) + "key '" + key + "': " + std::to_string(ms) +
                      " ms is not a positive whole number of slots");
  return static_cast<Slot>(r);
}

}  // namespace cfg

inline RunConfig build_config(const cfg::Document& d) {
  using namespace cfg;
  for (const auto& [name, sec] : d.sections) {
    bool known = name == "scenario" || name == "traffic" || name == "channel" || name == "qos" ||
                 name == "solver" || name.rfind("channel.hop.", 0) == 0;
    if (!known) {
      int line = sec.empty() ? 0 : sec.begin()->second.line;
      throw ConfigError(where(d, line) + "unknown section [" + name + "]");
    }
  }

  RunConfig rc;
  Scenario& s = rc.scenario;

  Section sc(d, "scenario");
  double slot_ms = 0.5;
  sc.get("id", s.id);
  sc.get("hops", s.hops);
  sc.get("slot_ms", slot_ms);
  sc.get("realizations", s.realizations);
  sc.get("master_seed", s.master_seed);
  sc.get("horizon", s.horizon);
  sc.get("warmup", s.warmup);
  sc.get("analysis_slot", s.analysis_slot);
  sc.get("estimation_fraction", s.estimation_fraction);
  sc.finish();
  if (!(slot_ms > 0.0)) throw ConfigError(where(d, sc.line_of("slot_ms")) + "scenario.slot_ms must be > 0");
  s.slot_seconds = slot_ms * 1e-3;
  if (s.hops < 1 || s.hops > 16)
    throw ConfigError(where(d, sc.line_of("hops")) + "scenario.hops must be in [1, 16]");
  if (s.realizations < 100)
    throw ConfigError(where(d, sc.line_of("realizations")) + "scenario.realizations must be >= 100");

  Section tr(d, "traffic");
  double mbps = 16.0, rate_bits = 0.0, request_rate = 1.0;
  BurstDistribution burst = BurstDistribution::fixed;
  tr.get("rate_mbps", mbps);
  tr.get("mean_rate_bits_per_slot", rate_bits);
  tr.get("request_rate", request_rate);
  tr.get_enum("burst", burst, {{"fixed", BurstDistribution::fixed}, {"exponential", BurstDistribution::exponential}});
  tr.finish();
  if (rate_bits <= 0.0) rate_bits = bits_per_slot(mbps, s.slot_seconds);
  s.traffic = TrafficConfig::from_rate(rate_bits, request_rate, burst);
  if (!(rate_bits > 0.0) || !(request_rate > 0.0))
    throw ConfigError(where(d, tr.line_of("request_rate")) + "traffic rates must be > 0");

  Section ch(d, "channel");
  ChannelModel base_model = peek_model(ch, ChannelModel::UMa);
  for (std::size_t h = 1; h <= s.hops; ++h) {
    Section hs(d, "channel.hop." + std::to_string(h));
    ChannelModel m = peek_model(hs, base_model);
    ChannelConfig c = ChannelConfig::defaults_for(m);
    Section chh(d, "channel");
    peek_model(chh, base_model);
    read_channel(chh, c);
    read_channel(hs, c);
    hs.finish();
    if (h == 1) chh.finish();
    s.channels.push_back(c);
  }
  for (const auto& [name, sec] : d.sections)
    if (name.rfind("channel.hop.", 0) == 0) {
      auto idx = name.substr(12);
      std::size_t n = 0;
      auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), n);
      if (ec != std::errc() || p != idx.data() + idx.size() || n < 1 || n > s.hops) {
        int line = sec.empty() ? 0 : sec.begin()->second.line;
        throw ConfigError(where(d, line) + "section [" + name + "] does not match a hop in 1.." +
                          std::to_string(s.hops));
      }
    }

  Section q(d, "qos");
  std::vector<double> wb_ms, wb_slots;
  q.get("wb_ms", wb_ms);
  q.get("wb_slots", wb_slots);
  q.get("epsilon", s.epsilon);
  q.get_enum("backlog_mode", s.backlog_mode,
             {{"per_realization", BacklogMode::per_realization}, {"mean", BacklogMode::mean}});
  q.get("provision_traffic_mbps", rc.provision_traffic_mbps);
  q.get("provision_wb_ms", rc.provision_wb_ms);
  q.finish();
  if (!wb_ms.empty() && !wb_slots.empty())
    throw ConfigError(where(d, q.line_of("wb_slots")) + "give either qos.wb_ms or qos.wb_slots, not both");
  for (double v : wb_ms) s.wb_grid.push_back(ms_to_slots(d, "qos.wb_ms", q.line_of("wb_ms"), v, slot_ms));
  for (double v : wb_slots) {
    if (v < 1 || v != std::floor(v))
      throw ConfigError(where(d, q.line_of("wb_slots")) + "qos.wb_slots entries must be positive integers");
    s.wb_grid.push_back(static_cast<Slot>(v));
  }
  if (s.wb_grid.empty()) throw ConfigError(d.source + ": missing key 'qos.wb_ms'");
  if (!(s.epsilon > 0.0 && s.epsilon < 1.0))
    throw ConfigError(where(d, q.line_of("epsilon")) + "qos.epsilon must be in (0, 1)");
  for (double v : rc.provision_wb_ms) ms_to_slots(d, "qos.provision_wb_ms", q.line_of("provision_wb_ms"), v, slot_ms);

  Section so(d, "solver");
  so.get("theta_min", s.solver.theta_min);
  so.get("theta_max", s.solver.theta_max);
  so.get("rel_tol", s.solver.rel_tol);
  so.get("verify_interval", s.solver.verify_interval);
  so.get("compare_uncapped", s.compare_uncapped);
  so.get_enum("theta_mode", s.theta_mode, {{"per_grid", ThetaMode::per_grid}, {"fixed", ThetaMode::fixed}});
  so.finish();
  if (!(s.solver.theta_min > 0.0 && s.solver.theta_max > s.solver.theta_min))
    throw ConfigError(where(d, so.line_of("theta_max")) + "solver bracket must satisfy 0 < theta_min < theta_max");
  if (!(s.solver.rel_tol > 0.0)) throw ConfigError(where(d, so.line_of("rel_tol")) + "solver.rel_tol must be > 0");

  s.apply_defaults();
  try {
    s.validate();
  } catch (const ConfigError& e) {
    int line = 0;
    std::string msg = e.what();
    if (msg.find("horizon") != std::string::npos) line = sc.line_of("horizon");
    else if (msg.find("analysis_slot") != std::string::npos) line = sc.line_of("analysis_slot");
    else if (msg.find("wb") != std::string::npos) line = q.line_of(wb_ms.empty() ? "wb_slots" : "wb_ms");
    else if (msg.find("estimation") != std::string::npos) line = sc.line_of("estimation_fraction");
    throw ConfigError(where(d, line) + msg);
  }
  return rc;
}

inline RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  auto d = cfg::parse_file(path);
  for (const auto& o : overrides) cfg::apply_override(d, o);
  return build_config(d);
}

inline RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {}) {
  auto d = cfg::parse_text(text);
  for (const auto& o : overrides) cfg::apply_override(d, o);
  return build_config(d);
}

// ---- resolved config, re-parseable ----

inline std::string fmt_num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_num(v[i]);
  return s;
}

inline std::string to_config_text(const RunConfig& rc) {
  const Scenario& s = rc.scenario;
  std::ostringstream o;
  o << "[scenario]\n"
    << "id = " << s.id << "\n"
    << "hops = " << s.hops << "\n"
    << "slot_ms = " << fmt_num(s.slot_ms()) << "\n"
    << "realizations = " << s.realizations << "\n"
    << "master_seed = " << s.master_seed << "\n"
    << "horizon = " << s.horizon << "\n"
    << "warmup = " << s.warmup << "\n"
    << "analysis_slot = " << s.analysis_slot << "\n"
    << "estimation_fraction = " << fmt_num(s.estimation_fraction) << "\n\n"
    << "[traffic]\n"
    << "mean_rate_bits_per_slot = " << fmt_num(s.traffic.mean_rate_bits_per_slot) << "\n"
    << "request_rate = " << fmt_num(s.traffic.request_rate) << "\n"
    << "burst = " << to_string(s.traffic.burst) << "\n";
  for (std::size_t h = 0; h < s.channels.size(); ++h) {
    const auto& c = s.channels[h];
    o << "\n[channel.hop." << h + 1 << "]\n"
      << "model = " << to_string(c.model) << "\n"
      << "los = " << to_string(c.los) << "\n"
      << "carrier_frequency_ghz = " << fmt_num(c.carrier_frequency_ghz) << "\n"
      << "bs_height_m = " << fmt_num(c.bs_height_m) << "\n"
      << "ut_height_m = " << fmt_num(c.ut_height_m) << "\n"
      << "inter_site_distance_m = " << fmt_num(c.inter_site_distance_m) << "\n"
      << "street_width_m = " << fmt_num(c.street_width_m) << "\n"
      << "building_height_m = " << fmt_num(c.building_height_m) << "\n"
      << "shadow_sigma_db = " << fmt_num(c.shadow_sigma_db) << "\n"
      << "link_distance_m = " << fmt_num(c.link_distance_m) << "\n"
      << "tx_power_dbm = " << fmt_num(c.tx_power_dbm) << "\n"
      << "noise_density_dbm_hz = " << fmt_num(c.noise_density_dbm_hz) << "\n"
      << "bandwidth_hz = " << fmt_num(c.bandwidth_hz) << "\n";
    if (!c.interferer_powers_dbm.empty())
      o << "interferer_powers_dbm = " << fmt_list(c.interferer_powers_dbm) << "\n";
  }
  std::vector<double> grid(s.wb_grid.begin(), s.wb_grid.end());
  o << "\n[qos]\n"
    << "wb_slots = " << fmt_list(grid) << "\n"
    << "epsilon = " << fmt_num(s.epsilon) << "\n"
    << "backlog_mode = " << to_string(s.backlog_mode) << "\n";
  if (!rc.provision_traffic_mbps.empty())
    o << "provision_traffic_mbps = " << fmt_list(rc.provision_traffic_mbps) << "\n";
  if (!rc.provision_wb_ms.empty()) o << "provision_wb_ms = " << fmt_list(rc.provision_wb_ms) << "\n";
  o << "\n[solver]\n"
    << "theta_min = " << fmt_num(s.solver.theta_min) << "\n"
    << "theta_max = " << fmt_num(s.solver.theta_max) << "\n"
    << "rel_tol = " << fmt_num(s.solver.rel_tol) << "\n"
    << "verify_interval = " << (s.solver.verify_interval ? "true" : "false") << "\n"
    << "compare_uncapped = " << (s.compare_uncapped ? "true" : "false") << "\n"
    << "theta_mode = " << to_string(s.theta_mode) << "\n";
  return o.str();
}

}  // namespace mhd
