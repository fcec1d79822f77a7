#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "core.hpp"

namespace mhd {

enum class ChannelModel { UMa, UMi };
enum class LinkState { LOS, NLOS, probabilistic };

inline const char* to_string(ChannelModel m) { return m == ChannelModel::UMa ? "UMa" : "UMi"; }
inline const char* to_string(LinkState s) {
  switch (s) {
    case LinkState::LOS: return "LOS";
    case LinkState::NLOS: return "NLOS";
    default: return "probabilistic";
  }
}

struct ChannelConfig {
  ChannelModel model = ChannelModel::UMa;
  double carrier_frequency_ghz = 28.0;
  double bs_height_m = 25.0;
  double ut_height_m = 1.5;
  double inter_site_distance_m = 500.0;
  double street_width_m = 20.0;     // carried, unused by the UMa/UMi formulas
  double building_height_m = 20.0;  // carried, unused by the UMa/UMi formulas
  double shadow_sigma_db = 8.2;
  double link_distance_m = 200.0;
  LinkState los = LinkState::LOS;
  double tx_power_dbm = 30.0;
  double noise_density_dbm_hz = -174.0;
  double bandwidth_hz = 2e6;
  std::vector<double> interferer_powers_dbm;
  std::uint64_t seed = 1;

  static ChannelConfig defaults_for(ChannelModel m) {
    ChannelConfig c;
    c.model = m;
    if (m == ChannelModel::UMi) {
      c.bs_height_m = 10.0;
      c.shadow_sigma_db = 7.8;
      c.inter_site_distance_m = 200.0;
    }
    return c;
  }

  void validate() const {
    if (!(carrier_frequency_ghz > 0.0)) throw ConfigError("channel.carrier_frequency_ghz must be > 0");
    if (!(bs_height_m > 0.0)) throw ConfigError("channel.bs_height_m must be > 0");
    if (!(ut_height_m > 0.0)) throw ConfigError("channel.ut_height_m must be > 0");
    if (!(shadow_sigma_db >= 0.0)) throw ConfigError("channel.shadow_sigma_db must be >= 0");
    if (!(link_distance_m > 0.0)) throw ConfigError("channel.link_distance_m must be > 0");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("channel.bandwidth_hz must be > 0");
  }
};

namespace detail {

inline constexpr double kLightSpeed = 3.0e8;

inline double breakpoint_m(const ChannelConfig& c) {
  const double h_e = 1.0;
  return 4.0 * (c.bs_height_m - h_e) * (c.ut_height_m - h_e) * c.carrier_frequency_ghz * 1e9 /
         kLightSpeed;
}

inline double d3d(const ChannelConfig& c, double d2d) {
  double dh = c.bs_height_m - c.ut_height_m;
  return std::sqrt(d2d * d2d + dh * dh);
}

inline double los_uma(const ChannelConfig& c, double d2d) {
  double d = d3d(c, d2d), fc = c.carrier_frequency_ghz, bp = breakpoint_m(c);
  if (d2d <= bp) return 28.0 + 22.0 * std::log10(d) + 20.0 * std::log10(fc);
  double dh = c.bs_height_m - c.ut_height_m;
  return 28.0 + 40.0 * std::log10(d) + 20.0 * std::log10(fc) - 9.0 * std::log10(bp * bp + dh * dh);
}

inline double los_umi(const ChannelConfig& c, double d2d) {
  double d = d3d(c, d2d), fc = c.carrier_frequency_ghz, bp = breakpoint_m(c);
  if (d2d <= bp) return 32.4 + 21.0 * std::log10(d) + 20.0 * std::log10(fc);
  double dh = c.bs_height_m - c.ut_height_m;
  return 32.4 + 40.0 * std::log10(d) + 20.0 * std::log10(fc) - 9.5 * std::log10(bp * bp + dh * dh);
}

inline double nlos_uma(const ChannelConfig& c, double d2d) {
  double d = d3d(c, d2d), fc = c.carrier_frequency_ghz;
  double pl = 13.54 + 39.08 * std::log10(d) + 20.0 * std::log10(fc) - 0.6 * (c.ut_height_m - 1.5);
  return std::max(los_uma(c, d2d), pl);
}

inline double nlos_umi(const ChannelConfig& c, double d2d) {
  double d = d3d(c, d2d), fc = c.carrier_frequency_ghz;
  double pl = 35.3 * std::log10(d) + 22.4 + 21.3 * std::log10(fc) - 0.3 * (c.ut_height_m - 1.5);
  return std::max(los_umi(c, d2d), pl);
}

}  // namespace detail

// TR 38.901 Table 7.4.1-1, UMa and UMi street canyon; distance is 2D ground distance.
inline double path_loss_db(const ChannelConfig& c, double distance_m, LinkState los) {
  if (!(distance_m >= 10.0) || distance_m > 5000.0)
    throw RangeError("path_loss_db: distance " + std::to_string(distance_m) +
                     " m outside [10, 5000] m");
  if (c.carrier_frequency_ghz < 0.5 || c.carrier_frequency_ghz > 100.0)
    throw RangeError("path_loss_db: carrier frequency outside [0.5, 100] GHz");
  if (c.ut_height_m < 1.5 || c.ut_height_m > 22.5)
    throw RangeError("path_loss_db: UT height outside [1.5, 22.5] m");
  if (c.ut_height_m <= 1.0 || c.bs_height_m <= c.ut_height_m)
    throw RangeError("path_loss_db: BS height must exceed UT height");
  if (los == LinkState::probabilistic)
    throw RangeError("path_loss_db: resolve LOS state before evaluating path loss");
  bool l = los == LinkState::LOS;
  if (c.model == ChannelModel::UMa) return l ? detail::los_uma(c, distance_m) : detail::nlos_uma(c, distance_m);
  return l ? detail::los_umi(c, distance_m) : detail::nlos_umi(c, distance_m);
}

// TR 38.901 Table 7.4.2-1 (UT below 13 m, so C'(h_UT) = 0 for UMa).
inline double los_probability(const ChannelConfig& c, double d2d) {
  if (d2d <= 18.0) return 1.0;
  double near = 18.0 / d2d;
  double scale = c.model == ChannelModel::UMa ? 63.0 : 36.0;
  double p = near + std::exp(-d2d / scale) * (1.0 - near);
  if (c.model == ChannelModel::UMa && c.ut_height_m > 13.0) {
    double cp = std::pow((c.ut_height_m - 13.0) / 10.0, 1.5);
    p *= 1.0 + cp * 1.25 * std::pow(d2d / 100.0, 3.0) * std::exp(-d2d / 150.0);
  }
  return std::min(1.0, p);
}

// Mean-free SINR in dB for a LOS state (no shadowing).
inline double median_sinr_db(const ChannelConfig& c, LinkState los) {
  double rx_mw = db::dbm_to_mw(c.tx_power_dbm - path_loss_db(c, c.link_distance_m, los));
  double n_mw = db::dbm_to_mw(db::noise_dbm(c.noise_density_dbm_hz, c.bandwidth_hz));
  double i_mw = db::sum_mw(c.interferer_powers_dbm);
  return db::from_linear(rx_mw / (n_mw + i_mw));
}

// Per-slot capacity for a given SINR in dB, floored to whole bits.
inline Bits capacity_bits(double bandwidth_hz, double sinr_db, double slot_seconds) {
  return static_cast<Bits>(
      std::floor(bandwidth_hz * std::log2(1.0 + db::to_linear(sinr_db)) * slot_seconds));
}

inline void draw_service_into(const ChannelConfig& c, double slot_seconds, std::span<Bits> out) {
  std::mt19937_64 rng(c.seed);
  boost::random::normal_distribution<double> shadow(0.0, 1.0);
  boost::random::uniform_01<double> u;
  const double sinr_los = median_sinr_db(c, LinkState::LOS);
  const double sinr_nlos = c.los == LinkState::LOS ? sinr_los : median_sinr_db(c, LinkState::NLOS);
  const double p_los = c.los == LinkState::probabilistic ? los_probability(c, c.link_distance_m) : 0.0;
  for (auto& s : out) {
    double base = sinr_los;
    if (c.los == LinkState::NLOS) base = sinr_nlos;
    else if (c.los == LinkState::probabilistic) base = u(rng) < p_los ? sinr_los : sinr_nlos;
    double x = c.shadow_sigma_db > 0.0 ? c.shadow_sigma_db * shadow(rng) : 0.0;
    s = capacity_bits(c.bandwidth_hz, base - x, slot_seconds);
  }
}

inline std::vector<Bits> draw_service(const ChannelConfig& c, Slot horizon, double slot_seconds) {
  c.validate();
  if (horizon < 1) throw ConfigError("draw_service: horizon must be >= 1");
  if (!(slot_seconds > 0.0)) throw ConfigError("draw_service: slot_seconds must be > 0");
  std::vector<Bits> out(horizon);
  draw_service_into(c, slot_seconds, out);
  return out;
}

struct ServiceProcess {
  std::vector<std::vector<Bits>> per_hop;
};

inline ServiceProcess draw_services(std::span<const ChannelConfig> hops, Slot horizon,
                                    double slot_seconds) {
  ServiceProcess sp;
  sp.per_hop.reserve(hops.size());
  for (const auto& c : hops) sp.per_hop.push_back(draw_service(c, horizon, slot_seconds));
  return sp;
}

}  // namespace mhd
