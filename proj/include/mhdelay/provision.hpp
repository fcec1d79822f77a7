#pragma once

#include <cmath>
#include <string>

#include "bounds.hpp"
#include "core.hpp"

namespace mhd {

struct QosTarget {
  Slot wb = 1;  // delay bound, slots
  double wb_ms = 0.0;
  double epsilon = 1e-5;

  void validate() const {
    if (wb < 1) throw ConfigError("QosTarget: wb must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("QosTarget: epsilon must be in (0, 1)");
  }
};

enum class ProvisionBranch {
  magnitude,      // raw value negative, magnitude used
  target_met,     // epsilon >= E[exp(theta X)]: floored at the arrival rate
  below_arrival,  // magnitude below the arrival rate: floored
};

inline const char* to_string(ProvisionBranch b) {
  switch (b) {
    case ProvisionBranch::magnitude: return "magnitude";
    case ProvisionBranch::target_met: return "target_met";
    default: return "below_arrival";
  }
}

struct ProvisionResult {
  double c_bits_per_slot = 0.0;
  double raw_c = 0.0;  // (1/(theta w)) ln(eps / E[exp(theta X)])
  double theta = 0.0;
  double implied_backlog = 0.0;  // c * w
  double mean_arrival_rate = 0.0;
  Slot window = 0;
  ProvisionBranch branch = ProvisionBranch::magnitude;
};

// C = (1/(theta w)) ln(eps / E[exp(theta X_msb)]), w the X_msb window.
inline ProvisionResult minimum_service_rate(const XmsbEstimate& x, const QosTarget& target,
                                            double theta, double mean_arrival_rate) {
  if (!(theta > 0.0)) throw ConfigError("minimum_service_rate: theta must be > 0");
  target.validate();
  if (std::abs(theta - x.theta) > 1e-12 * theta)
    throw ConfigError("minimum_service_rate: X_msb estimate was taken at a different theta");
  ProvisionResult r;
  r.theta = theta;
  r.window = x.window;
  r.mean_arrival_rate = mean_arrival_rate;
  const double w = static_cast<double>(x.window);
  const double log_ratio = std::log(target.epsilon) - x.log_moment;
  r.raw_c = log_ratio / (theta * w);
  if (log_ratio >= 0.0) {
    r.branch = ProvisionBranch::target_met;
    r.c_bits_per_slot = mean_arrival_rate;
  } else {
    double c = std::abs(r.raw_c);
    r.branch = ProvisionBranch::magnitude;
    if (c < mean_arrival_rate) {
      r.branch = ProvisionBranch::below_arrival;
      c = mean_arrival_rate;
    }
    r.c_bits_per_slot = c;
  }
  r.implied_backlog = r.c_bits_per_slot * w;
  return r;
}

}  // namespace mhd
