#pragma once

#include <optional>
#include <vector>

#include "nopo/errors.hpp"

namespace nopo {

// Physical rates of one oscillator. All rates are expressed in units of the
// signal cavity linewidth gamma_s (HWHM), which is the base time unit and is
// kept at 1 internally.
struct NopoParams {
  double gamma_p = 0.0;  // pump cavity HWHM
  double gamma_s = 1.0;  // signal cavity HWHM (normalization unit)
  double big_g = 0.0;    // gain per pump photon
  double epsilon = 0.0;  // coherent pump drive
  // Only used by the explicit-idler engine.
  std::optional<double> gamma_i;  // idler HWHM
  std::optional<double> kappa;    // three-wave coupling

  // Throws ConfigError on violated invariants. When both kappa and gamma_i
  // are present, big_g must equal kappa^2/gamma_i to 1e-12 relative.
  void validate() const;
};

// One or two oscillators sharing a dissipative loss channel
// sqrt(J)(a_s1 - a_s2). Only the ferromagnetic sign is supported.
struct NetworkConfig {
  std::vector<NopoParams> nodes;
  double coupling_j = 0.0;

  void validate() const;
  bool is_pair() const { return nodes.size() == 2; }
};

// Oscillation threshold drive: gamma_p * sqrt(gamma_s / G).
double threshold_epsilon(const NopoParams& params);

// Normalized pump rate p = epsilon / threshold_epsilon; p = 1 at threshold.
double normalized_pump(const NopoParams& params);

// Drive for a target normalized pump p.
double epsilon_for_pump(const NopoParams& params, double target_p);

// Adiabatic turn-on: target_p * min(1, sqrt(t / ramp_time)). Constant after
// t = ramp_time.
double pump_schedule(double target_p, double t, double ramp_time);

}  // namespace nopo
