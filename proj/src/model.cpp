#include "nopo/model.hpp"

#include <cmath>

namespace nopo {

void NopoParams::validate() const {
  if (!(gamma_p > 0.0)) throw ConfigError("gamma_p must be > 0");
  if (!(gamma_s > 0.0)) throw ConfigError("gamma_s must be > 0");
  if (!(big_g > 0.0)) throw ConfigError("big_g must be > 0");
  if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
  if (gamma_i && !(*gamma_i > 0.0)) throw ConfigError("gamma_i must be > 0");
  if (kappa && !(*kappa > 0.0)) throw ConfigError("kappa must be > 0");
  if (gamma_i && kappa) {
    const double g_from_kappa = (*kappa) * (*kappa) / (*gamma_i);
    if (std::abs(g_from_kappa - big_g) > 1e-12 * std::abs(big_g)) {
      throw ConfigError("big_g inconsistent with kappa^2/gamma_i");
    }
  }
}

void NetworkConfig::validate() const {
  if (nodes.empty() || nodes.size() > 2) {
    throw ConfigError("network must have 1 or 2 nodes");
  }
  for (const auto& n : nodes) n.validate();
  if (coupling_j < 0.0) throw ConfigError("coupling_j must be >= 0");
  if (nodes.size() == 1 && coupling_j != 0.0) {
    throw ConfigError("coupling_j requires 2 nodes");
  }
}

double threshold_epsilon(const NopoParams& params) {
  return params.gamma_p * std::sqrt(params.gamma_s / params.big_g);
}

double normalized_pump(const NopoParams& params) {
  return params.epsilon / threshold_epsilon(params);
}

double epsilon_for_pump(const NopoParams& params, double target_p) {
  return target_p * threshold_epsilon(params);
}

double pump_schedule(double target_p, double t, double ramp_time) {
  if (t <= 0.0) return 0.0;
  return target_p * std::min(1.0, std::sqrt(t / ramp_time));
}

}  // namespace nopo
