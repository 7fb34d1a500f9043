#include "nopo/engines.hpp"

#include <cmath>

namespace nopo {

namespace {

constexpr double kDivergenceBound = 1e12;

void check_diverged(const TrajectoryState& s) {
  const double m =
      std::max({std::abs(s.alpha_p), std::abs(s.alpha_p_dag),
                std::abs(s.alpha_s), std::abs(s.alpha_s_dag),
                std::abs(s.alpha_i), std::abs(s.alpha_i_dag)});
  if (!(m < kDivergenceBound)) {
    throw Diverged("trajectory amplitude exceeded 1e12");
  }
}

}  // namespace

EffectiveGain effective_gain(const NopoParams& params, double epsilon_t,
                             cd ns_product) {
  EffectiveGain g;
  const double e2g = epsilon_t * epsilon_t * params.big_g;
  g.big_gamma_p = params.gamma_p + params.big_g * ns_product;
  const cd gp2 = g.big_gamma_p * g.big_gamma_p;
  const cd gp3 = gp2 * g.big_gamma_p;
  g.g_e = e2g / gp2;
  g.f_e = 2.0 * e2g * params.big_g / gp3;
  g.g_f = e2g * params.gamma_p / gp3;
  return g;
}

PsdeFullNoise draw_psde_full_noise(TrajectoryRng& rng, double sqrt_dt) {
  return {rng.complex_increment(sqrt_dt), rng.complex_increment(sqrt_dt)};
}

TpsdeNoise draw_tpsde_noise(TrajectoryRng& rng, double sqrt_dt) {
  TpsdeNoise n;
  n.dw_c = rng.complex_increment(sqrt_dt);
  n.dw_r = rng.real_increment(sqrt_dt);
  n.dw_r_dag = rng.real_increment(sqrt_dt);
  return n;
}

TwsdeNoise draw_twsde_noise(TrajectoryRng& rng, double sqrt_dt,
                            bool with_coupling) {
  TwsdeNoise n;
  n.dw_c = rng.complex_increment(sqrt_dt);
  if (with_coupling) n.dw_j = rng.complex_increment(sqrt_dt);
  return n;
}

IdlerNoise draw_idler_noise(TrajectoryRng& rng, double sqrt_dt) {
  return {rng.complex_increment(sqrt_dt), rng.complex_increment(sqrt_dt)};
}

TrajectoryState step_psde_full(const TrajectoryState& state,
                               const NopoParams& params, double epsilon_t,
                               double coupling_j,
                               const TrajectoryState& partner, double dt,
                               const PsdeFullNoise& noise) {
  const double gp = params.gamma_p, gs = params.gamma_s, g = params.big_g;
  const cd ns = state.alpha_s_dag * state.alpha_s;   // signal "number"
  const cd np = state.alpha_p_dag * state.alpha_p;   // pump "number"
  const double half_g = std::sqrt(0.5 * g);

  TrajectoryState out = state;
  out.alpha_p += dt * (-gp * state.alpha_p + epsilon_t -
                       g * (1.0 + ns) * state.alpha_p) -
                 half_g * state.alpha_s * std::conj(noise.dw_c);
  out.alpha_p_dag += dt * (-gp * state.alpha_p_dag + epsilon_t -
                           g * (1.0 + ns) * state.alpha_p_dag) -
                     half_g * state.alpha_s_dag * std::conj(noise.dw_c_dag);
  // Same complex increments reused across the four equations: the signal
  // noise correlates with the pump noise through the cross-diffusion.
  out.alpha_s += dt * (-gs * state.alpha_s + g * np * state.alpha_s -
                       coupling_j * (state.alpha_s - partner.alpha_s)) +
                 half_g * state.alpha_p *
                     (noise.dw_c + std::conj(noise.dw_c_dag));
  out.alpha_s_dag +=
      dt * (-gs * state.alpha_s_dag + g * np * state.alpha_s_dag -
            coupling_j * (state.alpha_s_dag - partner.alpha_s_dag)) +
      half_g * state.alpha_p_dag * (noise.dw_c_dag + std::conj(noise.dw_c));
  check_diverged(out);
  return out;
}

TrajectoryState step_tpsde(const TrajectoryState& state,
                           const NopoParams& params, double epsilon_t,
                           double coupling_j, const TrajectoryState& partner,
                           double dt, const TpsdeNoise& noise,
                           StepDiagnostics* diag) {
  const cd ns = state.alpha_s_dag * state.alpha_s;
  const EffectiveGain gain = effective_gain(params, epsilon_t, ns);
  if (diag && gain.g_f.real() < 0.0) ++diag->negative_gain_floor;
  const cd sqrt_gf = std::sqrt(gain.g_f);
  const cd sqrt_fe = std::sqrt(gain.f_e);
  const cd i(0.0, 1.0);

  TrajectoryState out = state;
  out.alpha_s +=
      dt * ((-params.gamma_s + gain.g_e) * state.alpha_s -
            coupling_j * (state.alpha_s - partner.alpha_s)) +
      sqrt_gf * noise.dw_c + i * sqrt_fe * state.alpha_s * noise.dw_r;
  out.alpha_s_dag +=
      dt * ((-params.gamma_s + gain.g_e) * state.alpha_s_dag -
            coupling_j * (state.alpha_s_dag - partner.alpha_s_dag)) +
      sqrt_gf * std::conj(noise.dw_c) -
      i * sqrt_fe * state.alpha_s_dag * noise.dw_r_dag;
  check_diverged(out);
  return out;
}

TrajectoryState step_twsde(const TrajectoryState& state,
                           const NopoParams& params, double epsilon_t,
                           double coupling_j, const TrajectoryState& partner,
                           double dt, const TwsdeNoise& noise,
                           double coupling_noise_sign) {
  const double n = std::norm(state.alpha_s);
  const double gamma_big = params.gamma_p + params.big_g * n;
  const double g_e =
      epsilon_t * epsilon_t * params.big_g / (gamma_big * gamma_big);

  TrajectoryState out = state;
  out.alpha_s += dt * ((-params.gamma_s + g_e) * state.alpha_s -
                       coupling_j * (state.alpha_s - partner.alpha_s)) +
                 std::sqrt(0.5 * (params.gamma_s + g_e)) * noise.dw_c +
                 coupling_noise_sign * std::sqrt(0.5 * coupling_j) *
                     noise.dw_j;
  out.alpha_s_dag = std::conj(out.alpha_s);
  check_diverged(out);
  return out;
}

TrajectoryState step_idler_psde(const TrajectoryState& state,
                                const NopoParams& params, double epsilon_t,
                                double dt, const IdlerNoise& noise,
                                DiffusionGauge gauge, StepDiagnostics* diag) {
  if (!params.kappa || !params.gamma_i) {
    throw ConfigError("idler-psde requires kappa and gamma_i");
  }
  const double kappa = *params.kappa;
  const double gi = *params.gamma_i;
  const double gp = params.gamma_p, gs = params.gamma_s;

  TrajectoryState out = state;
  out.alpha_p += dt * (-gp * state.alpha_p + epsilon_t -
                       kappa * state.alpha_s * state.alpha_i);
  out.alpha_p_dag += dt * (-gp * state.alpha_p_dag + epsilon_t -
                           kappa * state.alpha_s_dag * state.alpha_i_dag);
  out.alpha_s += dt * (-gs * state.alpha_s +
                       kappa * state.alpha_i_dag * state.alpha_p);
  out.alpha_s_dag += dt * (-gs * state.alpha_s_dag +
                           kappa * state.alpha_i * state.alpha_p_dag);
  out.alpha_i += dt * (-gi * state.alpha_i +
                       kappa * state.alpha_s_dag * state.alpha_p);
  out.alpha_i_dag += dt * (-gi * state.alpha_i_dag +
                           kappa * state.alpha_s * state.alpha_p_dag);

  if (gauge == DiffusionGauge::Standard) {
    // Multiplicative noise sqrt(kappa alpha_p / 2): complex argument, the
    // principal branch is taken and counted in the diagnostics.
    const cd root = std::sqrt(0.5 * kappa * state.alpha_p);
    const cd root_dag = std::sqrt(0.5 * kappa * state.alpha_p_dag);
    if (diag && (state.alpha_p.imag() != 0.0 ||
                 state.alpha_p.real() < 0.0 ||
                 state.alpha_p_dag.imag() != 0.0 ||
                 state.alpha_p_dag.real() < 0.0)) {
      ++diag->complex_sqrt_branch;
    }
    out.alpha_s += root * noise.dw_c;
    out.alpha_i += root * std::conj(noise.dw_c);
    out.alpha_s_dag += root_dag * noise.dw_c_dag;
    out.alpha_i_dag += root_dag * std::conj(noise.dw_c_dag);
  } else {
    const double g_eff = kappa * kappa / gi;
    const double root_s = std::sqrt(0.5 * g_eff);
    const double root_i = std::sqrt(0.5 * gi);
    out.alpha_s += root_s * state.alpha_p * noise.dw_c;
    out.alpha_i += root_i * std::conj(noise.dw_c);
    out.alpha_s_dag += root_s * state.alpha_p_dag * noise.dw_c_dag;
    out.alpha_i_dag += root_i * std::conj(noise.dw_c_dag);
  }
  check_diverged(out);
  return out;
}

}  // namespace nopo
