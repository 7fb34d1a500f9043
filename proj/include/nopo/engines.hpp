#pragma once

#include <complex>
#include <cstdint>

#include "nopo/model.hpp"
#include "nopo/rng.hpp"

namespace nopo {

using cd = std::complex<double>;

enum class Engine {
  PsdeFull,   // positive-P with explicit pump mode
  Tpsde,      // truncated positive-P, pump eliminated
  Twsde,      // truncated Wigner, pump eliminated
  IdlerPsde,  // positive-P with explicit pump and idler modes (solitary)
  FockSingle,
  FockPair,
  FockDirect,
};

enum class DiffusionGauge { Standard, PumpSignal };

// Phase-space amplitudes of one node. alpha and alpha_dag are independent
// variables in the positive-P engines; the Wigner engine uses alpha_s only.
struct TrajectoryState {
  cd alpha_p{}, alpha_p_dag{};
  cd alpha_s{}, alpha_s_dag{};
  cd alpha_i{}, alpha_i_dag{};
};

// Saturated pump linewidth and derived gain coefficients of the
// pump-eliminated engines. Complex because alpha_s_dag alpha_s is complex
// in positive-P.
struct EffectiveGain {
  cd big_gamma_p;  // gamma_p + G alpha_s_dag alpha_s
  cd g_e;          // eps^2 G / Gamma_p^2     (gain with pump depletion)
  cd f_e;          // 2 eps^2 G^2 / Gamma_p^3 (number-diffusion removal)
  cd g_f;          // eps^2 G gamma_p / Gamma_p^3 (spontaneous floor)
};

EffectiveGain effective_gain(const NopoParams& params, double epsilon_t,
                             cd ns_product);

// Per-step Wiener increments. Tests pass zeroed structs as the no-noise
// hook.
struct PsdeFullNoise {
  cd dw_c{}, dw_c_dag{};
};
struct TpsdeNoise {
  cd dw_c{};
  double dw_r = 0.0, dw_r_dag = 0.0;
};
struct TwsdeNoise {
  cd dw_c{};
  cd dw_j{};  // shared pair increment, sign +/- applied per node
};
struct IdlerNoise {
  cd dw_c{}, dw_c_dag{};
};

PsdeFullNoise draw_psde_full_noise(TrajectoryRng& rng, double sqrt_dt);
TpsdeNoise draw_tpsde_noise(TrajectoryRng& rng, double sqrt_dt);
TwsdeNoise draw_twsde_noise(TrajectoryRng& rng, double sqrt_dt,
                            bool with_coupling);
IdlerNoise draw_idler_noise(TrajectoryRng& rng, double sqrt_dt);

// Per-trajectory counters surfaced as run diagnostics.
struct StepDiagnostics {
  std::int64_t negative_gain_floor = 0;  // Re(G_f) < 0 excursions (tpsde)
  std::int64_t complex_sqrt_branch = 0;  // principal-branch sqrt of complex
                                         // pump amplitude (idler-psde)
};

// One explicit Euler-Maruyama step per engine. `partner` carries the other
// node's pre-step state; for solitary runs pass `state` itself with
// coupling_j = 0. All throw Diverged past |amplitude| = 1e12.
TrajectoryState step_psde_full(const TrajectoryState& state,
                               const NopoParams& params, double epsilon_t,
                               double coupling_j,
                               const TrajectoryState& partner, double dt,
                               const PsdeFullNoise& noise);

TrajectoryState step_tpsde(const TrajectoryState& state,
                           const NopoParams& params, double epsilon_t,
                           double coupling_j, const TrajectoryState& partner,
                           double dt, const TpsdeNoise& noise,
                           StepDiagnostics* diag = nullptr);

TrajectoryState step_twsde(const TrajectoryState& state,
                           const NopoParams& params, double epsilon_t,
                           double coupling_j, const TrajectoryState& partner,
                           double dt, const TwsdeNoise& noise,
                           double coupling_noise_sign = 1.0);

TrajectoryState step_idler_psde(const TrajectoryState& state,
                                const NopoParams& params, double epsilon_t,
                                double dt, const IdlerNoise& noise,
                                DiffusionGauge gauge,
                                StepDiagnostics* diag = nullptr);

}  // namespace nopo
