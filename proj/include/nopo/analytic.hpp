#pragma once

#include <vector>

#include "nopo/model.hpp"

namespace nopo {

// Steady-state diagonal photon-number distribution of the solitary
// oscillator, from the detailed-balance recursion
//   rho_N / rho_{N-1} = (G/gamma_s) eps^2 / (gamma_p + G N)^2.
struct FockDistribution {
  std::vector<double> probs;  // index = photon number, 0..cutoff

  double mean() const;
  // <a^dag^j a^j> = sum_N N!/(N-j)! rho_N
  double factorial_moment(int j) const;
};

// Builds the distribution up to `cutoff`. Weights are accumulated in log
// space; throws CutoffTooSmall if the tail mass probs[cutoff] >= 1e-12.
FockDistribution fock_steady_diagonal(const NopoParams& params, int cutoff);

// Cutoff large enough that the detailed-balance tail is negligible.
int adequate_cutoff(const NopoParams& params);

// Generalized hypergeometric 1F2(a; b, c; x), terms summed in
// log-magnitude/sign form. Throws NoConvergence past 1e6 terms.
double hypergeometric_1f2(double a, double b, double c, double x);

// log|1F2| and sign, for ratios that overflow as plain doubles.
struct LogValue {
  double log_abs;
  int sign;
};
LogValue hypergeometric_1f2_log(double a, double b, double c, double x);

// Steady-state factorial moment <a^dag^j a^j> of the solitary oscillator.
// Evaluates the closed hypergeometric form for modest x = eps^2/(G gamma_s)
// and falls back to the detailed-balance recursion for large x, where the
// series loses precision.
double analytic_moment(const NopoParams& params, int order_j);

// Both routes exposed for cross-checks.
double analytic_moment_series(const NopoParams& params, int order_j);
double analytic_moment_recursion(const NopoParams& params, int order_j);

// g2(0) and Mandel Q from the analytic moments.
double analytic_g2(const NopoParams& params);
double analytic_q(const NopoParams& params);

// Spontaneous-regime (x -> 0) limit of g2(0): 2 (gamma_p+G)^2/(gamma_p+2G)^2.
double g2_spontaneous(const NopoParams& params);

// Linearized above-threshold Mandel Q: -1/2 + 1/(2(p-1)). Throws
// AboveThresholdOnly for p <= 1.
double linearized_q(double p);

// Second moments of the linearized coupled-pair fluctuations. The
// fluctuation system is real, so the moments are stored as doubles.
struct LinearizedMoments {
  double var_self_sq;   // <d_alpha1^2>
  double var_self_abs;  // <|d_alpha1|^2>
  double cross_sq;      // <d_alpha1 d_alpha2>
  double cross_abs;     // <d_alpha1* d_alpha2>
};

struct LinearizedHz1 {
  LinearizedMoments moments;
  double hz1_normalized;  // 1 - 2<|d_alpha1|^2> - 2<d_alpha1 d_alpha2>
};

// Solves the 4x4 steady-state fluctuation system with A = 2(1 - 1/p),
// A' = A + j + delta. Throws SingularSystem when the matrix is singular
// (j = 0, delta = 0) instead of regularizing silently.
LinearizedHz1 linearized_hz1(double p, double j, double delta);

// Closed form of the delta -> 0 limit: (j-2)/(4j) - 1/(4(p-1)).
double linearized_hz1_closed(double p, double j);

}  // namespace nopo
