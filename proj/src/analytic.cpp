#include "nopo/analytic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace nopo {

namespace {

// log of the detailed-balance ratio rho_N / rho_{N-1}.
double log_ratio(const NopoParams& p, int n) {
  return std::log(p.big_g / p.gamma_s) + 2.0 * std::log(p.epsilon) -
         2.0 * std::log(p.gamma_p + p.big_g * n);
}

}  // namespace

double FockDistribution::mean() const { return factorial_moment(1); }

double FockDistribution::factorial_moment(int j) const {
  double sum = 0.0;
  for (int n = static_cast<int>(probs.size()) - 1; n >= j; --n) {
    double w = probs[n];
    for (int k = 0; k < j; ++k) w *= static_cast<double>(n - k);
    sum += w;
  }
  return sum;
}

FockDistribution fock_steady_diagonal(const NopoParams& params, int cutoff) {
  params.validate();
  FockDistribution dist;
  dist.probs.assign(cutoff + 1, 0.0);
  if (params.epsilon == 0.0) {
    dist.probs[0] = 1.0;
    return dist;
  }
  std::vector<double> logw(cutoff + 1);
  logw[0] = 0.0;
  for (int n = 1; n <= cutoff; ++n) {
    logw[n] = logw[n - 1] + log_ratio(params, n);
  }
  const double peak = *std::max_element(logw.begin(), logw.end());
  double norm = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    dist.probs[n] = std::exp(logw[n] - peak);
    norm += dist.probs[n];
  }
  for (auto& w : dist.probs) w /= norm;
  if (dist.probs[cutoff] >= 1e-12) {
    throw CutoffTooSmall("fock_steady_diagonal: tail mass at cutoff " +
                         std::to_string(cutoff) + " is " +
                         std::to_string(dist.probs[cutoff]));
  }
  return dist;
}

int adequate_cutoff(const NopoParams& params) {
  if (params.epsilon == 0.0) return 8;
  // Walk past the point where the ratio drops below 1, then add margin
  // until the cumulative log weight is far below the peak.
  int n = 1;
  double logw = 0.0, peak = 0.0;
  while (true) {
    logw += log_ratio(params, n);
    peak = std::max(peak, logw);
    if (logw < peak - 45.0) break;  // e^-45 ~ 3e-20
    ++n;
    if (n > 50'000'000) {
      throw CutoffTooSmall("adequate_cutoff: no decay before 5e7 photons");
    }
  }
  return n + 8;
}

LogValue hypergeometric_1f2_log(double a, double b, double c, double x) {
  // All series terms are tracked as log|t| with sign; the running sum is
  // kept the same way (log-sum-exp), so x up to ~1e7 in the small-G regime
  // does not overflow.
  double log_t = 0.0;
  int sign_t = 1;
  double log_s = 0.0;
  int sign_s = 1;
  for (long k = 0; k < 1'000'000; ++k) {
    const double num = (a + k) * x;
    const double den = (b + k) * (c + k) * (k + 1);
    log_t += std::log(std::abs(num)) - std::log(std::abs(den));
    sign_t *= (num < 0 ? -1 : 1) * (den < 0 ? -1 : 1);
    // s += t
    if (log_t > log_s) {
      const double r = std::exp(log_s - log_t) * sign_s * sign_t;
      log_s = log_t + std::log1p(r);
      sign_s = sign_t;
    } else {
      const double r = std::exp(log_t - log_s) * sign_s * sign_t;
      log_s = log_s + std::log1p(r);
    }
    if (log_t < log_s + std::log(1e-16)) {
      return {log_s, sign_s};
    }
  }
  throw NoConvergence("hypergeometric_1f2: 1e6 terms exceeded");
}

double hypergeometric_1f2(double a, double b, double c, double x) {
  if (x == 0.0) return 1.0;
  const LogValue v = hypergeometric_1f2_log(a, b, c, x);
  return v.sign * std::exp(v.log_abs);
}

double analytic_moment_series(const NopoParams& params, int order_j) {
  if (params.epsilon == 0.0) return 0.0;
  const double x = params.epsilon * params.epsilon /
                   (params.big_g * params.gamma_s);
  const double c = 1.0 + params.gamma_p / params.big_g;
  const double j = static_cast<double>(order_j);
  const LogValue num = hypergeometric_1f2_log(j + 1.0, j + c, j + c, x);
  const LogValue den = hypergeometric_1f2_log(1.0, c, c, x);
  // x^j Gamma(j+1) Gamma(c)^2 / Gamma(j+c)^2, in log space: c reaches
  // ~1e3 in the small-G regime.
  const double log_pref = j * std::log(x) + std::lgamma(j + 1.0) +
                          2.0 * (std::lgamma(c) - std::lgamma(j + c));
  return num.sign * den.sign * std::exp(log_pref + num.log_abs - den.log_abs);
}

double analytic_moment_recursion(const NopoParams& params, int order_j) {
  if (params.epsilon == 0.0) return 0.0;
  const auto dist = fock_steady_diagonal(params, adequate_cutoff(params));
  return dist.factorial_moment(order_j);
}

double analytic_moment(const NopoParams& params, int order_j) {
  if (params.epsilon == 0.0) return 0.0;
  const double x = params.epsilon * params.epsilon /
                   (params.big_g * params.gamma_s);
  if (x <= 1e3) return analytic_moment_series(params, order_j);
  return analytic_moment_recursion(params, order_j);
}

double analytic_g2(const NopoParams& params) {
  const double m1 = analytic_moment(params, 1);
  const double m2 = analytic_moment(params, 2);
  return m2 / (m1 * m1);
}

double analytic_q(const NopoParams& params) {
  const double m1 = analytic_moment(params, 1);
  const double m2 = analytic_moment(params, 2);
  return m2 / m1 - m1;
}

double g2_spontaneous(const NopoParams& params) {
  const double a = params.gamma_p + params.big_g;
  const double b = params.gamma_p + 2.0 * params.big_g;
  return 2.0 * a * a / (b * b);
}

double linearized_q(double p) {
  if (p <= 1.0) {
    throw AboveThresholdOnly("linearized_q requires p > 1");
  }
  return -0.5 + 0.5 / (p - 1.0);
}

LinearizedHz1 linearized_hz1(double p, double j, double delta) {
  if (p <= 1.0) {
    throw AboveThresholdOnly("linearized_hz1 requires p > 1");
  }
  const double a = 2.0 * (1.0 - 1.0 / p);
  const double ap = a + j + delta;
  Eigen::Matrix4d m;
  m << ap, a, -j, 0,  //
      a, ap, 0, -j,   //
      -j, 0, ap, a,   //
      0, -j, a, ap;
  Eigen::Vector4d rhs(0.0, 0.5 * (2.0 + j), 0.0, -0.5 * j);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(m);
  if (!lu.isInvertible()) {
    throw SingularSystem("linearized_hz1: fluctuation matrix is singular");
  }
  const Eigen::Vector4d sol = lu.solve(rhs);
  LinearizedHz1 out;
  out.moments = {sol[0], sol[1], sol[2], sol[3]};
  out.hz1_normalized = 1.0 - 2.0 * sol[1] - 2.0 * sol[2];
  return out;
}

double linearized_hz1_closed(double p, double j) {
  if (p <= 1.0) {
    throw AboveThresholdOnly("linearized_hz1_closed requires p > 1");
  }
  return (j - 2.0) / (4.0 * j) - 1.0 / (4.0 * (p - 1.0));
}

}  // namespace nopo
