#include <cmath>

#include "doctest.h"
#include "nopo/analytic.hpp"

using namespace nopo;

namespace {

// independent long-double oracle for 1F2(a; b, b; x)
long double brute_1f2(long double a, long double b, long double c,
                      long double x) {
  long double sum = 1.0L, term = 1.0L;
  for (int k = 0; k < 100000; ++k) {
    term *= (a + k) / ((b + k) * (c + k)) * x / (k + 1);
    sum += term;
    if (std::abs(term) < 1e-25L * std::abs(sum)) break;
  }
  return sum;
}

// independent long-double oracle for the detailed-balance distribution
std::vector<long double> brute_distribution(const NopoParams& p, int cutoff) {
  std::vector<long double> w(cutoff + 1);
  w[0] = 1.0L;
  const long double e2 = static_cast<long double>(p.epsilon) * p.epsilon;
  for (int n = 1; n <= cutoff; ++n) {
    const long double denom = p.gamma_p + p.big_g * n;
    w[n] = w[n - 1] * (p.big_g / p.gamma_s) * e2 / (denom * denom);
  }
  long double z = 0.0L;
  for (auto v : w) z += v;
  for (auto& v : w) v /= z;
  return w;
}

NopoParams series_params(double target_p) {
  NopoParams p;
  p.gamma_p = 10.0;
  p.big_g = 5.0;
  p.epsilon = epsilon_for_pump(p, target_p);
  return p;
}

NopoParams small_g(double target_p) {
  NopoParams p;
  p.gamma_p = 50.0;
  p.big_g = 0.05;
  p.epsilon = epsilon_for_pump(p, target_p);
  return p;
}

}  // namespace

TEST_CASE("hypergeometric 1F2 against direct long-double summation") {
  for (double x : {0.5, 10.0, 50.0, 400.0}) {
    for (double a : {1.0, 2.0, 3.0}) {
      for (double b : {3.0, 5.5, 21.0}) {
        const double ref = static_cast<double>(brute_1f2(a, b, b, x));
        CHECK(hypergeometric_1f2(a, b, b, x) ==
              doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("log-form 1F2 matches the plain form where both are finite") {
  const auto lv = hypergeometric_1f2_log(1.0, 3.0, 3.0, 200.0);
  CHECK(lv.sign == 1);
  CHECK(std::exp(lv.log_abs) ==
        doctest::Approx(hypergeometric_1f2(1.0, 3.0, 3.0, 200.0))
            .epsilon(1e-12));
}

TEST_CASE("steady diagonal equals the brute detailed-balance recursion") {
  const auto p = series_params(2.0);
  const int cutoff = adequate_cutoff(p);
  const auto dist = fock_steady_diagonal(p, cutoff);
  const auto ref = brute_distribution(p, cutoff);
  REQUIRE(dist.probs.size() == ref.size());
  double sum = 0.0;
  for (std::size_t n = 0; n < ref.size(); ++n) {
    CHECK(dist.probs[n] ==
          doctest::Approx(static_cast<double>(ref[n])).epsilon(1e-12));
    sum += dist.probs[n];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tiny cutoff with large occupation is rejected") {
  CHECK_THROWS_AS(fock_steady_diagonal(small_g(5.0), 10), CutoffTooSmall);
}

TEST_CASE("zero drive gives the vacuum") {
  NopoParams p = series_params(0.0);
  const auto dist = fock_steady_diagonal(p, 5);
  CHECK(dist.probs[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(dist.mean() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("hypergeometric moments equal distribution sums") {
  // both the series route (modest x) and the recursion route (huge x)
  for (double target_p : {0.3, 1.0, 2.0, 6.0}) {
    const auto p = series_params(target_p);
    const auto dist = fock_steady_diagonal(p, adequate_cutoff(p));
    for (int j : {1, 2}) {
      CHECK(analytic_moment(p, j) ==
            doctest::Approx(dist.factorial_moment(j)).epsilon(1e-8));
      CHECK(analytic_moment_series(p, j) ==
            doctest::Approx(dist.factorial_moment(j)).epsilon(1e-8));
    }
  }
  for (double target_p : {0.5, 2.0, 10.0}) {
    const auto p = small_g(target_p);
    const auto dist = fock_steady_diagonal(p, adequate_cutoff(p));
    for (int j : {1, 2}) {
      CHECK(analytic_moment(p, j) ==
            doctest::Approx(dist.factorial_moment(j)).epsilon(1e-8));
      CHECK(analytic_moment_recursion(p, j) ==
            doctest::Approx(dist.factorial_moment(j)).epsilon(1e-8));
    }
  }
}

TEST_CASE("Q and g2 are tied by Q = n (g2 - 1)") {
  for (double target_p : {0.5, 1.0, 3.0, 10.0}) {
    const auto p = small_g(target_p);
    const double n = analytic_moment(p, 1);
    CHECK(analytic_q(p) ==
          doctest::Approx(n * (analytic_g2(p) - 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("spontaneous limit of g2") {
  const auto p = small_g(1e-3);
  const double ref =
      2.0 * std::pow(p.gamma_p + p.big_g, 2) /
      std::pow(p.gamma_p + 2.0 * p.big_g, 2);
  CHECK(g2_spontaneous(p) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(analytic_g2(p) == doctest::Approx(ref).epsilon(1e-4));
}

TEST_CASE("threshold g2 approaches pi/2 for small G") {
  CHECK(analytic_g2(small_g(1.0)) ==
        doctest::Approx(std::acos(-1.0) / 2.0).epsilon(0.05));
}

TEST_CASE("linearized Q above threshold") {
  CHECK(linearized_q(2.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(linearized_q(5.0) == doctest::Approx(-0.375).epsilon(1e-14));
  CHECK_THROWS_AS(linearized_q(1.0), AboveThresholdOnly);
  CHECK_THROWS_AS(linearized_q(0.5), AboveThresholdOnly);
}

TEST_CASE("linearized pair solve matches the closed form") {
  for (double p : {1.5, 3.0, 5.0, 12.0, 50.0}) {
    for (double j : {0.5, 8.0 / 3.0, 4.0, 20.0}) {
      const auto solved = linearized_hz1(p, j, 1e-9);
      CHECK(solved.hz1_normalized ==
            doctest::Approx(linearized_hz1_closed(p, j)).epsilon(1e-6));
    }
  }
}

TEST_CASE("linearized witness sign changes at p=3 (j=4) and j=8/3 (p=5)") {
  CHECK(linearized_hz1_closed(3.0, 4.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(linearized_hz1_closed(2.99, 4.0) < 0.0);
  CHECK(linearized_hz1_closed(3.01, 4.0) > 0.0);
  CHECK(linearized_hz1_closed(5.0, 8.0 / 3.0) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(linearized_hz1_closed(5.0, 2.6) < 0.0);
  CHECK(linearized_hz1_closed(5.0, 2.8) > 0.0);
  CHECK(linearized_hz1_closed(5.0, 4.0) ==
        doctest::Approx(0.0625).epsilon(1e-14));
}

TEST_CASE("singular fluctuation system is reported, not regularized") {
  CHECK_THROWS_AS(linearized_hz1(5.0, 0.0, 0.0), SingularSystem);
}
