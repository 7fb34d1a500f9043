#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "nopo/errors.hpp"
#include "nopo/observables.hpp"

using namespace nopo;

namespace {

TrajectoryState coherent(cd amp) {
  TrajectoryState st;
  st.alpha_s = amp;
  st.alpha_s_dag = std::conj(amp);
  return st;
}

DensityMatrixSingle coherent_density(cd amp, int cutoff) {
  DensityMatrixSingle rho = DensityMatrixSingle::vacuum(cutoff);
  std::vector<cd> c(cutoff + 1);
  double lognorm = -0.5 * std::norm(amp);
  c[0] = std::exp(lognorm);
  for (int n = 1; n <= cutoff; ++n) c[n] = c[n - 1] * amp / std::sqrt(double(n));
  for (int n = 0; n <= cutoff; ++n)
    for (int m = 0; m <= cutoff; ++m) rho.at(n, m) = c[n] * std::conj(c[m]);
  return rho;
}

DensityMatrixSingle thermal_density(double nbar, int cutoff) {
  DensityMatrixSingle rho = DensityMatrixSingle::vacuum(cutoff);
  rho.at(0, 0) = 0.0;
  const double r = nbar / (1.0 + nbar);
  double w = 1.0 / (1.0 + nbar);
  double norm = 0.0;
  for (int n = 0; n <= cutoff; ++n, w *= r) {
    rho.at(n, n) = w;
    norm += w;
  }
  for (int n = 0; n <= cutoff; ++n) rho.at(n, n) /= norm;
  return rho;
}

}  // namespace

TEST_CASE("positive-P sampling of a deterministic coherent amplitude") {
  const cd a(1.3, -0.4);
  const PhaseSpaceSample s = sample_positive_p(coherent(a), nullptr);
  const double n = std::norm(a);
  CHECK(s.n == doctest::Approx(n).epsilon(1e-14));
  CHECK(s.n2f == doctest::Approx(n * n).epsilon(1e-14));
  CHECK(s.imag_abs == doctest::Approx(0.0));
}

TEST_CASE("positive-P sampling records discarded imaginary parts") {
  TrajectoryState st;
  st.alpha_s = cd(2.0, 0.0);
  st.alpha_s_dag = cd(1.0, 0.5);  // not the conjugate: off the classical manifold
  const PhaseSpaceSample s = sample_positive_p(st, nullptr);
  const cd n_est = st.alpha_s_dag * st.alpha_s;
  CHECK(s.n == doctest::Approx(n_est.real()));
  CHECK(s.imag_abs > 0.0);
}

TEST_CASE("positive-P pair sampling node-averages and forms cross moments") {
  const cd a1(0.8, 0.1), a2(-0.3, 0.6);
  TrajectoryState s1 = coherent(a1), s2 = coherent(a2);
  const PhaseSpaceSample s = sample_positive_p(s1, &s2);
  const double n1 = std::norm(a1), n2 = std::norm(a2);
  CHECK(s.n == doctest::Approx(0.5 * (n1 + n2)).epsilon(1e-14));
  CHECK(s.n2f == doctest::Approx(0.5 * (n1 * n1 + n2 * n2)).epsilon(1e-14));
  const cd cc = std::conj(a1) * a2;
  CHECK(s.cc_re == doctest::Approx(cc.real()).epsilon(1e-14));
  CHECK(s.cc_im == doctest::Approx(cc.imag()).epsilon(1e-14));
  CHECK(s.nn == doctest::Approx(n1 * n2).epsilon(1e-14));
}

TEST_CASE("Wigner sampling corrections against a Gaussian vacuum ensemble") {
  // Vacuum in Wigner representation: alpha ~ complex normal with
  // <|alpha|^2> = 1/2 and <|alpha|^4> = 2 <|alpha|^2>^2 = 1/2, so the
  // corrected estimators must average to n = 0 and n2f = 0.
  std::mt19937_64 gen(42);
  std::normal_distribution<double> g(0.0, std::sqrt(0.25));
  const int m = 200000;
  std::vector<PhaseSpaceSample> samples;
  samples.reserve(m);
  for (int i = 0; i < m; ++i) {
    TrajectoryState st;
    st.alpha_s = cd(g(gen), g(gen));
    st.alpha_s_dag = std::conj(st.alpha_s);
    samples.push_back(sample_wigner(st, nullptr));
  }
  const MomentSet ms = moments_from_wigner(samples, false);
  CHECK(std::abs(ms.n_mean) < 4.0 * ms.n_err);
  CHECK(std::abs(ms.n2_factorial) < 4.0 * ms.n2f_err);
  CHECK(ms.n_err == doctest::Approx(0.5 / std::sqrt(double(m))).epsilon(0.05));
}

TEST_CASE("Wigner sampling of a displaced deterministic amplitude") {
  const cd a(2.0, 1.0);
  const PhaseSpaceSample s = sample_wigner(coherent(a), nullptr);
  const double a2 = std::norm(a);
  CHECK(s.n == doctest::Approx(a2 - 0.5).epsilon(1e-14));
  CHECK(s.n2f == doctest::Approx(a2 * a2 - 2.0 * a2 + 0.5).epsilon(1e-14));
}

TEST_CASE("ensemble reduction: means, errors, covariance") {
  std::vector<PhaseSpaceSample> s(3);
  s[0].n = 1.0;
  s[1].n = 2.0;
  s[2].n = 3.0;
  s[0].n2f = 2.0;
  s[1].n2f = 4.0;
  s[2].n2f = 6.0;
  const MomentSet m = moments_from_ensemble(s, false);
  CHECK(m.n_mean == doctest::Approx(2.0));
  CHECK(m.n2_factorial == doctest::Approx(4.0));
  // sample variance of {1,2,3} is 1, error of the mean sqrt(1/3)
  CHECK(m.n_err == doctest::Approx(std::sqrt(1.0 / 3.0)));
  // perfectly correlated inputs: cov(n, n2f) = 2 var(n_mean)
  CHECK(m.cov[0] == doctest::Approx(1.0 / 3.0));
  CHECK(m.cov[1] == doctest::Approx(2.0 / 3.0));
  CHECK(m.cov[6] == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("empty ensemble throws") {
  std::vector<PhaseSpaceSample> s;
  CHECK_THROWS_AS((void)moments_from_ensemble(s, false), EmptyEnsemble);
}

TEST_CASE("density-matrix moments: coherent state") {
  const cd a(1.1, 0.3);
  const double n = std::norm(a);
  const MomentSet m = observables_from_density(coherent_density(a, 28));
  CHECK(m.n_mean == doctest::Approx(n).epsilon(1e-10));
  CHECK(m.n2_factorial == doctest::Approx(n * n).epsilon(1e-10));
  const DerivedStats d = derived_stats(m);
  CHECK(d.g2 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(d.mandel_q == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("density-matrix moments: thermal state") {
  const double nbar = 0.7;
  const MomentSet m = observables_from_density(thermal_density(nbar, 60));
  CHECK(m.n_mean == doctest::Approx(nbar).epsilon(1e-10));
  CHECK(m.n2_factorial == doctest::Approx(2.0 * nbar * nbar).epsilon(1e-10));
  const DerivedStats d = derived_stats(m);
  CHECK(d.g2 == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(d.mandel_q == doctest::Approx(nbar).epsilon(1e-10));
}

TEST_CASE("density-matrix moments: Fock state |2>") {
  DensityMatrixSingle rho = DensityMatrixSingle::vacuum(5);
  rho.at(0, 0) = 0.0;
  rho.at(2, 2) = 1.0;
  const MomentSet m = observables_from_density(rho);
  CHECK(m.n_mean == doctest::Approx(2.0));
  CHECK(m.n2_factorial == doctest::Approx(2.0));  // n(n-1)
  const DerivedStats d = derived_stats(m);
  CHECK(d.g2 == doctest::Approx(0.5));
  CHECK(d.mandel_q == doctest::Approx(-1.0));
}

TEST_CASE("vacuum derived stats throw division by zero") {
  const MomentSet m = observables_from_density(DensityMatrixSingle::vacuum(4));
  CHECK_THROWS_AS((void)derived_stats(m), DivisionByZero);
}

TEST_CASE("Q = n (g2 - 1) holds for derived stats") {
  MomentSet m;
  m.n_mean = 3.7;
  m.n2_factorial = 19.1;
  const DerivedStats d = derived_stats(m);
  CHECK(d.mandel_q ==
        doctest::Approx(m.n_mean * (d.g2 - 1.0)).epsilon(1e-12));
}

TEST_CASE("pair density moments: product of coherent states is separable") {
  const cd a1(0.9, 0.2), a2(0.4, -0.5);
  const int c = 14;
  const DensityMatrixSingle r1 = coherent_density(a1, c);
  const DensityMatrixSingle r2 = coherent_density(a2, c);
  DensityMatrixPair rho = DensityMatrixPair::vacuum(c);
  for (int n1 = 0; n1 <= c; ++n1)
    for (int n2 = 0; n2 <= c; ++n2)
      for (int m1 = 0; m1 <= c; ++m1)
        for (int m2 = 0; m2 <= c; ++m2)
          rho.at(n1, n2, m1, m2) = r1.at(n1, m1) * r2.at(n2, m2);

  const PairObservables po = observables_from_density(rho);
  const double n1 = std::norm(a1), n2 = std::norm(a2);
  CHECK(po.moments.n_mean == doctest::Approx(0.5 * (n1 + n2)).epsilon(1e-9));
  const cd cc = std::conj(a1) * a2;
  CHECK(po.moments.cross_coherence.real() ==
        doctest::Approx(cc.real()).epsilon(1e-9));
  CHECK(po.moments.cross_coherence.imag() ==
        doctest::Approx(cc.imag()).epsilon(1e-9));
  CHECK(po.moments.cross_number == doctest::Approx(n1 * n2).epsilon(1e-9));

  // Separable states never violate the witness: |<a1^dag a2>|^2 <= <n1 n2>.
  const DerivedStats d = derived_stats(po.moments);
  CHECK(d.hz1 <= 1e-9);
}

TEST_CASE("pair density moments: single-photon Bell state violates HZ1") {
  // (|10> + |01>)/sqrt(2): <a1^dag a2> = 1/2, <n1 n2> = 0, hz1 = 1/4,
  // n per node = 1/2 so hz1/n = 1/2.
  const int c = 2;
  DensityMatrixPair rho = DensityMatrixPair::vacuum(c);
  rho.at(0, 0, 0, 0) = 0.0;
  rho.at(1, 0, 1, 0) = 0.5;
  rho.at(0, 1, 0, 1) = 0.5;
  rho.at(1, 0, 0, 1) = 0.5;
  rho.at(0, 1, 1, 0) = 0.5;
  const PairObservables po = observables_from_density(rho);
  CHECK(po.moments.n_mean == doctest::Approx(0.5));
  CHECK(std::abs(po.moments.cross_coherence) == doctest::Approx(0.5));
  CHECK(po.moments.cross_number == doctest::Approx(0.0));
  const DerivedStats d = derived_stats(po.moments);
  CHECK(d.hz1 == doctest::Approx(0.25));
  CHECK(d.hz1_normalized == doctest::Approx(0.5));
}

TEST_CASE("coherence slices c_ex and c_pp pick the right elements") {
  const int c = 3;
  DensityMatrixPair rho = DensityMatrixPair::vacuum(c);
  rho.at(1, 2, 2, 1) = cd(0.11, -0.03);  // exchange coherence <1,2|rho|2,1>
  rho.at(2, 2, 3, 3) = cd(0.07, 0.04);   // pair coherence <2,2|rho|3,3>
  const PairObservables po = observables_from_density(rho);
  const int d = c + 1;
  CHECK(po.c_ex[1 * d + 2] == rho.at(1, 2, 2, 1));
  CHECK(po.c_pp[2 * d + 3] == rho.at(2, 2, 3, 3));
  // vacuum diagonal appears in both slices
  CHECK(po.c_ex[0].real() == doctest::Approx(1.0));
  CHECK(po.c_pp[0].real() == doctest::Approx(1.0));
}

TEST_CASE("sector-stored pair observables match the dense ones") {
  // Evolve nothing: just load a dense matrix with structure reachable from
  // vacuum (fixed total-occupancy imbalance d = 0) and compare both paths.
  const int c = 4;
  DensityMatrixPair dense = DensityMatrixPair::vacuum(c);
  dense.at(0, 0, 0, 0) = 0.4;
  dense.at(1, 1, 1, 1) = 0.3;
  dense.at(2, 0, 2, 0) = 0.2;
  dense.at(0, 2, 0, 2) = 0.1;
  dense.at(1, 1, 2, 0) = cd(0.05, 0.01);
  dense.at(2, 0, 1, 1) = std::conj(dense.at(1, 1, 2, 0));
  dense.at(1, 0, 0, 1) = cd(0.02, -0.04);
  dense.at(0, 1, 1, 0) = std::conj(dense.at(1, 0, 0, 1));

  SectorPair sector = SectorPair::from_dense(dense, 1e-14);
  const PairObservables pd = observables_from_density(dense);
  const PairObservables ps = observables_from_density(sector);
  CHECK(ps.moments.n_mean == doctest::Approx(pd.moments.n_mean).epsilon(1e-12));
  CHECK(ps.moments.n2_factorial ==
        doctest::Approx(pd.moments.n2_factorial).epsilon(1e-12));
  CHECK(ps.moments.cross_coherence.real() ==
        doctest::Approx(pd.moments.cross_coherence.real()).epsilon(1e-12));
  CHECK(ps.moments.cross_coherence.imag() ==
        doctest::Approx(pd.moments.cross_coherence.imag()).epsilon(1e-12));
  CHECK(ps.moments.cross_number ==
        doctest::Approx(pd.moments.cross_number).epsilon(1e-12));
  const int d = c + 1;
  for (int i = 0; i < d * d; ++i) {
    CHECK(std::abs(ps.c_ex[i] - pd.c_ex[i]) < 1e-13);
    CHECK(std::abs(ps.c_pp[i] - pd.c_pp[i]) < 1e-13);
  }
}

TEST_CASE("direct density moments read the signal digits") {
  // One node, np = 1, ns = 2. Put population on |p=1, s=2>; signal moments
  // must see n = 2 regardless of the pump digit.
  DensityMatrixDirect rho = DensityMatrixDirect::vacuum(1, 2, 1);
  rho.elems.assign(rho.elems.size(), cd{});
  const std::size_t b = 1 * 3 + 2;
  rho.elems[b * rho.hdim + b] = 1.0;
  const MomentSet m = observables_from_density_direct(rho);
  CHECK(m.n_mean == doctest::Approx(2.0));
  CHECK(m.n2_factorial == doctest::Approx(2.0));
  CHECK_FALSE(m.has_cross);
}

TEST_CASE("two-node direct density cross moments") {
  // |p1 s1 p2 s2> = |0 1 0 1> exactly: n = 1 per node, <n1 n2> = 1,
  // <a1^dag a2> = 0 for a product Fock state.
  DensityMatrixDirect rho = DensityMatrixDirect::vacuum(1, 1, 2);
  rho.elems.assign(rho.elems.size(), cd{});
  const std::size_t b = ((0 * 2 + 1) * 2 + 0) * 2 + 1;
  rho.elems[b * rho.hdim + b] = 1.0;
  const MomentSet m = observables_from_density_direct(rho);
  CHECK(m.has_cross);
  CHECK(m.n_mean == doctest::Approx(1.0));
  CHECK(m.cross_number == doctest::Approx(1.0));
  CHECK(std::abs(m.cross_coherence) < 1e-14);
}

TEST_CASE("error propagation scales linearly with input covariance") {
  MomentSet m;
  m.n_mean = 2.0;
  m.n2_factorial = 5.0;
  m.cov.fill(0.0);
  m.cov[0] = 1e-4;  // var(n) only
  m.n_err = 1e-2;
  const DerivedStats d = derived_stats(m);
  // g2 = n2f/n^2: dg2/dn = -2 n2f / n^3 = -1.25, err = 1.25e-2
  CHECK(d.g2_err == doctest::Approx(1.25e-2).epsilon(1e-10));
  // Q = n2f/n - n: dQ/dn = -n2f/n^2 - 1 = -2.25, err = 2.25e-2
  CHECK(d.mandel_q_err == doctest::Approx(2.25e-2).epsilon(1e-10));
}
