#pragma once

#include <array>
#include <vector>

#include "nopo/engines.hpp"
#include "nopo/fock.hpp"

namespace nopo {

// Physical moments of the signal mode(s). Cross entries are only meaningful
// when has_cross is set (pair runs). Errors and the covariance of the means
// are zero for exact (density-matrix) outputs.
struct MomentSet {
  double n_mean = 0.0;
  double n2_factorial = 0.0;  // <a^dag^2 a^2>, node-averaged for pairs
  cd cross_coherence{};       // <a1^dag a2>
  double cross_number = 0.0;  // <n1 n2>
  bool has_cross = false;

  double n_err = 0.0;
  double n2f_err = 0.0;
  double cross_re_err = 0.0;
  double cross_im_err = 0.0;
  double cross_number_err = 0.0;

  // covariance of the ensemble means, order (n, n2f, Re cc, Im cc, nn)
  std::array<double, 25> cov{};

  // mean magnitude of discarded imaginary parts (positive-P diagnostic)
  double imag_residual = 0.0;
};

// One trajectory's (time-averaged) raw moment estimators, with ordering
// corrections already applied.
struct PhaseSpaceSample {
  double n = 0.0;
  double n2f = 0.0;
  double cc_re = 0.0;
  double cc_im = 0.0;
  double nn = 0.0;
  double imag_abs = 0.0;
};

// Normally-ordered estimators from independent-amplitude (positive-P-type)
// states: moments are direct products of alpha^dag and alpha. `partner` is
// the second node of a pair, or null for solitary runs.
PhaseSpaceSample sample_positive_p(const TrajectoryState& state,
                                   const TrajectoryState* partner);

// Symmetric-ordering estimators (alpha^dag = alpha^*): corrections
// n = <|a|^2> - 1/2, n2f = <|a|^4> - 2<|a|^2> + 1/2; the cross coherence of
// distinct modes needs none, and <n1 n2> = <(|a1|^2-1/2)(|a2|^2-1/2)>.
PhaseSpaceSample sample_wigner(const TrajectoryState& state,
                               const TrajectoryState* partner);

// Ensemble reduction: means, trajectory-level standard errors, and the
// covariance of the means. Throws EmptyEnsemble on an empty input.
MomentSet moments_from_ensemble(const std::vector<PhaseSpaceSample>& per_traj,
                                bool has_cross);

// Named for the two estimator families; both reduce trajectory averages the
// same way once ordering corrections are applied at sampling time.
MomentSet moments_from_positive_p(
    const std::vector<PhaseSpaceSample>& per_traj, bool has_cross);
MomentSet moments_from_wigner(const std::vector<PhaseSpaceSample>& per_traj,
                              bool has_cross);

// Exact traces from density matrices.
MomentSet observables_from_density(const DensityMatrixSingle& rho);

// Pair outputs additionally carry the two Fock-coherence slices:
//   c_ex[N][N'] = <N,N'| rho |N',N>   (exchange coherence)
//   c_pp[N][N'] = <N,N | rho |N',N'>  (pair coherence)
struct PairObservables {
  MomentSet moments;
  int cutoff = 0;
  std::vector<cd> c_ex;  // (cutoff+1)^2 row-major
  std::vector<cd> c_pp;
};

PairObservables observables_from_density(const DensityMatrixPair& rho);
PairObservables observables_from_density(const SectorPair& rho);

// Signal-mode moments of the full (pump + signal) density matrix.
MomentSet observables_from_density_direct(const DensityMatrixDirect& rho);

struct DerivedStats {
  double g2 = 0.0, g2_err = 0.0;
  double mandel_q = 0.0, mandel_q_err = 0.0;
  double hz1 = 0.0, hz1_err = 0.0;
  double hz1_normalized = 0.0, hz1_normalized_err = 0.0;
  bool has_cross = false;
};

// g2 = n2f/n^2, Q = n2f/n - n (the variance form), hz1 = |cc|^2 - <n1 n2>,
// hz1_normalized = hz1/n. Errors by first-order propagation through the
// covariance of the means. Throws DivisionByZero when n_mean <= 0.
DerivedStats derived_stats(const MomentSet& m);

}  // namespace nopo
