#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "nopo/engines.hpp"
#include "nopo/model.hpp"

namespace nopo {

// ---------------------------------------------------------------------------
// Single-mode signal density matrix in the Fock basis, pump eliminated.

struct DensityMatrixSingle {
  int cutoff = 0;
  std::vector<cd> elems;  // (cutoff+1)^2, row-major

  static DensityMatrixSingle vacuum(int cutoff);

  cd& at(int n, int m) { return elems[n * (cutoff + 1) + m]; }
  const cd& at(int n, int m) const { return elems[n * (cutoff + 1) + m]; }

  double trace_real() const;
  void hermitize();  // rho <- (rho + rho^dag)/2
};

// Pump-number-conditioned gain table
// G_e(M,N) = G eps^2 / [(gamma_p + G(1+M))(gamma_p + G(1+N))].
class GainTable {
 public:
  GainTable(const NopoParams& params, int cutoff);
  void set_epsilon(double epsilon_t);
  double operator()(int m, int n) const { return e2g_ * inv_[m] * inv_[n]; }

 private:
  std::vector<double> inv_;  // 1/(gamma_p + G(1+N))
  double big_g_;
  double e2g_ = 0.0;  // G eps^2
};

// drho/dt of the pump-eliminated single-oscillator master equation.
// Elements beyond the cutoff are treated as zero; negative-index terms are
// absent.
void rhs_single(const DensityMatrixSingle& rho, const NopoParams& params,
                const GainTable& gain, double gamma_s,
                DensityMatrixSingle& out);

// ---------------------------------------------------------------------------
// Two-signal-mode density matrix, dense product-Fock storage.

struct DensityMatrixPair {
  int cutoff = 0;
  std::vector<cd> elems;  // (cutoff+1)^4

  static DensityMatrixPair vacuum(int cutoff);

  std::size_t idx(int n1, int n2, int m1, int m2) const {
    const std::size_t d = cutoff + 1;
    return ((static_cast<std::size_t>(n1) * d + n2) * d + m1) * d + m2;
  }
  cd& at(int n1, int n2, int m1, int m2) { return elems[idx(n1, n2, m1, m2)]; }
  const cd& at(int n1, int n2, int m1, int m2) const {
    return elems[idx(n1, n2, m1, m2)];
  }

  double trace_real() const;
  void hermitize();
  DensityMatrixSingle partial_trace(int node) const;
};

// Pump-eliminated pair equation: single-oscillator terms on each node plus
// the shared-loss coupling [J, rho J^dag] + h.c. with J = sqrt(J)(a1 - a2).
void rhs_pair(const DensityMatrixPair& rho, const NetworkConfig& network,
              const GainTable& gain, DensityMatrixPair& out);

// ---------------------------------------------------------------------------
// Sector storage for the pair: every term of the pump-eliminated pair
// generator preserves d = (N1+N2) - (N1'+N2'), so an evolution started in
// the d = 0 sector (any state diagonal in total photon number, in
// particular the vacuum) stays there. Storing only that sector shrinks the
// cutoff-100 problem from ~1e8 to ~7e5 elements.

class SectorPair {
 public:
  explicit SectorPair(int cutoff);

  static SectorPair vacuum(int cutoff);

  int cutoff() const { return cutoff_; }

  // Element <n1, S-n1| rho |m1, S-m1> of block S. Zero row/col outside.
  cd get(int n1, int n2, int m1, int m2) const;
  void set(int n1, int n2, int m1, int m2, cd v);

  std::vector<cd>& data() { return data_; }
  const std::vector<cd>& data() const { return data_; }

  double trace_real() const;
  void hermitize();

  DensityMatrixPair to_dense() const;
  // Requires the dense matrix to have no support outside d = 0 (checked to
  // 1e-12); used by tests.
  static SectorPair from_dense(const DensityMatrixPair& dense, double tol);

  // block S holds m(S) x m(S) elements, m(S) = #{n1 : max(0,S-C) <= n1 <=
  // min(S,C)}
  int block_count() const { return 2 * cutoff_ + 1; }
  int block_lo(int s) const { return std::max(0, s - cutoff_); }
  int block_dim(int s) const {
    return std::min(s, cutoff_) - block_lo(s) + 1;
  }
  std::size_t block_offset(int s) const { return offsets_[s]; }

  void rhs(const NetworkConfig& network, const GainTable& gain,
           SectorPair& out) const;

 private:
  int cutoff_;
  std::vector<std::size_t> offsets_;
  std::vector<cd> data_;
};

// ---------------------------------------------------------------------------
// Direct master equation with explicit pump modes: drive eps(ap^dag - ap),
// losses gamma_p, gamma_s, the parametric gain channel sqrt(G) as^dag ap per
// node, and the signal coupling channel for pairs.

struct DensityMatrixDirect {
  int pump_cutoff = 0;
  int signal_cutoff = 0;
  int nodes = 1;
  std::size_t hdim = 0;   // Hilbert dimension
  std::vector<cd> elems;  // hdim^2

  static DensityMatrixDirect vacuum(int pump_cutoff, int signal_cutoff,
                                    int nodes);

  double trace_real() const;
  void hermitize();

  // population of the highest pump / signal level (cutoff adequacy)
  double top_pump_occupancy() const;
  double top_signal_occupancy() const;
};

void rhs_direct(const DensityMatrixDirect& rho, const NetworkConfig& network,
                double epsilon_t, DensityMatrixDirect& out);

// ---------------------------------------------------------------------------
// Fixed-step RK4 evolution shared by all density-matrix families.

struct EvolveOptions {
  double dt = 2e-4;
  double t_end = 40.0;
  double target_p = 0.0;
  double ramp_time = 10.0;
  double trace_tol = 1e-6;
  int snapshot_stride = 0;  // in steps; 0 = final snapshot only
};

struct EvolveDiagnostics {
  double max_trace_drift = 0.0;
};

// Steps `state` (a flat complex vector) with the provided rhs. epsilon_t
// follows pump_schedule. Hermiticity is re-symmetrized every step via
// `hermitize` (a documented non-physical stabilization). `snapshot` is
// called at stride boundaries and at t_end. Throws TraceDrift if
// |tr rho - 1| > trace_tol.
void evolve_rk4(
    std::vector<cd>& state, const NopoParams& params,
    const EvolveOptions& opts,
    const std::function<void(const std::vector<cd>&, double /*eps_t*/,
                             std::vector<cd>&)>& rhs,
    const std::function<void(std::vector<cd>&)>& hermitize,
    const std::function<double(const std::vector<cd>&)>& trace,
    const std::function<void(double /*t*/, const std::vector<cd>&)>& snapshot,
    EvolveDiagnostics* diag = nullptr);

}  // namespace nopo
