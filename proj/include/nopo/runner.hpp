#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nopo/engines.hpp"
#include "nopo/fock.hpp"
#include "nopo/observables.hpp"

namespace nopo {

// A fully resolved execution request: engine, physics, protocol, and seeds.
struct RunPlan {
  Engine engine = Engine::Tpsde;
  NetworkConfig network;
  double target_p = 0.0;
  double dt = 1e-4;
  double ramp_time = 100.0;       // adiabatic turn-on, units of 1/gamma_s
  double settle_time = 0.0;       // hold at target pump before averaging,
                                  // so the ramp lag decays out of the window
  double average_window = 100.0;  // steady-state window after the settle
  std::size_t n_traj = 1000;      // stochastic engines only
  int cutoff = 30;                // fock-single / fock-pair signal cutoff
  int pump_cutoff = 4;            // fock-direct
  int signal_cutoff = 13;         // fock-direct
  bool pair_dense = false;        // fock-pair: dense storage instead of the
                                  // photon-number-difference sector
  DiffusionGauge gauge = DiffusionGauge::Standard;
  std::uint64_t master_seed = 1;
  long snapshot_stride = 0;  // steps between time-series records; 0 = none
  double trace_tol = 0.0;    // 0 = engine default (1e-6, direct 1e-4)
  // abort when more than this fraction of trajectories diverges
  double max_divergence_fraction = 0.01;

  void validate() const;
};

struct RunDiagnostics {
  std::size_t divergence_count = 0;
  std::size_t n_traj_used = 0;
  double max_trace_drift = 0.0;
  double imag_residual = 0.0;
  double top_pump_occupancy = 0.0;
  double top_signal_occupancy = 0.0;
  std::int64_t negative_gain_floor = 0;
  std::int64_t complex_sqrt_branch = 0;
};

struct ObservableRecord {
  double time = 0.0;
  bool steady = false;  // true for the final windowed/steady record
  MomentSet moments;
  DerivedStats stats;
  bool stats_valid = false;  // false when n_mean <= 0 (moments only)
  RunDiagnostics diagnostics;
  // Fock-pair steady records attach the coherence slices (slice_cutoff > 0)
  int slice_cutoff = 0;
  std::vector<cd> c_ex, c_pp;
  double axis_value = 0.0;  // sweep tables: the swept p or j value
  bool failed = false;      // sweep points that threw
  std::string error;
};

// Executes the ramp + averaging protocol. Stochastic engines emit
// instantaneous ensemble records at snapshot strides and one final record
// averaged over the steady window; density-matrix engines emit snapshot and
// final records of exact traces. Worker count comes from NOPO_WORKERS
// (default 1); results are bit-identical for any worker count.
// When `partial` is non-null, records are also appended there as they are
// produced, so a thrown Diverged/TraceDrift still leaves the partial list
// for post-mortem.
std::vector<ObservableRecord> run(const RunPlan& plan,
                                  std::vector<ObservableRecord>* partial =
                                      nullptr);

enum class SweepAxis { Pump, Coupling };

// Independent runs per value with seeds derived from master_seed and the
// point index (index 0 reuses master_seed, so a one-point sweep equals a
// single run). Per-point failures are recorded and the sweep continues.
std::vector<ObservableRecord> sweep(const RunPlan& base, SweepAxis axis,
                                    const std::vector<double>& values);

}  // namespace nopo
