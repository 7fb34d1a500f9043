#include "nopo/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace nopo {

namespace {

int worker_count() {
  if (const char* env = std::getenv("NOPO_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

bool is_stochastic(Engine e) {
  switch (e) {
    case Engine::PsdeFull:
    case Engine::Tpsde:
    case Engine::Twsde:
    case Engine::IdlerPsde:
      return true;
    default:
      return false;
  }
}

struct TrajResult {
  bool diverged = false;
  std::vector<PhaseSpaceSample> snaps;
  PhaseSpaceSample steady;
  StepDiagnostics diag;
};

// One trajectory of any stochastic engine: explicit Euler-Maruyama steps
// through ramp + averaging window, instantaneous samples at snapshot
// strides, and a window-averaged steady sample (Kahan-compensated).
TrajResult simulate_trajectory(const RunPlan& plan, std::size_t traj_index,
                               long total_steps, long window_start_step) {
  TrajResult res;
  TrajectoryRng rng(plan.master_seed, traj_index);
  const bool pair = plan.network.is_pair();
  const int n_nodes = pair ? 2 : 1;
  const NopoParams& p0 = plan.network.nodes[0];
  const double eps_thr = threshold_epsilon(p0);
  const double sqrt_dt = std::sqrt(plan.dt);
  const double jc = plan.network.coupling_j;
  const bool wigner = (plan.engine == Engine::Twsde);

  TrajectoryState st[2] = {};
  PhaseSpaceSample acc{}, comp{};
  long n_avg = 0;

  auto sample_now = [&]() {
    return wigner ? sample_wigner(st[0], pair ? &st[1] : nullptr)
                  : sample_positive_p(st[0], pair ? &st[1] : nullptr);
  };
  auto kahan_add = [](double& sum, double& c, double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  };

  try {
    for (long step = 0; step < total_steps; ++step) {
      const double t = step * plan.dt;
      const double eps =
          eps_thr * pump_schedule(plan.target_p, t, plan.ramp_time);
      TrajectoryState next[2];
      switch (plan.engine) {
        case Engine::PsdeFull: {
          PsdeFullNoise nz[2];
          for (int k = 0; k < n_nodes; ++k) {
            nz[k] = draw_psde_full_noise(rng, sqrt_dt);
          }
          for (int k = 0; k < n_nodes; ++k) {
            next[k] = step_psde_full(st[k], plan.network.nodes[k], eps, jc,
                                     st[pair ? 1 - k : k], plan.dt, nz[k]);
          }
          break;
        }
        case Engine::Tpsde: {
          TpsdeNoise nz[2];
          for (int k = 0; k < n_nodes; ++k) {
            nz[k] = draw_tpsde_noise(rng, sqrt_dt);
          }
          for (int k = 0; k < n_nodes; ++k) {
            next[k] = step_tpsde(st[k], plan.network.nodes[k], eps, jc,
                                 st[pair ? 1 - k : k], plan.dt, nz[k],
                                 &res.diag);
          }
          break;
        }
        case Engine::Twsde: {
          TwsdeNoise nz[2];
          nz[0] = draw_twsde_noise(rng, sqrt_dt, pair);
          if (pair) {
            nz[1] = draw_twsde_noise(rng, sqrt_dt, false);
            nz[1].dw_j = nz[0].dw_j;  // shared pair increment
          }
          for (int k = 0; k < n_nodes; ++k) {
            next[k] = step_twsde(st[k], plan.network.nodes[k], eps, jc,
                                 st[pair ? 1 - k : k], plan.dt, nz[k],
                                 k == 0 ? 1.0 : -1.0);
          }
          break;
        }
        case Engine::IdlerPsde: {
          const IdlerNoise nz = draw_idler_noise(rng, sqrt_dt);
          next[0] = step_idler_psde(st[0], p0, eps, plan.dt, nz, plan.gauge,
                                    &res.diag);
          break;
        }
        default:
          throw ConfigError("not a stochastic engine");
      }
      for (int k = 0; k < n_nodes; ++k) st[k] = next[k];

      const long done = step + 1;
      if (plan.snapshot_stride > 0 && done % plan.snapshot_stride == 0 &&
          done < total_steps) {
        res.snaps.push_back(sample_now());
      }
      if (done > window_start_step) {
        const PhaseSpaceSample s = sample_now();
        kahan_add(acc.n, comp.n, s.n);
        kahan_add(acc.n2f, comp.n2f, s.n2f);
        kahan_add(acc.cc_re, comp.cc_re, s.cc_re);
        kahan_add(acc.cc_im, comp.cc_im, s.cc_im);
        kahan_add(acc.nn, comp.nn, s.nn);
        acc.imag_abs = std::max(acc.imag_abs, s.imag_abs);
        ++n_avg;
      }
    }
  } catch (const Diverged&) {
    res.diverged = true;
    return res;
  }
  const double inv = 1.0 / static_cast<double>(std::max<long>(n_avg, 1));
  res.steady = {acc.n * inv, acc.n2f * inv, acc.cc_re * inv, acc.cc_im * inv,
                acc.nn * inv, acc.imag_abs};
  return res;
}

std::vector<ObservableRecord> run_stochastic(
    const RunPlan& plan, std::vector<ObservableRecord>* partial) {
  const long total_steps = std::lround(
      (plan.ramp_time + plan.settle_time + plan.average_window) / plan.dt);
  const long window_start =
      std::lround((plan.ramp_time + plan.settle_time) / plan.dt);

  std::vector<TrajResult> results(plan.n_traj);
  std::atomic<std::size_t> next{0};
  const int workers =
      std::min<int>(worker_count(), static_cast<int>(plan.n_traj));
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.n_traj) break;
      results[i] = simulate_trajectory(plan, i, total_steps, window_start);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // in-order reduction, diverged trajectories excluded everywhere
  RunDiagnostics diag;
  for (const auto& r : results) {
    if (r.diverged) {
      ++diag.divergence_count;
    } else {
      diag.negative_gain_floor += r.diag.negative_gain_floor;
      diag.complex_sqrt_branch += r.diag.complex_sqrt_branch;
    }
  }
  diag.n_traj_used = plan.n_traj - diag.divergence_count;
  if (diag.n_traj_used == 0) {
    throw Diverged("all trajectories diverged");
  }
  if (static_cast<double>(diag.divergence_count) >
      plan.max_divergence_fraction * static_cast<double>(plan.n_traj)) {
    throw Diverged(std::to_string(diag.divergence_count) + " of " +
                   std::to_string(plan.n_traj) +
                   " trajectories diverged (limit " +
                   std::to_string(plan.max_divergence_fraction) + ")");
  }

  const bool has_cross = plan.network.is_pair();
  std::vector<ObservableRecord> records;
  auto emit = [&](double time, bool steady,
                  const std::vector<PhaseSpaceSample>& samples) {
    ObservableRecord rec;
    rec.time = time;
    rec.steady = steady;
    rec.moments = moments_from_ensemble(samples, has_cross);
    rec.diagnostics = diag;
    rec.diagnostics.imag_residual = rec.moments.imag_residual;
    try {
      rec.stats = derived_stats(rec.moments);
      rec.stats_valid = true;
    } catch (const DivisionByZero&) {
      rec.stats_valid = false;
    }
    records.push_back(rec);
    if (partial) partial->push_back(rec);
  };

  std::size_t n_snaps = 0;
  for (const auto& r : results) {
    if (!r.diverged) n_snaps = r.snaps.size();
  }
  std::vector<PhaseSpaceSample> buf;
  for (std::size_t k = 0; k < n_snaps; ++k) {
    buf.clear();
    for (const auto& r : results) {
      if (!r.diverged) buf.push_back(r.snaps[k]);
    }
    emit(static_cast<double>(plan.snapshot_stride) * (k + 1) * plan.dt, false,
         buf);
  }
  buf.clear();
  for (const auto& r : results) {
    if (!r.diverged) buf.push_back(r.steady);
  }
  emit(total_steps * plan.dt, true, buf);
  return records;
}

// Shared snapshot-to-record plumbing of the density-matrix engines.
ObservableRecord record_from_moments(double time, bool steady,
                                     const MomentSet& m,
                                     const RunDiagnostics& diag) {
  ObservableRecord rec;
  rec.time = time;
  rec.steady = steady;
  rec.moments = m;
  rec.diagnostics = diag;
  try {
    rec.stats = derived_stats(m);
    rec.stats_valid = true;
  } catch (const DivisionByZero&) {
    rec.stats_valid = false;
  }
  return rec;
}

std::vector<ObservableRecord> run_fock(const RunPlan& plan,
                                       std::vector<ObservableRecord>* partial) {
  const NopoParams& p0 = plan.network.nodes[0];
  EvolveOptions opts;
  opts.dt = plan.dt;
  opts.t_end = plan.ramp_time + plan.settle_time + plan.average_window;
  opts.target_p = plan.target_p;
  opts.ramp_time = plan.ramp_time;
  opts.trace_tol = plan.trace_tol > 0.0
                       ? plan.trace_tol
                       : (plan.engine == Engine::FockDirect ? 1e-4 : 1e-6);
  opts.snapshot_stride = static_cast<int>(plan.snapshot_stride);
  const long total_steps = std::lround(opts.t_end / opts.dt);
  const double t_final = total_steps * opts.dt;

  std::vector<ObservableRecord> records;
  RunDiagnostics diag;
  EvolveDiagnostics ediag;

  auto push = [&](ObservableRecord rec) {
    rec.diagnostics.max_trace_drift = ediag.max_trace_drift;
    records.push_back(rec);
    if (partial) partial->push_back(rec);
  };

  if (plan.engine == Engine::FockSingle) {
    const int c = plan.cutoff;
    GainTable gain(p0, c);
    DensityMatrixSingle work = DensityMatrixSingle::vacuum(c);
    DensityMatrixSingle dwork = work;
    std::vector<cd> state = work.elems;
    auto rhs = [&](const std::vector<cd>& y, double eps, std::vector<cd>& dy) {
      gain.set_epsilon(eps);
      work.elems = y;
      rhs_single(work, p0, gain, p0.gamma_s, dwork);
      dy = dwork.elems;
    };
    auto herm = [&](std::vector<cd>& y) {
      work.elems.swap(y);
      work.hermitize();
      work.elems.swap(y);
    };
    auto trace = [&](const std::vector<cd>& y) {
      double tr = 0.0;
      for (int n = 0; n <= c; ++n) tr += y[n * (c + 1) + n].real();
      return tr;
    };
    auto snap = [&](double t, const std::vector<cd>& y) {
      work.elems = y;
      push(record_from_moments(t, t >= t_final, observables_from_density(work),
                               diag));
    };
    evolve_rk4(state, p0, opts, rhs, herm, trace, snap, &ediag);
  } else if (plan.engine == Engine::FockPair && plan.pair_dense) {
    const int c = plan.cutoff;
    GainTable gain(p0, c);
    DensityMatrixPair work = DensityMatrixPair::vacuum(c);
    DensityMatrixPair dwork = work;
    std::vector<cd> state = work.elems;
    auto rhs = [&](const std::vector<cd>& y, double eps, std::vector<cd>& dy) {
      gain.set_epsilon(eps);
      work.elems = y;
      rhs_pair(work, plan.network, gain, dwork);
      dy = dwork.elems;
    };
    auto herm = [&](std::vector<cd>& y) {
      work.elems.swap(y);
      work.hermitize();
      work.elems.swap(y);
    };
    auto trace = [&](const std::vector<cd>& y) {
      work.elems.swap(const_cast<std::vector<cd>&>(y));
      const double tr = work.trace_real();
      work.elems.swap(const_cast<std::vector<cd>&>(y));
      return tr;
    };
    auto snap = [&](double t, const std::vector<cd>& y) {
      work.elems = y;
      PairObservables obs = observables_from_density(work);
      ObservableRecord rec =
          record_from_moments(t, t >= t_final, obs.moments, diag);
      if (rec.steady) {
        rec.slice_cutoff = obs.cutoff;
        rec.c_ex = std::move(obs.c_ex);
        rec.c_pp = std::move(obs.c_pp);
      }
      push(std::move(rec));
    };
    evolve_rk4(state, p0, opts, rhs, herm, trace, snap, &ediag);
  } else if (plan.engine == Engine::FockPair) {
    const int c = plan.cutoff;
    GainTable gain(p0, c);
    SectorPair work = SectorPair::vacuum(c);
    SectorPair dwork(c);
    std::vector<cd> state = work.data();
    auto rhs = [&](const std::vector<cd>& y, double eps, std::vector<cd>& dy) {
      gain.set_epsilon(eps);
      work.data() = y;
      work.rhs(plan.network, gain, dwork);
      dy = dwork.data();
    };
    auto herm = [&](std::vector<cd>& y) {
      work.data().swap(y);
      work.hermitize();
      work.data().swap(y);
    };
    auto trace = [&](const std::vector<cd>& y) {
      work.data().swap(const_cast<std::vector<cd>&>(y));
      const double tr = work.trace_real();
      work.data().swap(const_cast<std::vector<cd>&>(y));
      return tr;
    };
    auto snap = [&](double t, const std::vector<cd>& y) {
      work.data() = y;
      PairObservables obs = observables_from_density(work);
      ObservableRecord rec =
          record_from_moments(t, t >= t_final, obs.moments, diag);
      if (rec.steady) {
        rec.slice_cutoff = obs.cutoff;
        rec.c_ex = std::move(obs.c_ex);
        rec.c_pp = std::move(obs.c_pp);
      }
      push(std::move(rec));
    };
    evolve_rk4(state, p0, opts, rhs, herm, trace, snap, &ediag);
  } else {  // FockDirect
    const int nodes = plan.network.is_pair() ? 2 : 1;
    DensityMatrixDirect work = DensityMatrixDirect::vacuum(
        plan.pump_cutoff, plan.signal_cutoff, nodes);
    DensityMatrixDirect dwork = work;
    std::vector<cd> state = work.elems;
    const std::size_t h = work.hdim;
    auto rhs = [&](const std::vector<cd>& y, double eps, std::vector<cd>& dy) {
      work.elems = y;
      rhs_direct(work, plan.network, eps, dwork);
      dy = dwork.elems;
    };
    auto herm = [&](std::vector<cd>& y) {
      work.elems.swap(y);
      work.hermitize();
      work.elems.swap(y);
    };
    auto trace = [&](const std::vector<cd>& y) {
      double tr = 0.0;
      for (std::size_t b = 0; b < h; ++b) tr += y[b * h + b].real();
      return tr;
    };
    auto snap = [&](double t, const std::vector<cd>& y) {
      work.elems = y;
      RunDiagnostics d = diag;
      d.top_pump_occupancy = work.top_pump_occupancy();
      d.top_signal_occupancy = work.top_signal_occupancy();
      push(record_from_moments(t, t >= t_final,
                               observables_from_density_direct(work), d));
    };
    evolve_rk4(state, p0, opts, rhs, herm, trace, snap, &ediag);
  }
  // the final record carries the eventual max drift
  if (!records.empty()) {
    records.back().diagnostics.max_trace_drift = ediag.max_trace_drift;
  }
  return records;
}

}  // namespace

void RunPlan::validate() const {
  network.validate();
  if (is_stochastic(engine) && n_traj < 2) {
    throw ConfigError("stochastic engines require n_traj >= 2");
  }
  if (engine == Engine::IdlerPsde) {
    if (network.is_pair()) {
      throw ConfigError("the explicit-idler engine is solitary only");
    }
    if (!network.nodes[0].gamma_i || !network.nodes[0].kappa) {
      throw ConfigError("the explicit-idler engine needs gamma_i and kappa");
    }
  }
  if (engine == Engine::FockSingle && network.is_pair()) {
    throw ConfigError("fock-single handles one oscillator; use fock-pair");
  }
  if (engine == Engine::FockPair && !network.is_pair()) {
    throw ConfigError("fock-pair needs a two-node network");
  }
  if (dt <= 0.0 || ramp_time < 0.0 || settle_time < 0.0 ||
      average_window <= 0.0) {
    throw ConfigError("dt and average_window must be positive");
  }
  if (target_p < 0.0) throw ConfigError("target_p must be >= 0");
  if (cutoff < 1 || pump_cutoff < 1 || signal_cutoff < 1) {
    throw ConfigError("cutoffs must be >= 1");
  }
}

std::vector<ObservableRecord> run(const RunPlan& plan,
                                  std::vector<ObservableRecord>* partial) {
  plan.validate();
  return is_stochastic(plan.engine) ? run_stochastic(plan, partial)
                                    : run_fock(plan, partial);
}

std::vector<ObservableRecord> sweep(const RunPlan& base, SweepAxis axis,
                                    const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[i - 1]) {
      throw ConfigError("sweep values must be sorted ascending");
    }
  }
  std::vector<ObservableRecord> table;
  for (std::size_t i = 0; i < values.size(); ++i) {
    RunPlan plan = base;
    plan.master_seed = base.master_seed + i;
    if (axis == SweepAxis::Pump) {
      plan.target_p = values[i];
    } else {
      plan.network.coupling_j = values[i];
    }
    try {
      const auto recs = run(plan);
      for (const auto& r : recs) {
        if (r.steady) {
          table.push_back(r);
          table.back().axis_value = values[i];
        }
      }
    } catch (const SimulationError& e) {
      ObservableRecord rec;
      rec.axis_value = values[i];
      rec.steady = true;
      rec.failed = true;
      rec.error = e.what();
      table.push_back(rec);
    }
  }
  return table;
}

}  // namespace nopo
