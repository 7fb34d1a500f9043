// nopo: steady-state photon statistics and entanglement witnesses of
// dissipatively coupled nondegenerate OPOs.
//
// Exit codes: 0 success, 1 validation failure (`validate`), 2 config/usage
// error, 3 divergence, 4 trace drift, 5 other simulation error, 6 I/O error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nopo/analytic.hpp"
#include "nopo/config.hpp"

namespace {

using namespace nopo;

constexpr int kExitOk = 0, kExitValidate = 1, kExitConfig = 2,
              kExitDiverged = 3, kExitTraceDrift = 4, kExitSim = 5,
              kExitIo = 6;

std::string fd(double v) { return format_double(v); }

struct Overrides {
  double p = -1.0;
  std::string engine;
  long seed = -1;
  std::string out;

  void apply(Config& cfg) const {
    if (p >= 0.0) cfg.plan.target_p = p;
    if (!engine.empty()) cfg.plan.engine = engine_from_name(engine);
    if (seed >= 0) cfg.plan.master_seed = static_cast<std::uint64_t>(seed);
    if (!out.empty()) cfg.output.path = out;
  }
};

void add_overrides(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--p", ov.p, "override run.p");
  cmd->add_option("--engine", ov.engine, "override run.engine");
  cmd->add_option("--seed", ov.seed, "override run.seed");
  cmd->add_option("--out", ov.out, "override output.path");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "'");
  out << text;
  if (!out) throw std::ios_base::failure("write failed for '" + path + "'");
}

std::string stats_header() {
  return "n_mean,n_err,g2,g2_err,q,q_err,hz1,hz1_err,hz1n,hz1n_err,"
         "divergence_count,n_traj_used,max_trace_drift,imag_residual,"
         "top_pump_occupancy,top_signal_occupancy";
}

std::string stats_row(const ObservableRecord& r) {
  const double nan = std::nan("");
  std::ostringstream os;
  const auto& s = r.stats;
  os << fd(r.moments.n_mean) << ',' << fd(r.moments.n_err) << ','
     << fd(r.stats_valid ? s.g2 : nan) << ','
     << fd(r.stats_valid ? s.g2_err : nan) << ','
     << fd(r.stats_valid ? s.mandel_q : nan) << ','
     << fd(r.stats_valid ? s.mandel_q_err : nan) << ','
     << fd(r.stats_valid && s.has_cross ? s.hz1 : nan) << ','
     << fd(r.stats_valid && s.has_cross ? s.hz1_err : nan) << ','
     << fd(r.stats_valid && s.has_cross ? s.hz1_normalized : nan) << ','
     << fd(r.stats_valid && s.has_cross ? s.hz1_normalized_err : nan) << ','
     << r.diagnostics.divergence_count << ',' << r.diagnostics.n_traj_used
     << ',' << fd(r.diagnostics.max_trace_drift) << ','
     << fd(r.diagnostics.imag_residual) << ','
     << fd(r.diagnostics.top_pump_occupancy) << ','
     << fd(r.diagnostics.top_signal_occupancy);
  return os.str();
}

void emit_output(const Config& cfg, const std::string& csv,
                 const std::vector<ObservableRecord>& records,
                 double wall_seconds) {
  if (cfg.output.path.empty()) {
    std::cout << csv;
    return;
  }
  write_text(cfg.output.path, csv);
  // coherence slices of Fock-pair steady records, as dense magnitude
  // matrices
  for (const auto& r : records) {
    if (r.slice_cutoff <= 0) continue;
    const int d = r.slice_cutoff + 1;
    auto slice_csv = [&](const std::vector<cd>& m) {
      std::ostringstream os;
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (j) os << ',';
          os << fd(std::abs(m[static_cast<std::size_t>(i) * d + j]));
        }
        os << '\n';
      }
      return os.str();
    };
    const std::string base =
        cfg.output.path.substr(0, cfg.output.path.rfind('.'));
    write_text(base + "_cex.csv", slice_csv(r.c_ex));
    write_text(base + "_cpp.csv", slice_csv(r.c_pp));
  }
  const std::string meta = write_metadata(
      cfg, {{"generator", "nopo 1.0"},
            {"wall_time_s", fd(wall_seconds)},
            {"records", std::to_string(records.size())},
            {"error_model", "first-order delta method over trajectory-level "
                            "covariance"}});
  write_text(cfg.output.path + ".meta", meta);
}

int cmd_run(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = run(cfg.plan);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::ostringstream csv;
  csv << "time,steady," << stats_header() << '\n';
  for (const auto& r : records) {
    csv << fd(r.time) << ',' << (r.steady ? 1 : 0) << ',' << stats_row(r)
        << '\n';
  }
  emit_output(cfg, csv.str(), records, wall);
  return kExitOk;
}

int cmd_sweep(const Config& cfg) {
  if (!cfg.sweep.present) {
    throw ConfigError("sweep requires a [sweep] section");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto table = sweep(cfg.plan, cfg.sweep.axis, cfg.sweep.values);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::ostringstream csv;
  csv << "sweep_value," << stats_header() << ",failed,error\n";
  for (const auto& r : table) {
    csv << fd(r.axis_value) << ',' << stats_row(r) << ','
        << (r.failed ? 1 : 0) << ",\"" << r.error << "\"\n";
  }
  emit_output(cfg, csv.str(), table, wall);
  return kExitOk;
}

int cmd_analytic(const Config& cfg, const std::string& axis, double lo,
                 double hi, int points) {
  if (points < 1) throw ConfigError("--points must be >= 1");
  if (points > 1 && !(hi > lo)) throw ConfigError("--max must exceed --min");
  const NopoParams& m = cfg.plan.network.nodes[0];
  const double jnorm = cfg.plan.network.coupling_j / m.gamma_s;
  const double nan = std::nan("");
  std::ostringstream csv;
  csv << "value,n_mean,g2,q,hz1n\n";
  for (int i = 0; i < points; ++i) {
    const double v =
        points == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(points - 1);
    const double p = (axis == "p") ? v : cfg.plan.target_p;
    const double j = (axis == "j") ? v : jnorm;
    NopoParams mp = m;
    mp.epsilon = epsilon_for_pump(m, p);
    const double n = analytic_moment(mp, 1);
    const double g2 = analytic_g2(mp);
    const double q = analytic_q(mp);
    double hz1n = nan;
    if (p > 1.0 && j > 0.0) {
      hz1n = linearized_hz1_closed(p, j);
    }
    csv << fd(v) << ',' << fd(n) << ',' << fd(g2) << ',' << fd(q) << ','
        << fd(hz1n) << '\n';
  }
  if (cfg.output.path.empty()) {
    std::cout << csv.str();
  } else {
    write_text(cfg.output.path, csv.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate: reduced-scale cross-engine checks

struct ValidateReport {
  int failures = 0;
  void check(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << ": " << detail
              << std::endl;
    if (!ok) ++failures;
  }
};

NopoParams small_g_params(double target_p) {
  NopoParams m;
  m.gamma_p = 50.0;
  m.gamma_s = 1.0;
  m.big_g = 0.05;
  m.epsilon = epsilon_for_pump(m, target_p);
  return m;
}

int cmd_validate() {
  ValidateReport rep;

  {  // truncated positive-P against the analytic solitary statistics
    NopoParams m = small_g_params(2.0);
    RunPlan plan;
    plan.engine = Engine::Tpsde;
    plan.network.nodes = {m};
    plan.target_p = 2.0;
    plan.dt = 1e-4;
    plan.ramp_time = 30.0;
    plan.average_window = 30.0;
    plan.n_traj = 400;
    plan.master_seed = 11;
    const auto rec = run(plan).back();
    const double n_ref = analytic_moment(m, 1);
    const double dn = std::abs(rec.moments.n_mean - n_ref);
    // the truncated engines carry an intrinsic O(1)-photon offset in the
    // steady <n> near threshold; allow it on top of the statistical band
    rep.check("tpsde vs analytic <n> (p=2)",
              dn < 3.0 * rec.moments.n_err + 1.0,
              "n=" + fd(rec.moments.n_mean) + " ref=" + fd(n_ref) +
                  " err=" + fd(rec.moments.n_err));
    const double g2_ref = analytic_g2(m);
    rep.check("tpsde vs analytic g2 (p=2)",
              std::abs(rec.stats.g2 - g2_ref) < 3.0 * rec.stats.g2_err,
              "g2=" + fd(rec.stats.g2) + " ref=" + fd(g2_ref) +
                  " err=" + fd(rec.stats.g2_err));
  }

  {  // truncated Wigner bridge on the same configuration
    NopoParams m = small_g_params(2.0);
    RunPlan plan;
    plan.engine = Engine::Twsde;
    plan.network.nodes = {m};
    plan.target_p = 2.0;
    plan.dt = 1e-4;
    plan.ramp_time = 30.0;
    plan.average_window = 30.0;
    plan.n_traj = 400;
    plan.master_seed = 12;
    const auto rec = run(plan).back();
    const double n_ref = analytic_moment(m, 1);
    // same one-photon truncation-offset allowance as the tpsde check
    rep.check("twsde vs analytic <n> (p=2)",
              std::abs(rec.moments.n_mean - n_ref) <
                  3.0 * rec.moments.n_err + 1.0,
              "n=" + fd(rec.moments.n_mean) + " ref=" + fd(n_ref) +
                  " err=" + fd(rec.moments.n_err));
    const double q_ref = analytic_q(m);
    rep.check("twsde vs analytic Q (p=2)",
              std::abs(rec.stats.mandel_q - q_ref) <
                  3.0 * rec.stats.mandel_q_err,
              "Q=" + fd(rec.stats.mandel_q) + " ref=" + fd(q_ref) +
                  " err=" + fd(rec.stats.mandel_q_err));
  }

  {  // pump-eliminated Fock evolution against the detailed-balance diagonal
    NopoParams m;
    m.gamma_p = 50.0;
    m.big_g = 50.0;
    m.epsilon = epsilon_for_pump(m, 2.0);
    RunPlan plan;
    plan.engine = Engine::FockSingle;
    plan.network.nodes = {m};
    plan.target_p = 2.0;
    plan.dt = 2e-4;
    plan.ramp_time = 5.0;
    plan.average_window = 15.0;
    plan.cutoff = 20;
    const auto rec = run(plan).back();
    const double n_ref = fock_steady_diagonal(m, 20).mean();
    const double rel = std::abs(rec.moments.n_mean - n_ref) / n_ref;
    rep.check("fock-single steady vs detailed balance", rel < 1e-5,
              "n=" + fd(rec.moments.n_mean) + " ref=" + fd(n_ref) +
                  " rel=" + fd(rel));
  }

  {  // positive-P pair against the pump-eliminated pair solver
    NopoParams m;
    m.gamma_p = 100.0;
    m.big_g = 5.0;
    m.epsilon = epsilon_for_pump(m, 1.5);
    NetworkConfig net;
    net.nodes = {m, m};
    net.coupling_j = 1.0;

    RunPlan fock;
    fock.engine = Engine::FockPair;
    fock.network = net;
    fock.target_p = 1.5;
    fock.dt = 2e-4;
    fock.ramp_time = 2.0;
    fock.average_window = 2.0;
    fock.cutoff = 45;
    fock.snapshot_stride = 5000;  // every 1/gamma_s
    const auto frecs = run(fock);

    RunPlan sde = fock;
    sde.engine = Engine::PsdeFull;
    sde.dt = 2e-5;
    sde.snapshot_stride = 50000;  // aligned snapshot times
    sde.n_traj = 400;
    sde.master_seed = 13;
    const auto srecs = run(sde);
    // instantaneous ensemble averages against exact traces at matched times
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < 3 && k < srecs.size(); ++k) {
      const double dn =
          std::abs(srecs[k].moments.n_mean - frecs[k].moments.n_mean);
      if (!(dn < 3.0 * srecs[k].moments.n_err)) ok = false;
      detail += "t=" + fd(srecs[k].time) + " sde=" +
                fd(srecs[k].moments.n_mean) + " fock=" +
                fd(frecs[k].moments.n_mean) + " err=" +
                fd(srecs[k].moments.n_err) + "; ";
    }
    rep.check("psde-full pair vs fock-pair <n>(t)", ok, detail);
    rep.check("psde-full pair divergence-free",
              srecs.back().diagnostics.divergence_count == 0,
              std::to_string(srecs.back().diagnostics.divergence_count) +
                  " diverged of " + std::to_string(sde.n_traj));
  }

  {  // pump elimination against the direct two-mode master equation
    NopoParams m;
    m.gamma_p = 50.0;
    m.big_g = 100.0;
    m.epsilon = epsilon_for_pump(m, 2.0);
    NetworkConfig net;
    net.nodes = {m, m};
    net.coupling_j = 2.0;

    RunPlan direct;
    direct.engine = Engine::FockDirect;
    direct.network = net;
    direct.target_p = 2.0;
    direct.dt = 2e-4;
    direct.ramp_time = 1.0;
    direct.average_window = 1.0;
    direct.pump_cutoff = 2;
    direct.signal_cutoff = 5;
    const auto drec = run(direct).back();

    RunPlan elim = direct;
    elim.engine = Engine::FockPair;
    elim.dt = 2e-4;
    elim.cutoff = 8;
    const auto erec = run(elim).back();

    const double rel =
        std::abs(drec.moments.n_mean - erec.moments.n_mean) /
        drec.moments.n_mean;
    rep.check("fock-direct vs pump-eliminated <n>", rel < 5e-3,
              "direct=" + fd(drec.moments.n_mean) +
                  " eliminated=" + fd(erec.moments.n_mean) +
                  " rel=" + fd(rel));
    const double dh = std::abs(drec.stats.hz1_normalized -
                               erec.stats.hz1_normalized);
    rep.check("fock-direct vs pump-eliminated hz1n", dh < 5e-3,
              "direct=" + fd(drec.stats.hz1_normalized) +
                  " eliminated=" + fd(erec.stats.hz1_normalized) +
                  " diff=" + fd(dh));
    rep.check("fock-direct cutoffs adequate",
              drec.diagnostics.top_pump_occupancy < 1e-4 &&
                  drec.diagnostics.top_signal_occupancy < 1e-4,
              "pump=" + fd(drec.diagnostics.top_pump_occupancy) +
                  " signal=" + fd(drec.diagnostics.top_signal_occupancy));
  }

  std::cout << (rep.failures == 0 ? "validate: all checks passed"
                                  : "validate: FAILURES: " +
                                        std::to_string(rep.failures))
            << std::endl;
  return rep.failures == 0 ? kExitOk : kExitValidate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "steady-state photon statistics and entanglement of dissipatively "
      "coupled nondegenerate OPOs"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;

  auto* c_analytic =
      app.add_subcommand("analytic", "closed-form curves (no simulation)");
  std::string axis = "p";
  double lo = 0.1, hi = 10.0;
  int points = 50;
  c_analytic->add_option("--config", config_path, "config file")->required();
  c_analytic->add_option("--axis", axis, "grid axis: p or j")
      ->check(CLI::IsMember({"p", "j"}));
  c_analytic->add_option("--min", lo, "grid start");
  c_analytic->add_option("--max", hi, "grid end");
  c_analytic->add_option("--points", points, "grid size");
  add_overrides(c_analytic, ov);

  auto* c_run = app.add_subcommand("run", "single ensemble/evolution run");
  c_run->add_option("--config", config_path, "config file")->required();
  add_overrides(c_run, ov);

  auto* c_sweep = app.add_subcommand("sweep", "sweep p or j per [sweep]");
  c_sweep->add_option("--config", config_path, "config file")->required();
  add_overrides(c_sweep, ov);

  auto* c_validate = app.add_subcommand(
      "validate", "reduced-scale cross-engine consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (c_validate->parsed()) return cmd_validate();
    Config cfg = parse_config_file(config_path);
    ov.apply(cfg);
    if (c_analytic->parsed()) return cmd_analytic(cfg, axis, lo, hi, points);
    if (c_run->parsed()) return cmd_run(cfg);
    return cmd_sweep(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const Diverged& e) {
    std::cerr << "divergence: " << e.what() << std::endl;
    return kExitDiverged;
  } catch (const TraceDrift& e) {
    std::cerr << "trace drift: " << e.what() << std::endl;
    return kExitTraceDrift;
  } catch (const SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << std::endl;
    return kExitSim;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << std::endl;
    return kExitIo;
  }
}
