#pragma once

#include <string>
#include <vector>

#include "nopo/runner.hpp"

namespace nopo {

struct SweepSpec {
  bool present = false;
  SweepAxis axis = SweepAxis::Pump;
  std::vector<double> values;
};

struct OutputSpec {
  std::string path;
  std::string format = "csv";
};

struct Config {
  RunPlan plan;
  SweepSpec sweep;
  OutputSpec output;
};

// INI-style config: [model] gamma_p, gamma_s, big_g, gamma_i, kappa;
// [network] nodes, coupling_j; [run] engine, p, dt, ramp_time, settle_time,
// average_window, n_traj, cutoff_signal, cutoff_pump, seed, gauge,
// snapshot_stride, trace_tol, pair_dense; [sweep] axis, values;
// [output] path, format. A [meta] section is accepted and ignored so that
// emitted metadata documents can be re-fed as configs. Unknown sections or
// keys are hard errors.
Config parse_config_text(const std::string& text, const std::string& origin);
Config parse_config_file(const std::string& path);

std::string engine_name(Engine e);
Engine engine_from_name(const std::string& name);

// Fully resolved config plus a [meta] section (informational key-value
// pairs); re-parsing the result reproduces the same plan bit-for-bit.
std::string write_metadata(
    const Config& config,
    const std::vector<std::pair<std::string, std::string>>& meta);

// Locale-independent full-precision formatting (17 significant digits).
std::string format_double(double v);

}  // namespace nopo
