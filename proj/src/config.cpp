#include "nopo/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nopo {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double out;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  if (pos != v.size()) {
    throw ConfigError("key '" + key + "': trailing junk in '" + v + "'");
  }
  return out;
}

long parse_long(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  long out;
  try {
    out = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  }
  if (pos != v.size()) {
    throw ConfigError("key '" + key + "': trailing junk in '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, key));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

}  // namespace

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::PsdeFull: return "psde-full";
    case Engine::Tpsde: return "tpsde";
    case Engine::Twsde: return "twsde";
    case Engine::IdlerPsde: return "idler-psde";
    case Engine::FockSingle: return "fock-single";
    case Engine::FockPair: return "fock-pair";
    case Engine::FockDirect: return "fock-direct";
  }
  return "?";
}

Engine engine_from_name(const std::string& name) {
  if (name == "psde-full") return Engine::PsdeFull;
  if (name == "tpsde") return Engine::Tpsde;
  if (name == "twsde") return Engine::Twsde;
  if (name == "idler-psde") return Engine::IdlerPsde;
  if (name == "fock-single") return Engine::FockSingle;
  if (name == "fock-pair") return Engine::FockPair;
  if (name == "fock-direct") return Engine::FockDirect;
  throw ConfigError("unknown engine '" + name + "'");
}

Config parse_config_text(const std::string& text, const std::string& origin) {
  Config cfg;
  NopoParams model;
  model.gamma_s = 1.0;
  int nodes = 1;
  double coupling_j = 0.0;
  bool saw_gamma_p = false, saw_big_g = false;

  std::string section;
  std::istringstream ss(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    std::string line = raw;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where =
        origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(where + ": malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "network" && section != "run" &&
          section != "sweep" && section != "output" && section != "meta") {
        throw ConfigError(where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected key = value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError(where + ": key '" + key + "' outside any section");
    }
    if (section == "meta") continue;  // informational round-trip section

    if (section == "model") {
      if (key == "gamma_p") { model.gamma_p = parse_double(val, key); saw_gamma_p = true; }
      else if (key == "gamma_s") model.gamma_s = parse_double(val, key);
      else if (key == "big_g") { model.big_g = parse_double(val, key); saw_big_g = true; }
      else if (key == "gamma_i") model.gamma_i = parse_double(val, key);
      else if (key == "kappa") model.kappa = parse_double(val, key);
      else throw ConfigError(where + ": unknown key '" + key + "' in [model]");
    } else if (section == "network") {
      if (key == "nodes") {
        nodes = static_cast<int>(parse_long(val, key));
        if (nodes != 1 && nodes != 2) {
          throw ConfigError(where + ": nodes must be 1 or 2");
        }
      } else if (key == "coupling_j") {
        coupling_j = parse_double(val, key);
      } else {
        throw ConfigError(where + ": unknown key '" + key + "' in [network]");
      }
    } else if (section == "run") {
      if (key == "engine") cfg.plan.engine = engine_from_name(val);
      else if (key == "p") cfg.plan.target_p = parse_double(val, key);
      else if (key == "dt") cfg.plan.dt = parse_double(val, key);
      else if (key == "ramp_time") cfg.plan.ramp_time = parse_double(val, key);
      else if (key == "settle_time")
        cfg.plan.settle_time = parse_double(val, key);
      else if (key == "average_window") cfg.plan.average_window = parse_double(val, key);
      else if (key == "n_traj") cfg.plan.n_traj = static_cast<std::size_t>(parse_long(val, key));
      else if (key == "cutoff_signal") {
        cfg.plan.cutoff = static_cast<int>(parse_long(val, key));
        cfg.plan.signal_cutoff = cfg.plan.cutoff;
      } else if (key == "cutoff_pump") cfg.plan.pump_cutoff = static_cast<int>(parse_long(val, key));
      else if (key == "seed") cfg.plan.master_seed = static_cast<std::uint64_t>(parse_long(val, key));
      else if (key == "gauge") {
        if (val == "standard") cfg.plan.gauge = DiffusionGauge::Standard;
        else if (val == "pump-signal") cfg.plan.gauge = DiffusionGauge::PumpSignal;
        else throw ConfigError(where + ": unknown gauge '" + val + "'");
      } else if (key == "snapshot_stride") cfg.plan.snapshot_stride = parse_long(val, key);
      else if (key == "trace_tol") cfg.plan.trace_tol = parse_double(val, key);
      else if (key == "pair_dense") cfg.plan.pair_dense = parse_bool(val, key);
      else throw ConfigError(where + ": unknown key '" + key + "' in [run]");
    } else if (section == "sweep") {
      cfg.sweep.present = true;
      if (key == "axis") {
        if (val == "p") cfg.sweep.axis = SweepAxis::Pump;
        else if (val == "j") cfg.sweep.axis = SweepAxis::Coupling;
        else throw ConfigError(where + ": sweep axis must be p or j");
      } else if (key == "values") {
        cfg.sweep.values = parse_list(val, key);
      } else {
        throw ConfigError(where + ": unknown key '" + key + "' in [sweep]");
      }
    } else if (section == "output") {
      if (key == "path") cfg.output.path = val;
      else if (key == "format") {
        if (val != "csv") throw ConfigError(where + ": only csv output is supported");
        cfg.output.format = val;
      } else {
        throw ConfigError(where + ": unknown key '" + key + "' in [output]");
      }
    }
  }

  if (!saw_gamma_p) throw ConfigError(origin + ": [model] gamma_p is required");
  if (!saw_big_g) throw ConfigError(origin + ": [model] big_g is required");
  model.epsilon = epsilon_for_pump(model, cfg.plan.target_p);
  model.validate();
  cfg.plan.network.nodes.assign(static_cast<std::size_t>(nodes), model);
  cfg.plan.network.coupling_j = coupling_j;
  cfg.plan.network.validate();
  if (cfg.sweep.present && cfg.sweep.values.empty()) {
    throw ConfigError(origin + ": [sweep] values is required");
  }
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string write_metadata(
    const Config& config,
    const std::vector<std::pair<std::string, std::string>>& meta) {
  const RunPlan& p = config.plan;
  const NopoParams& m = p.network.nodes[0];
  std::ostringstream out;
  out << "[model]\n";
  out << "gamma_p = " << format_double(m.gamma_p) << "\n";
  out << "gamma_s = " << format_double(m.gamma_s) << "\n";
  out << "big_g = " << format_double(m.big_g) << "\n";
  if (m.gamma_i) out << "gamma_i = " << format_double(*m.gamma_i) << "\n";
  if (m.kappa) out << "kappa = " << format_double(*m.kappa) << "\n";
  out << "\n[network]\n";
  out << "nodes = " << p.network.nodes.size() << "\n";
  out << "coupling_j = " << format_double(p.network.coupling_j) << "\n";
  out << "\n[run]\n";
  out << "engine = " << engine_name(p.engine) << "\n";
  out << "p = " << format_double(p.target_p) << "\n";
  out << "dt = " << format_double(p.dt) << "\n";
  out << "ramp_time = " << format_double(p.ramp_time) << "\n";
  out << "settle_time = " << format_double(p.settle_time) << "\n";
  out << "average_window = " << format_double(p.average_window) << "\n";
  out << "n_traj = " << p.n_traj << "\n";
  out << "cutoff_signal = " << p.cutoff << "\n";
  out << "cutoff_pump = " << p.pump_cutoff << "\n";
  out << "seed = " << p.master_seed << "\n";
  out << "gauge = "
      << (p.gauge == DiffusionGauge::Standard ? "standard" : "pump-signal")
      << "\n";
  out << "snapshot_stride = " << p.snapshot_stride << "\n";
  if (p.trace_tol > 0.0) {
    out << "trace_tol = " << format_double(p.trace_tol) << "\n";
  }
  if (p.pair_dense) out << "pair_dense = true\n";
  if (config.sweep.present) {
    out << "\n[sweep]\n";
    out << "axis = "
        << (config.sweep.axis == SweepAxis::Pump ? "p" : "j") << "\n";
    out << "values = ";
    for (std::size_t i = 0; i < config.sweep.values.size(); ++i) {
      if (i) out << ", ";
      out << format_double(config.sweep.values[i]);
    }
    out << "\n";
  }
  if (!config.output.path.empty()) {
    out << "\n[output]\n";
    out << "path = " << config.output.path << "\n";
    out << "format = " << config.output.format << "\n";
  }
  if (!meta.empty()) {
    out << "\n[meta]\n";
    for (const auto& [k, v] : meta) out << k << " = " << v << "\n";
  }
  return out.str();
}

}  // namespace nopo
