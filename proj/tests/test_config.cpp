#include <string>

#include "doctest.h"
#include "nopo/config.hpp"
#include "nopo/errors.hpp"

using namespace nopo;

namespace {

const char* kMinimal =
    "[model]\n"
    "gamma_p = 50\n"
    "gamma_s = 1\n"
    "big_g = 0.05\n"
    "[network]\n"
    "nodes = 1\n"
    "[run]\n"
    "engine = tpsde\n"
    "p = 2\n";

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const Config c = parse_config_text(kMinimal, "test");
  CHECK(c.plan.engine == Engine::Tpsde);
  CHECK(c.plan.network.nodes.size() == 1);
  CHECK(c.plan.network.nodes[0].gamma_p == 50.0);
  CHECK(c.plan.network.nodes[0].gamma_s == 1.0);
  CHECK(c.plan.network.nodes[0].big_g == 0.05);
  CHECK(c.plan.target_p == 2.0);
  CHECK(c.plan.ramp_time == 100.0);
  CHECK(c.plan.average_window == 100.0);
  CHECK(c.plan.master_seed == 1);
  CHECK_FALSE(c.sweep.present);
  CHECK(c.output.format == "csv");
}

TEST_CASE("all run keys are honored") {
  const std::string text = std::string(kMinimal) +
                           "dt = 0.0005\n"
                           "ramp_time = 7\n"
                           "settle_time = 4\n"
                           "average_window = 9\n"
                           "n_traj = 123\n"
                           "seed = 99\n"
                           "gauge = pump-signal\n"
                           "snapshot_stride = 250\n"
                           "trace_tol = 1e-5\n"
                           "cutoff_signal = 21\n"
                           "cutoff_pump = 3\n"
                           "pair_dense = true\n";
  const Config c = parse_config_text(text, "test");
  CHECK(c.plan.dt == 0.0005);
  CHECK(c.plan.ramp_time == 7.0);
  CHECK(c.plan.settle_time == 4.0);
  CHECK(c.plan.average_window == 9.0);
  CHECK(c.plan.n_traj == 123);
  CHECK(c.plan.master_seed == 99);
  CHECK(c.plan.gauge == DiffusionGauge::PumpSignal);
  CHECK(c.plan.snapshot_stride == 250);
  CHECK(c.plan.trace_tol == 1e-5);
  CHECK(c.plan.cutoff == 21);
  CHECK(c.plan.signal_cutoff == 21);
  CHECK(c.plan.pump_cutoff == 3);
  CHECK(c.plan.pair_dense);
}

TEST_CASE("misspelled key is a hard error naming the key") {
  const std::string text =
      "[model]\n"
      "gama_p = 50\n"
      "gamma_s = 1\n"
      "big_g = 0.05\n"
      "[network]\n"
      "nodes = 1\n"
      "[run]\n"
      "engine = tpsde\n"
      "p = 2\n";
  try {
    (void)parse_config_text(text, "bad.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gama_p") != std::string::npos);
    CHECK(msg.find("bad.ini") != std::string::npos);
  }
}

TEST_CASE("unknown section is a hard error") {
  const std::string text = std::string(kMinimal) + "[extras]\nfoo = 1\n";
  CHECK_THROWS_AS((void)parse_config_text(text, "test"), ConfigError);
}

TEST_CASE("meta section is accepted and ignored") {
  const std::string text =
      std::string(kMinimal) + "[meta]\ngenerated = anywhere\ncode = 1.0\n";
  const Config c = parse_config_text(text, "test");
  CHECK(c.plan.target_p == 2.0);
}

TEST_CASE("malformed numeric values are rejected") {
  const std::string text =
      "[model]\n"
      "gamma_p = fifty\n"
      "gamma_s = 1\n"
      "big_g = 0.05\n"
      "[network]\n"
      "nodes = 1\n"
      "[run]\n"
      "engine = tpsde\n"
      "p = 2\n";
  CHECK_THROWS_AS((void)parse_config_text(text, "test"), ConfigError);
}

TEST_CASE("unknown engine and gauge names are rejected") {
  CHECK_THROWS_AS(
      (void)parse_config_text(std::string(kMinimal) + "engine = warp\n",
                              "test"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse_config_text(std::string(kMinimal) + "gauge = sideways\n",
                              "test"),
      ConfigError);
}

TEST_CASE("two-node configs require and parse the coupling") {
  const std::string text =
      "[model]\n"
      "gamma_p = 100\n"
      "gamma_s = 1\n"
      "big_g = 5\n"
      "[network]\n"
      "nodes = 2\n"
      "coupling_j = 1.5\n"
      "[run]\n"
      "engine = psde-full\n"
      "p = 1.5\n";
  const Config c = parse_config_text(text, "test");
  CHECK(c.plan.network.nodes.size() == 2);
  CHECK(c.plan.network.coupling_j == 1.5);
  CHECK(c.plan.engine == Engine::PsdeFull);
}

TEST_CASE("idler parameters parse into the model") {
  const std::string text =
      "[model]\n"
      "gamma_p = 50\n"
      "gamma_s = 1\n"
      "gamma_i = 400\n"
      "kappa = 20\n"
      "big_g = 1\n"
      "[network]\n"
      "nodes = 1\n"
      "[run]\n"
      "engine = idler-psde\n"
      "p = 0.5\n";
  const Config c = parse_config_text(text, "test");
  REQUIRE(c.plan.network.nodes[0].gamma_i.has_value());
  CHECK(*c.plan.network.nodes[0].gamma_i == 400.0);
  CHECK(*c.plan.network.nodes[0].kappa == 20.0);
  CHECK(c.plan.engine == Engine::IdlerPsde);
}

TEST_CASE("sweep section parses sorted values") {
  const std::string text = std::string(kMinimal) +
                           "[sweep]\n"
                           "axis = p\n"
                           "values = 0.5, 1.0, 2.0\n";
  const Config c = parse_config_text(text, "test");
  REQUIRE(c.sweep.present);
  CHECK(c.sweep.axis == SweepAxis::Pump);
  REQUIRE(c.sweep.values.size() == 3);
  CHECK(c.sweep.values[1] == 1.0);

  const std::string jtext = std::string(kMinimal) +
                            "[sweep]\n"
                            "axis = j\n"
                            "values = 0, 2\n";
  CHECK(parse_config_text(jtext, "test").sweep.axis == SweepAxis::Coupling);
}

TEST_CASE("output section parses; non-csv formats are rejected") {
  const std::string text = std::string(kMinimal) +
                           "[output]\n"
                           "path = /tmp/out.csv\n"
                           "format = csv\n";
  CHECK(parse_config_text(text, "test").output.path == "/tmp/out.csv");
  CHECK_THROWS_AS(
      (void)parse_config_text(
          std::string(kMinimal) + "[output]\nformat = parquet\n", "test"),
      ConfigError);
}

TEST_CASE("engine names round-trip") {
  for (Engine e : {Engine::PsdeFull, Engine::Tpsde, Engine::Twsde,
                   Engine::IdlerPsde, Engine::FockSingle, Engine::FockPair,
                   Engine::FockDirect}) {
    CHECK(engine_from_name(engine_name(e)) == e);
  }
  CHECK_THROWS_AS((void)engine_from_name("nonsense"), ConfigError);
}

TEST_CASE("metadata documents re-parse to the identical plan") {
  const std::string text = std::string(kMinimal) +
                           "dt = 0.00012999999999999999\n"
                           "n_traj = 777\n"
                           "seed = 31\n"
                           "[sweep]\n"
                           "axis = p\n"
                           "values = 0.25, 1.75\n"
                           "[output]\n"
                           "path = /tmp/x.csv\n";
  const Config c = parse_config_text(text, "test");
  const std::string doc = write_metadata(c, {{"origin", "round-trip test"}});
  const Config c2 = parse_config_text(doc, "meta");

  CHECK(c2.plan.engine == c.plan.engine);
  CHECK(c2.plan.target_p == c.plan.target_p);
  CHECK(c2.plan.dt == c.plan.dt);
  CHECK(c2.plan.ramp_time == c.plan.ramp_time);
  CHECK(c2.plan.settle_time == c.plan.settle_time);
  CHECK(c2.plan.average_window == c.plan.average_window);
  CHECK(c2.plan.n_traj == c.plan.n_traj);
  CHECK(c2.plan.master_seed == c.plan.master_seed);
  CHECK(c2.plan.cutoff == c.plan.cutoff);
  CHECK(c2.plan.network.nodes[0].gamma_p == c.plan.network.nodes[0].gamma_p);
  CHECK(c2.plan.network.nodes[0].big_g == c.plan.network.nodes[0].big_g);
  REQUIRE(c2.sweep.present);
  REQUIRE(c2.sweep.values.size() == 2);
  CHECK(c2.sweep.values[0] == c.sweep.values[0]);
  CHECK(c2.sweep.values[1] == c.sweep.values[1]);
  CHECK(c2.output.path == c.output.path);
}

TEST_CASE("full-precision double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456.789012345678, -2.5e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
