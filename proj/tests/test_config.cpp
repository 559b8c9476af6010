#include <gtest/gtest.h>

#include "refcond/config.hpp"
#include "test_support.hpp"

using namespace refcond;

namespace {

const char* kMinimal = R"(
system:
  A: [[1.0, 0.1], [0.0, 1.0]]
  B: [[0.005], [0.1]]
  C: [[1.0, 0.0]]
  Ts: 0.1
weights:
  Q: [[1.0]]
  R: [[1.0]]
horizon: 10
)";

} // namespace

TEST(Config, Defaults) {
    const ProblemConfig cfg = parse_config(kMinimal, "mem");
    EXPECT_EQ(cfg.horizon, 10);
    EXPECT_EQ(cfg.x0, Vector::Zero(2));
    ASSERT_TRUE(cfg.rho.has_value());
    EXPECT_EQ(*cfg.rho, 1e6);
    EXPECT_EQ(cfg.controller, ControllerKind::reference_condensation(1e6));
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_FALSE(cfg.signal.has_value());
    EXPECT_THROW(cfg.simulation(), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
    for (const char* name : {"double_integrator_step.yaml", "double_integrator_sinusoid.yaml",
                             "double_integrator_random.yaml", "zero_reference.yaml", "afti16.yaml"}) {
        EXPECT_NO_THROW(load_config(test_support::config_path(name))) << name;
    }
    const ProblemConfig afti = load_config(test_support::config_path("afti16.yaml"));
    EXPECT_EQ(afti.system.nx(), 4);
    EXPECT_EQ(afti.system.nu(), 2);
    EXPECT_EQ(afti.system.nr(), 2);
}

TEST(Config, ControllerAndSignal) {
    const std::string text = std::string(kMinimal) + R"(
controller:
  kind: average_ref
signal:
  kind: step
  t_step: 2.0
  after: [1.0]
simulation:
  T_final: 4.0
  x0: [0.5, 0.0]
)";
    const ProblemConfig cfg = parse_config(text, "mem");
    EXPECT_EQ(cfg.controller, ControllerKind::average_reference());
    const SimConfig sim = cfg.simulation();
    EXPECT_EQ(sim.steps(), 40);
    EXPECT_EQ(sim.x0(0), 0.5);
    EXPECT_EQ(sim.signal.at(2.0)(0), 1.0);
    EXPECT_EQ(sim.signal.at(1.9)(0), 0.0);
}

TEST(Config, UnweightedRho) {
    const ProblemConfig cfg = parse_config(std::string(kMinimal) + "controller:\n  kind: ref_cond\n  rho: unweighted\n", "mem");
    EXPECT_FALSE(cfg.rho.has_value());
    EXPECT_EQ(cfg.controller, ControllerKind::reference_condensation());
}

TEST(Config, SeedOverride) {
    const std::string text = std::string(kMinimal) +
                             "signal:\n  kind: random_piecewise_constant\n  duration: 10\nsimulation:\n  T_final: 10\n  seed: 3\n";
    const ProblemConfig a = parse_config(text, "mem");
    const ProblemConfig b = parse_config(text, "mem", 3);
    const ProblemConfig c = parse_config(text, "mem", 4);
    EXPECT_EQ(a.seed, 3u);
    EXPECT_EQ(c.seed, 4u);
    double diff = 0.0;
    for (double t = 0.0; t < 10.0; t += 0.5) {
        EXPECT_EQ(a.signal->at(t)(0), b.signal->at(t)(0));
        diff += std::abs(a.signal->at(t)(0) - c.signal->at(t)(0));
    }
    EXPECT_GT(diff, 0.0);
}

TEST(Config, ErrorsCarryLocation) {
    const std::string ragged = R"(
system:
  A: [[1.0, 0.1], [0.0]]
  B: [[0.005], [0.1]]
  C: [[1.0, 0.0]]
  Ts: 0.1
weights:
  Q: [[1.0]]
  R: [[1.0]]
horizon: 10
)";
    try {
        parse_config(ragged, "bad.yaml");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("bad.yaml:3"), std::string::npos) << what;
        EXPECT_NE(what.find("A"), std::string::npos) << what;
    }
}

TEST(Config, RejectsInvalidDocuments) {
    EXPECT_THROW(parse_config("system: [1, 2", "x"), ConfigError);
    EXPECT_THROW(parse_config("- 1\n- 2\n", "x"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal).replace(std::string(kMinimal).find("horizon: 10"), 11, "horizon: 0"), "x"),
                 ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "controller:\n  kind: magic\n", "x"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "controller:\n  kind: ref_cond\n  rho: -1\n", "x"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "signal:\n  kind: step\n  t_step: 1\n  after: [1, 2]\n", "x"),
                 ConfigError);
    EXPECT_THROW(load_config("/nonexistent/refcond.yaml"), ConfigError);
}
