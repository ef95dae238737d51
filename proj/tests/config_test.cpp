#include "lqrq/config.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "test_util.hpp"

namespace lqrq {
namespace {

const std::filesystem::path kConfigDir = LQRQ_CONFIG_DIR;

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(LoadConfig, ShippedExperimentOne) {
  const ExperimentConfig cfg = load_config(kConfigDir / "exp1.cfg");
  EXPECT_EQ(cfg.plant, (PlantParams{0.2, 0.5, 0.3, 9.8}));
  EXPECT_EQ(cfg.weights.q.matrix(), Matrix::diagonal(std::vector<double>{100, 1, 10, 1}));
  EXPECT_EQ(cfg.weights.r(0, 0), 1.0);
  EXPECT_EQ(cfg.learner.mu, 10.0);
  EXPECT_EQ(cfg.learner.nu, 5e-3);
  EXPECT_EQ(cfg.learner.n_s, 20u);
  EXPECT_EQ(cfg.dt, 0.01);
  EXPECT_EQ(cfg.duration, 60.0);
  EXPECT_FALSE(cfg.fault.has_value());
  EXPECT_EQ(cfg.plant_mode, PlantMode::Nonlinear);
}

TEST(LoadConfig, ShippedExperimentTwo) {
  const ExperimentConfig cfg = load_config(kConfigDir / "exp2.cfg");
  ASSERT_TRUE(cfg.fault.has_value());
  EXPECT_EQ(cfg.fault->time, 20.0);
  EXPECT_EQ(cfg.fault->scale_m, 0.5);
  EXPECT_EQ(cfg.fault->scale_l, 0.5);
}

TEST(LoadConfig, OverrideReplacesValue) {
  const ExperimentConfig cfg = load_config(kConfigDir / "exp1.cfg", {"plant.m=0.4"});
  EXPECT_EQ(cfg.plant.m, 0.4);
  EXPECT_EQ(cfg.plant.l, 0.3);
}

TEST(LoadConfig, MissingFileIsIoError) {
  EXPECT_THROW(load_config(kConfigDir / "does_not_exist.cfg"), IoError);
}

TEST(ParseConfig, InvalidValueNamesField) {
  const std::string msg = error_of("", {"plant.l=-0.3"});
  EXPECT_NE(msg.find("plant.l"), std::string::npos) << msg;
}

TEST(ParseConfig, UnknownKey) {
  const std::string msg = error_of("[plant]\nmass = 0.2\n");
  EXPECT_NE(msg.find("plant.mass"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_FALSE(error_of("", {"bogus.key=1"}).empty());
}

TEST(ParseConfig, MalformedLineReportsLineNumber) {
  const std::string msg = error_of("[plant]\nm = 0.2\nthis line has no equals sign\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_FALSE(error_of("[run]\ndt = fast\n").empty());
  EXPECT_FALSE(error_of("[weights]\nq_diag = 1, 2, 3\n").empty());
}

TEST(ParseConfig, SectionsCommentsAndDottedKeys) {
  const ExperimentConfig cfg = parse_config(
      "# comment\n[learner]\nn_s = 30  # trailing\nrun.duration = 5\n\n[run]\nfault_time = 2\n");
  EXPECT_EQ(cfg.learner.n_s, 30u);
  EXPECT_EQ(cfg.duration, 5.0);
  ASSERT_TRUE(cfg.fault.has_value());
  EXPECT_EQ(cfg.fault->time, 2.0);
}

TEST(ParseConfig, KeyValueRoundTrip) {
  ExperimentConfig cfg;
  cfg.plant.m = 0.1 + 0.2;
  cfg.learner.rng_seed = 12345;
  cfg.fault = FaultSpec{3.3, 0.25, 0.75};
  cfg.warm_start_gain = Gain{{1.0 / 3.0, 2, 3, 4}};
  cfg.plant_mode = PlantMode::Linearized;
  std::string text;
  for (const auto& [k, v] : config_to_key_values(cfg)) text += k + " = " + v + "\n";
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(config_to_key_values(back), config_to_key_values(cfg));
  EXPECT_EQ(back.plant.m, cfg.plant.m);
  EXPECT_EQ(back.warm_start_gain, cfg.warm_start_gain);
}

TEST(ParseConfig, WarmStartSummaryIsResolvedRelativeToConfig) {
  testing::TempDir dir("warm");
  ExperimentConfig base;
  base.duration = 1.0;
  const RunRecord rec = run_experiment(base);
  write_log(rec, dir.path() / "warmup");
  const std::filesystem::path cfg_path = dir.path() / "exp.cfg";
  std::ofstream(cfg_path) << "[run]\nwarm_start_summary = warmup/summary.txt\n";
  const ExperimentConfig cfg = load_config(cfg_path);
  ASSERT_TRUE(cfg.warm_start_m.has_value());
  EXPECT_EQ(*cfg.warm_start_m, rec.summary.final_m);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(60.0), "60");
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(parse_list(format_list(std::vector<double>{1.5, -2, 1e-300})),
            (Vector{1.5, -2, 1e-300}));
}

}  // namespace
}  // namespace lqrq
