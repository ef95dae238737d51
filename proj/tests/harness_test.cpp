#include "lqrq/harness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "lqrq/config.hpp"
#include "test_util.hpp"

namespace lqrq {
namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ExperimentConfig short_run(double duration) {
  ExperimentConfig cfg;
  cfg.duration = duration;
  return cfg;
}

TEST(GainDistance, EuclideanNorm) {
  EXPECT_EQ(gain_distance(Gain{{25, 4, 3, 3.5}}, Gain{{23, 4, 3, 3.5}}), 2.0);
  EXPECT_NEAR(gain_distance(Gain{{2.0502, 1.2992, -1.8426, -1.1109}}, Gain{{0, 0, 0, 0}}),
              3.2435342221101973, 1e-12);
  EXPECT_EQ(gain_distance(Gain{{1, 2}}, Gain{{1, 2}}), 0.0);
  EXPECT_THROW(gain_distance(Gain{{1}}, Gain{{1, 2}}), std::invalid_argument);
}

TEST(ConvergedAt, LastCrossing) {
  std::vector<StepRow> rows(5);
  const double d[] = {5, 0.1, 5, 0.1, 0.1};
  for (std::size_t i = 0; i < 5; ++i) {
    rows[i].t = 0.5 * static_cast<double>(i);
    rows[i].gain_distance = d[i];
  }
  EXPECT_EQ(converged_at(rows, std::vector<double>(5, 1.0)), 1.5);
  rows[4].gain_distance = 2.0;
  EXPECT_EQ(converged_at(rows, std::vector<double>(5, 1.0)), std::nullopt);
  EXPECT_EQ(converged_at(rows, std::vector<double>(5, 10.0)), 0.0);
}

TEST(RunExperiment, SingleStepRun) {
  const RunRecord rec = run_experiment(short_run(0.01));
  ASSERT_EQ(rec.steps.size(), 1u);
  EXPECT_EQ(rec.steps[0].t, 0.0);
}

TEST(RunExperiment, RowCountAndTimestamps) {
  const RunRecord rec = run_experiment(short_run(1.0));
  ASSERT_EQ(rec.steps.size(), 100u);
  for (std::size_t i = 0; i < rec.steps.size(); ++i) {
    EXPECT_EQ(rec.steps[i].t, static_cast<double>(i) * 0.01);
  }
  for (std::size_t i = 1; i < rec.events.size(); ++i) {
    EXPECT_LE(rec.events[i - 1].t, rec.events[i].t);
  }
}

TEST(RunExperiment, FaultSwapsOracle) {
  ExperimentConfig cfg = short_run(2.0);
  cfg.fault = FaultSpec{1.0, 0.5, 0.5};
  const RunRecord rec = run_experiment(cfg);
  const auto faults = std::count_if(rec.events.begin(), rec.events.end(),
                                    [](const EventRow& e) { return e.kind == EventKind::Fault; });
  EXPECT_EQ(faults, 1);
  const auto it = std::find_if(rec.events.begin(), rec.events.end(),
                               [](const EventRow& e) { return e.kind == EventKind::Fault; });
  EXPECT_NEAR(it->t, 1.0, 1e-12);
  const RiccatiSolution post =
      oracle_for(apply_fault(cfg.plant, 0.5, 0.5), cfg.weights, cfg.dt);
  EXPECT_EQ(rec.summary.oracle_gain, post.k);
}

TEST(RunExperiment, WarmStartAtOptimumStaysThere) {
  ExperimentConfig cfg = short_run(5.0);
  cfg.plant_mode = PlantMode::Linearized;
  cfg.learner.noise_std = 1e-9;
  const RiccatiSolution oracle = oracle_for(cfg.plant, cfg.weights, cfg.dt);
  cfg.warm_start_m = QParams{oracle.m_star};
  const RunRecord rec = run_experiment(cfg);
  double worst = 0.0;
  for (const StepRow& row : rec.steps) worst = std::max(worst, row.gain_distance);
  EXPECT_LE(worst, 1e-4);
  EXPECT_EQ(rec.summary.converged_at, 0.0);
}

TEST(RunExperiment, BoundedAfterConvergence) {
  const RunRecord rec = run_experiment(ExperimentConfig{});
  ASSERT_TRUE(rec.summary.converged_at.has_value());
  const double tc = *rec.summary.converged_at;
  for (const StepRow& row : rec.steps) {
    if (row.t < tc) continue;
    EXPECT_LE(std::abs(row.x[kTheta]), 0.5) << "t " << row.t;
    EXPECT_LE(std::abs(row.x[kCartPos]), 3.0) << "t " << row.t;
  }
  for (const EventRow& e : rec.events) {
    if (e.t < tc) continue;
    EXPECT_NE(e.kind, EventKind::EpisodeReset);
    EXPECT_NE(e.kind, EventKind::DivergenceReset);
  }
}

TEST(RunExperiment, FrozenGainProducesNoEvents) {
  ExperimentConfig cfg = short_run(3.0);
  cfg.learning = false;
  cfg.warm_start_gain = oracle_for(cfg.plant, cfg.weights, cfg.dt).k;
  const RunRecord rec = run_experiment(cfg);
  EXPECT_TRUE(rec.events.empty());
  EXPECT_EQ(rec.summary.windows_solved, 0u);
  EXPECT_EQ(rec.summary.final_gain, *cfg.warm_start_gain);
}

TEST(RunLog, RoundTrip) {
  testing::TempDir dir("roundtrip");
  ExperimentConfig cfg = short_run(2.0);
  cfg.fault = FaultSpec{1.0, 0.5, 0.5};
  const RunRecord rec = run_experiment(cfg);
  write_log(rec, dir.path() / "run");
  EXPECT_EQ(read_log(dir.path() / "run"), rec);
  EXPECT_EQ(read_summary(dir.path() / "run"), rec.summary);
  EXPECT_EQ(read_summary(dir.path() / "run" / "summary.txt"), rec.summary);
}

TEST(RunLog, EmptyEventsFileHasHeaderOnly) {
  testing::TempDir dir("events");
  ExperimentConfig cfg = short_run(0.5);
  cfg.learning = false;
  const RunRecord rec = run_experiment(cfg);
  ASSERT_TRUE(rec.events.empty());
  write_log(rec, dir.path());
  EXPECT_EQ(slurp(dir.path() / "events.csv"), "t,kind\n");
  EXPECT_TRUE(read_log(dir.path()).events.empty());
}

TEST(RunLog, StepsHeader) {
  testing::TempDir dir("header");
  write_log(run_experiment(short_run(0.05)), dir.path());
  std::istringstream in(slurp(dir.path() / "steps.csv"));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,theta,theta_dot,y,y_dot,u,reward,gain_distance");
}

TEST(RunLog, MissingDirectoryIsIoError) {
  EXPECT_THROW(read_log("/nonexistent/lqrq/run"), IoError);
}

TEST(RunLog, SameSeedGivesIdenticalFiles) {
  testing::TempDir dir("determinism");
  ExperimentConfig cfg = short_run(5.0);
  cfg.learner.rng_seed = 7;
  write_log(run_experiment(cfg), dir.path() / "a");
  write_log(run_experiment(cfg), dir.path() / "b");
  for (const char* name : {"steps.csv", "events.csv", "summary.txt"}) {
    EXPECT_EQ(slurp(dir.path() / "a" / name), slurp(dir.path() / "b" / name)) << name;
  }
  cfg.learner.rng_seed = 8;
  write_log(run_experiment(cfg), dir.path() / "c");
  EXPECT_NE(slurp(dir.path() / "a" / "steps.csv"), slurp(dir.path() / "c" / "steps.csv"));
}

TEST(RunSweep, MatchesSequentialRuns) {
  ExperimentConfig cfg = short_run(3.0);
  cfg.learner.rng_seed = 5;
  const std::vector<SweepResult> sweep = run_sweep(cfg, 4, 3);
  ASSERT_EQ(sweep.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    ExperimentConfig one = cfg;
    one.learner.rng_seed = 5 + i;
    EXPECT_EQ(sweep[i].seed, 5 + i);
    EXPECT_EQ(sweep[i].summary, run_experiment(one).summary);
  }
}

TEST(ExperimentConfig, Validation) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.duration = 0.001;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.fault = FaultSpec{100.0, 0.5, 0.5};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.plant.l = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace lqrq
