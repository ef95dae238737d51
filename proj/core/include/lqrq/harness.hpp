#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lqrq/lqr_oracle.hpp"
#include "lqrq/plant.hpp"
#include "lqrq/qlearning.hpp"

namespace lqrq {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PlantMode { Nonlinear, Linearized };

struct FaultSpec {
  double time = 20.0;  // s
  double scale_m = 0.5;
  double scale_l = 0.5;
};

struct ExperimentConfig {
  PlantParams plant;
  CostWeights weights = default_weights();
  LearnerConfig learner;
  double dt = 0.01;
  double duration = 60.0;
  std::optional<FaultSpec> fault;
  std::optional<Gain> warm_start_gain;
  std::optional<QParams> warm_start_m;
  PlantMode plant_mode = PlantMode::Nonlinear;
  bool learning = true;
  // converged_at tolerance as a fraction of |K_oracle|.
  double convergence_ratio = 0.05;

  // Q = diag(100, 1, 10, 1), R = 1
  static CostWeights default_weights();

  // Throws ConfigError naming the offending field.
  void validate() const;
  std::size_t step_count() const;
};

enum class EventKind { WindowSolved, SolveFailed, EpisodeReset, DivergenceReset, Fault };

const char* to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct StepRow {
  double t = 0.0;
  State x{};
  double u = 0.0;
  double reward = 0.0;
  double gain_distance = 0.0;

  friend bool operator==(const StepRow&, const StepRow&) = default;
};

struct EventRow {
  double t = 0.0;
  EventKind kind = EventKind::WindowSolved;

  friend bool operator==(const EventRow&, const EventRow&) = default;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct RunSummary {
  Gain final_gain;
  Gain oracle_gain;
  std::optional<double> converged_at;
  QParams final_m;
  std::uint64_t seed = 0;
  std::size_t windows_solved = 0;
  KeyValues config;  // fully resolved configuration, as written by config_to_key_values

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct RunRecord {
  std::vector<StepRow> steps;
  std::vector<EventRow> events;
  RunSummary summary;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// |k1 - k2|_2
double gain_distance(const Gain& k1, const Gain& k2);

// Model-based optimal gain for params at the given sampling period. Only the
// metrics use it; the learner never sees it.
RiccatiSolution oracle_for(const PlantParams& p, const CostWeights& w, double dt);

// Closed-loop simulation of learner and plant for duration/dt steps.
RunRecord run_experiment(const ExperimentConfig& cfg);

// First time after which every remaining distance is below its tolerance.
std::optional<double> converged_at(const std::vector<StepRow>& steps,
                                   const std::vector<double>& tolerances);

// Writes steps.csv, events.csv and summary.txt into dir (created if missing).
void write_log(const RunRecord& rec, const std::filesystem::path& dir);
RunRecord read_log(const std::filesystem::path& dir);

// Reads only summary.txt from dir, or the file itself if a file path is given.
RunSummary read_summary(const std::filesystem::path& path);

struct SweepResult {
  std::uint64_t seed = 0;
  RunSummary summary;
  std::size_t episode_resets = 0;
  std::size_t divergence_resets = 0;
};

// Runs cfg with seeds base, base+1, ... on up to `jobs` threads. When
// out_dir is non-empty each run's log goes to out_dir/seed_<n>.
std::vector<SweepResult> run_sweep(const ExperimentConfig& cfg, std::size_t runs,
                                   std::size_t jobs, const std::filesystem::path& out_dir = {});

}  // namespace lqrq
