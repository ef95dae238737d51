#include "lqrq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "lqrq/config.hpp"

namespace lqrq {

CostWeights ExperimentConfig::default_weights() {
  const double q_diag[] = {100.0, 1.0, 10.0, 1.0};
  return CostWeights::diagonal(q_diag, 1.0);
}

void ExperimentConfig::validate() const {
  try {
    plant.validate();
    weights.validate();
    learner.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (weights.q.dim() != kStateDim || weights.r.dim() != kInputDim) {
    throw ConfigError("weights must be 4x4 (q) and 1x1 (r)");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("run.dt must be > 0");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("run.duration must be > 0");
  if (step_count() == 0) throw ConfigError("run.duration must be at least run.dt");
  if (!(convergence_ratio > 0.0)) throw ConfigError("run.convergence_ratio must be > 0");
  if (fault) {
    if (!(fault->time >= 0.0) || !(fault->time < duration)) {
      throw ConfigError("run.fault_time must lie in [0, run.duration)");
    }
    if (!(fault->scale_m > 0.0)) throw ConfigError("run.fault_scale_m must be > 0");
    if (!(fault->scale_l > 0.0)) throw ConfigError("run.fault_scale_l must be > 0");
  }
  if (warm_start_gain && warm_start_gain->k.size() != kStateDim) {
    throw ConfigError("run.warm_start_gain must have 4 entries");
  }
  if (warm_start_m && warm_start_m->m.dim() != kQDim) {
    throw ConfigError("run.warm_start_m must describe a 5x5 matrix");
  }
}

std::size_t ExperimentConfig::step_count() const {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::WindowSolved: return "WindowSolved";
    case EventKind::SolveFailed: return "SolveFailed";
    case EventKind::EpisodeReset: return "EpisodeReset";
    case EventKind::DivergenceReset: return "DivergenceReset";
    case EventKind::Fault: return "Fault";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (EventKind k : {EventKind::WindowSolved, EventKind::SolveFailed, EventKind::EpisodeReset,
                      EventKind::DivergenceReset, EventKind::Fault}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace {

EventKind to_event_kind(LearnerEvent e) {
  switch (e) {
    case LearnerEvent::WindowSolved: return EventKind::WindowSolved;
    case LearnerEvent::SolveFailed: return EventKind::SolveFailed;
    case LearnerEvent::EpisodeReset: return EventKind::EpisodeReset;
    case LearnerEvent::DivergenceReset: return EventKind::DivergenceReset;
  }
  return EventKind::WindowSolved;
}

}  // namespace

double gain_distance(const Gain& k1, const Gain& k2) {
  if (k1.k.size() != k2.k.size()) throw std::invalid_argument("gain_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < k1.k.size(); ++i) {
    const double d = k1.k[i] - k2.k[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

RiccatiSolution oracle_for(const PlantParams& p, const CostWeights& w, double dt) {
  return solve_dare(linearize(p, dt), w);
}

std::optional<double> converged_at(const std::vector<StepRow>& steps,
                                   const std::vector<double>& tolerances) {
  if (steps.size() != tolerances.size()) {
    throw std::invalid_argument("converged_at: one tolerance per step required");
  }
  std::size_t first_good = 0;
  for (std::size_t i = steps.size(); i-- > 0;) {
    if (!(steps[i].gain_distance < tolerances[i])) {
      first_good = i + 1;
      break;
    }
  }
  if (first_good >= steps.size()) return std::nullopt;
  return steps[first_good].t;
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  Learner learner(cfg.weights, cfg.learner);
  if (cfg.warm_start_m) learner.warm_start(*cfg.warm_start_m);
  if (cfg.warm_start_gain) learner.set_gain(*cfg.warm_start_gain);
  learner.set_learning_enabled(cfg.learning);

  PlantParams params = cfg.plant;
  LinearModel model = linearize(params, cfg.dt);
  RiccatiSolution oracle = solve_dare(model, cfg.weights);
  double tol = cfg.convergence_ratio * norm2(oracle.k.k);

  const std::size_t n_steps = cfg.step_count();
  std::optional<std::size_t> fault_step;
  if (cfg.fault) {
    fault_step = static_cast<std::size_t>(std::ceil(cfg.fault->time / cfg.dt - 1e-9));
  }

  const Dynamics nonlinear = [&](const State& x, double u) {
    return euler_step(x, u, params, cfg.dt);
  };
  const Dynamics linear = [&](const State& x, double u) { return linear_step(model, x, u); };
  const Dynamics& plant = cfg.plant_mode == PlantMode::Nonlinear ? nonlinear : linear;

  RunRecord rec;
  rec.steps.reserve(n_steps);
  std::vector<double> tolerances;
  tolerances.reserve(n_steps);

  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    if (fault_step && i == *fault_step) {
      params = apply_fault(params, cfg.fault->scale_m, cfg.fault->scale_l);
      model = linearize(params, cfg.dt);
      oracle = solve_dare(model, cfg.weights);
      tol = cfg.convergence_ratio * norm2(oracle.k.k);
      rec.events.push_back({t, EventKind::Fault});
    }
    const double distance = gain_distance(learner.gain(), oracle.k);
    const StepOutcome out = learner.step(plant);
    rec.steps.push_back({t, out.x, out.u, out.reward, distance});
    tolerances.push_back(tol);
    for (LearnerEvent e : out.events) rec.events.push_back({t, to_event_kind(e)});
  }

  RunSummary& s = rec.summary;
  s.final_gain = learner.gain();
  s.oracle_gain = oracle.k;
  s.converged_at = converged_at(rec.steps, tolerances);
  s.final_m = learner.q();
  s.seed = cfg.learner.rng_seed;
  s.windows_solved = learner.windows_solved();
  s.config = config_to_key_values(cfg);
  return rec;
}

std::vector<SweepResult> run_sweep(const ExperimentConfig& cfg, std::size_t runs,
                                   std::size_t jobs, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::vector<SweepResult> results(runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < runs; i = next++) {
      try {
        ExperimentConfig run_cfg = cfg;
        run_cfg.learner.rng_seed = cfg.learner.rng_seed + i;
        const RunRecord rec = run_experiment(run_cfg);
        SweepResult& r = results[i];
        r.seed = run_cfg.learner.rng_seed;
        r.summary = rec.summary;
        for (const EventRow& e : rec.events) {
          if (e.kind == EventKind::EpisodeReset) ++r.episode_resets;
          if (e.kind == EventKind::DivergenceReset) ++r.divergence_resets;
        }
        if (!out_dir.empty()) write_log(rec, out_dir / ("seed_" + std::to_string(r.seed)));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(runs, 1));
  std::vector<std::jthread> pool;
  for (std::size_t j = 1; j < n_threads; ++j) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace lqrq
