#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "lqrq/linalg.hpp"
#include "lqrq/lqr_oracle.hpp"
#include "lqrq/plant.hpp"

namespace lqrq {

using Rng = std::mt19937_64;

inline constexpr std::size_t kQDim = kStateDim + kInputDim;
inline constexpr std::size_t kQParamCount = kQDim * (kQDim + 1) / 2;

// Quadratic Q-function Q(x, u) = [x; u]' M [x; u].
struct QParams {
  SymMatrix m;

  double evaluate(const State& x, double u) const;
  friend bool operator==(const QParams&, const QParams&) = default;
};

class SingularM22 : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearnerConfig {
  std::size_t n_s = 20;
  double noise_std = 0.05;  // N
  double h_threshold = 1e6;
  State bounds_lo{-0.5, -3.0, -3.0, -5.0};
  State bounds_hi{0.5, 3.0, 3.0, 5.0};
  double mu = 10.0;
  double nu = 5e-3;
  std::uint64_t rng_seed = 1;
  bool ridge_fallback = false;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Rolling batch of (state, input, target) triples for one regression.
class SampleWindow {
 public:
  explicit SampleWindow(std::size_t capacity) : capacity_(capacity) {}

  void push(const State& x, double u, double target);
  void clear();

  std::size_t size() const noexcept { return inputs_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool full() const noexcept { return size() == capacity_; }

  const std::vector<State>& states() const noexcept { return states_; }
  const Vector& inputs() const noexcept { return inputs_; }
  const Vector& targets() const noexcept { return targets_; }

 private:
  std::size_t capacity_;
  std::vector<State> states_;
  Vector inputs_;
  Vector targets_;
};

// mu * blockdiag(Q, R)
QParams init_m(const CostWeights& w, double mu);

// [theta, 0, 0, 0] with theta uniform on [-nu/2, nu/2].
State init_x(double nu, Rng& rng);

// K = -M22^-1 M21. Throws SingularM22 when |M22| <= 1e-12 * |M|_max.
Gain extract_gain(const QParams& q);

// K x + eps, eps ~ N(0, noise_std^2)
double greedy_with_noise(const Gain& k, const State& x, double noise_std, Rng& rng);

// x'Qx + u'Ru + [x+; K x+]' M [x+; K x+]
double q_target(const State& x, double u, const State& x_next, const Gain& k, const QParams& q,
                const CostWeights& w);

// Least-squares fit of M to the window's (z, target) pairs in the half-vectorized
// basis. Propagates SingularNormalEquations.
QParams regress_update(const SampleWindow& window, bool ridge_fallback = false);

enum class LearnerEvent { WindowSolved, SolveFailed, EpisodeReset, DivergenceReset };

const char* to_string(LearnerEvent e);

struct StepOutcome {
  State x{};       // state the action was taken in
  double u = 0.0;  // applied force
  double reward = 0.0;
  State x_next{};  // plant response, before any reset
  std::vector<LearnerEvent> events;
};

// Plant transition used by the learner; the learner never sees a model.
using Dynamics = std::function<State(const State&, double)>;

// The batch Q-learning loop as a single-threaded state machine. Each step()
// acts, records a target, refits M when the window fills, and then applies
// the episode and divergence resets.
class Learner {
 public:
  Learner(CostWeights weights, LearnerConfig config);

  // Replace M (and the gain derived from it), e.g. with a previously learned Q-function.
  void warm_start(const QParams& q);
  // Act with k until the next successful window solve; M is left untouched.
  void set_gain(const Gain& k);
  // With learning disabled the gain is frozen and no samples are collected.
  void set_learning_enabled(bool enabled) { learning_enabled_ = enabled; }

  StepOutcome step(const Dynamics& plant);

  const State& state() const noexcept { return x_; }
  const QParams& q() const noexcept { return q_; }
  const Gain& gain() const noexcept { return k_; }
  const SampleWindow& window() const noexcept { return window_; }
  const LearnerConfig& config() const noexcept { return config_; }
  const CostWeights& weights() const noexcept { return weights_; }
  std::uint64_t time_index() const noexcept { return t_; }
  std::uint64_t window_start() const noexcept { return s_; }
  std::size_t windows_solved() const noexcept { return windows_solved_; }

 private:
  bool in_bounds(const State& x) const;
  void reset_divergence();

  CostWeights weights_;
  LearnerConfig config_;
  Rng rng_;
  QParams q_;
  Gain k_;
  State x_{};
  SampleWindow window_;
  std::uint64_t t_ = 0;
  std::uint64_t s_ = 0;
  std::size_t windows_solved_ = 0;
  bool learning_enabled_ = true;
};

}  // namespace lqrq
