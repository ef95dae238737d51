#include "lqrq/qlearning.hpp"

#include <cmath>
#include <string>

namespace lqrq {

namespace {

std::array<double, kQDim> stack(const State& x, double u) {
  std::array<double, kQDim> z{};
  for (std::size_t i = 0; i < kStateDim; ++i) z[i] = x[i];
  z[kStateDim] = u;
  return z;
}

}  // namespace

double QParams::evaluate(const State& x, double u) const {
  const auto z = stack(x, u);
  return m.quadratic_form(z);
}

void LearnerConfig::validate() const {
  if (n_s < kQParamCount) {
    throw std::invalid_argument("learner.n_s must be >= " + std::to_string(kQParamCount));
  }
  if (!(noise_std > 0.0)) throw std::invalid_argument("learner.noise_std must be > 0");
  if (!(h_threshold > 0.0)) throw std::invalid_argument("learner.h_threshold must be > 0");
  if (!(mu > 0.0)) throw std::invalid_argument("learner.mu must be > 0");
  if (!(nu > 0.0)) throw std::invalid_argument("learner.nu must be > 0");
  for (std::size_t i = 0; i < kStateDim; ++i) {
    if (!(bounds_lo[i] < 0.0) || !(bounds_hi[i] > 0.0)) {
      throw std::invalid_argument("learner.bounds must satisfy lo < 0 < hi componentwise");
    }
  }
}

void SampleWindow::push(const State& x, double u, double target) {
  if (full()) throw std::logic_error("SampleWindow::push on a full window");
  states_.push_back(x);
  inputs_.push_back(u);
  targets_.push_back(target);
}

void SampleWindow::clear() {
  states_.clear();
  inputs_.clear();
  targets_.clear();
}

QParams init_m(const CostWeights& w, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("init_m: mu must be > 0");
  return {SymMatrix(mu * block_diagonal(w.q, w.r).matrix())};
}

State init_x(double nu, Rng& rng) {
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  return {uniform(rng) * nu, 0.0, 0.0, 0.0};
}

Gain extract_gain(const QParams& q) {
  const std::size_t n = q.m.dim() - 1;
  const double m22 = q.m(n, n);
  if (!(std::abs(m22) > 1e-12 * q.m.matrix().max_abs())) {
    throw SingularM22("extract_gain: M22 is numerically zero");
  }
  Gain k;
  k.k.resize(n);
  for (std::size_t j = 0; j < n; ++j) k.k[j] = -q.m(n, j) / m22;
  return k;
}

double greedy_with_noise(const Gain& k, const State& x, double noise_std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return k.apply(x) + noise_std * normal(rng);
}

double q_target(const State& x, double u, const State& x_next, const Gain& k, const QParams& q,
                const CostWeights& w) {
  const double u_arr[] = {u};
  const double reward = w.q.quadratic_form(x) + w.r.quadratic_form(u_arr);
  return reward + q.evaluate(x_next, k.apply(x_next));
}

QParams regress_update(const SampleWindow& window, bool ridge_fallback) {
  static const SvecBasis basis(kQDim);
  Matrix a(window.size(), basis.param_count());
  for (std::size_t row = 0; row < window.size(); ++row) {
    const auto z = stack(window.states()[row], window.inputs()[row]);
    const Vector reg = basis.regressor(z);
    for (std::size_t j = 0; j < reg.size(); ++j) a(row, j) = reg[j];
  }
  const LeastSquaresResult fit = ridge_fallback
                                     ? least_squares_ridge_fallback(a, window.targets())
                                     : least_squares(a, window.targets());
  return {basis.decode(fit.solution)};
}

const char* to_string(LearnerEvent e) {
  switch (e) {
    case LearnerEvent::WindowSolved: return "WindowSolved";
    case LearnerEvent::SolveFailed: return "SolveFailed";
    case LearnerEvent::EpisodeReset: return "EpisodeReset";
    case LearnerEvent::DivergenceReset: return "DivergenceReset";
  }
  return "?";
}

// ---------------------------------------------------------------------------

Learner::Learner(CostWeights weights, LearnerConfig config)
    : weights_(std::move(weights)),
      config_(config),
      rng_(config.rng_seed),
      q_(init_m(weights_, config.mu)),
      window_(config.n_s) {
  config_.validate();
  if (weights_.q.dim() != kStateDim || weights_.r.dim() != kInputDim) {
    throw std::invalid_argument("Learner: weights must be 4x4 and 1x1");
  }
  k_ = extract_gain(q_);
  x_ = init_x(config_.nu, rng_);
}

void Learner::warm_start(const QParams& q) {
  if (q.m.dim() != kQDim) throw std::invalid_argument("warm_start: M must be 5x5");
  k_ = extract_gain(q);
  q_ = q;
}

void Learner::set_gain(const Gain& k) {
  if (k.k.size() != kStateDim) throw std::invalid_argument("set_gain: gain must have 4 entries");
  k_ = k;
}

bool Learner::in_bounds(const State& x) const {
  for (std::size_t i = 0; i < kStateDim; ++i) {
    if (!(x[i] >= config_.bounds_lo[i] && x[i] <= config_.bounds_hi[i])) return false;
  }
  return true;
}

void Learner::reset_divergence() {
  q_ = init_m(weights_, config_.mu);
  k_ = extract_gain(q_);
  x_ = init_x(config_.nu, rng_);
  window_.clear();
  s_ = t_ + 1;
}

StepOutcome Learner::step(const Dynamics& plant) {
  StepOutcome out;
  out.x = x_;
  out.u = greedy_with_noise(k_, x_, config_.noise_std, rng_);
  const double u_arr[] = {out.u};
  out.reward = weights_.q.quadratic_form(x_) + weights_.r.quadratic_form(u_arr);
  out.x_next = plant(x_, out.u);

  bool diverged = false;
  if (learning_enabled_) {
    window_.push(x_, out.u, q_target(x_, out.u, out.x_next, k_, q_, weights_));

    if (window_.full()) {
      try {
        QParams fitted = regress_update(window_, config_.ridge_fallback);
        q_ = std::move(fitted);
        ++windows_solved_;
        out.events.push_back(LearnerEvent::WindowSolved);
        try {
          k_ = extract_gain(q_);
        } catch (const SingularM22&) {
          diverged = true;
        }
      } catch (const SingularNormalEquations&) {
        out.events.push_back(LearnerEvent::SolveFailed);
      }
      window_.clear();
      s_ = t_ + 1;
    }
  }

  x_ = out.x_next;
  if (!in_bounds(x_)) {
    x_ = init_x(config_.nu, rng_);
    out.events.push_back(LearnerEvent::EpisodeReset);
  }
  if (diverged || !q_.m.matrix().all_finite() || q_.m.frobenius_norm() > config_.h_threshold) {
    reset_divergence();
    out.events.push_back(LearnerEvent::DivergenceReset);
  }
  ++t_;
  return out;
}

}  // namespace lqrq
