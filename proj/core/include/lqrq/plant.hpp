#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>

#include "lqrq/linalg.hpp"

namespace lqrq {

inline constexpr std::size_t kStateDim = 4;
inline constexpr std::size_t kInputDim = 1;

// x = [theta, theta_dot, y, y_dot]: pendulum angle (rad, 0 = upright) and rate,
// cart position (m) and velocity.
using State = std::array<double, kStateDim>;

enum StateIndex : std::size_t { kTheta = 0, kThetaDot = 1, kCartPos = 2, kCartVel = 3 };

class NonFiniteState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Point-mass pendulum on a cart, no friction.
struct PlantParams {
  double m = 0.2;       // pendulum mass, kg
  double M_cart = 0.5;  // cart mass, kg
  double l = 0.3;       // rod length, m
  double g = 9.8;       // m/s^2

  // Throws std::invalid_argument naming the first non-positive field.
  void validate() const;

  friend bool operator==(const PlantParams&, const PlantParams&) = default;
};

// Discrete-time x+ = A x + B u.
struct LinearModel {
  Matrix a;
  Matrix b;
  double dt = 0.0;
};

// Right-hand side of the continuous cart-pole equations; u is the cart force in N.
State derivatives(const State& x, double u, const PlantParams& p);

// x + dt * derivatives(x, u, p)
State euler_step(const State& x, double u, const PlantParams& p, double dt);

// Analytic Jacobian at the upright equilibrium, discretized the same way as
// euler_step: A = I + dt A_c, B = dt B_c.
LinearModel linearize(const PlantParams& p, double dt);

// Continuous-time Jacobians (A_c, B_c) at the upright equilibrium.
LinearModel linearize_continuous(const PlantParams& p);

// Next state of the linear model for a single force input.
State linear_step(const LinearModel& model, const State& x, double u);

// Pendulum damage: scales m and l, keeps M_cart and g.
PlantParams apply_fault(const PlantParams& p, double scale_m, double scale_l);

bool is_finite(const State& x);

}  // namespace lqrq
