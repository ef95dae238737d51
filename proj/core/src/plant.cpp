#include "lqrq/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lqrq {

void PlantParams::validate() const {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("plant.") + name + " must be finite and > 0");
    }
  };
  require_positive(m, "m");
  require_positive(M_cart, "M_cart");
  require_positive(l, "l");
  require_positive(g, "g");
}

bool is_finite(const State& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

State derivatives(const State& x, double u, const PlantParams& p) {
  if (!is_finite(x) || !std::isfinite(u)) {
    throw NonFiniteState("derivatives: non-finite state or input");
  }
  const double s = std::sin(x[kTheta]);
  const double c = std::cos(x[kTheta]);
  const double w2 = x[kThetaDot] * x[kThetaDot];
  const double total = p.M_cart + p.m;

  // Both denominators are bounded away from zero: the first is <= -M l,
  // the second >= M.
  const double theta_den = p.m * p.l * c * c - total * p.l;
  const double y_den = total - p.m * c * c;

  const double theta_acc = (u * c - total * p.g * s + p.m * p.l * w2 * c * s) / theta_den;
  const double y_acc = (u + p.m * p.l * w2 * s - p.m * p.g * s * c) / y_den;
  return {x[kThetaDot], theta_acc, x[kCartVel], y_acc};
}

State euler_step(const State& x, double u, const PlantParams& p, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be > 0");
  const State d = derivatives(x, u, p);
  State next;
  for (std::size_t i = 0; i < kStateDim; ++i) next[i] = x[i] + dt * d[i];
  return next;
}

LinearModel linearize_continuous(const PlantParams& p) {
  p.validate();
  Matrix a(kStateDim, kStateDim);
  Matrix b(kStateDim, kInputDim);
  a(kTheta, kThetaDot) = 1.0;
  a(kCartPos, kCartVel) = 1.0;
  a(kThetaDot, kTheta) = (p.M_cart + p.m) * p.g / (p.M_cart * p.l);
  a(kCartVel, kTheta) = -p.m * p.g / p.M_cart;
  b(kThetaDot, 0) = -1.0 / (p.M_cart * p.l);
  b(kCartVel, 0) = 1.0 / p.M_cart;
  return {std::move(a), std::move(b), 0.0};
}

LinearModel linearize(const PlantParams& p, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("linearize: dt must be > 0");
  LinearModel cont = linearize_continuous(p);
  return {Matrix::identity(kStateDim) + dt * cont.a, dt * cont.b, dt};
}

State linear_step(const LinearModel& model, const State& x, double u) {
  State next{};
  for (std::size_t i = 0; i < kStateDim; ++i) {
    double v = model.b(i, 0) * u;
    for (std::size_t j = 0; j < kStateDim; ++j) v += model.a(i, j) * x[j];
    next[i] = v;
  }
  return next;
}

PlantParams apply_fault(const PlantParams& p, double scale_m, double scale_l) {
  if (!(scale_m > 0.0) || !(scale_l > 0.0)) {
    throw std::invalid_argument("apply_fault: scale factors must be > 0");
  }
  PlantParams out = p;
  out.m *= scale_m;
  out.l *= scale_l;
  return out;
}

}  // namespace lqrq
