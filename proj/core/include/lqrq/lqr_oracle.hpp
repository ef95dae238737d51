#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>

#include "lqrq/linalg.hpp"
#include "lqrq/plant.hpp"

namespace lqrq {

// Stage cost x'Qx + u'Ru.
struct CostWeights {
  SymMatrix q;  // n x n, PSD
  SymMatrix r;  // m x m, PD

  // Q = diag(q_diag), R = [r]
  static CostWeights diagonal(std::span<const double> q_diag, double r);

  // Throws std::invalid_argument if q is not PSD (eigenvalues >= -1e-12) or r not PD.
  void validate() const;
};

// Row-vector state feedback in the u = K x convention.
struct Gain {
  Vector k;

  double apply(std::span<const double> x) const { return dot(k, x); }
  friend bool operator==(const Gain&, const Gain&) = default;
};

struct RiccatiSolution {
  SymMatrix p;       // cost-to-go x'Px
  Gain k;            // -(R + B'PB)^-1 B'PA
  SymMatrix m_star;  // Q-function matrix over z = [x; u]
  std::size_t iterations = 0;
  double residual = 0.0;  // max-abs DARE residual at p, relative to max(1, |P|max)
};

class NoConvergence : public std::runtime_error {
 public:
  explicit NoConvergence(std::size_t iterations);
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

struct DareOptions {
  double tol = 1e-12;
  std::size_t max_iter = 1'000'000;
  // Called with every Riccati iterate, starting from P0 = Q.
  std::function<void(const SymMatrix&)> on_iterate;
};

// One Riccati value-iteration step:
// Q + A'PA - A'PB (R + B'PB)^-1 B'PA.
SymMatrix riccati_step(const LinearModel& model, const CostWeights& w, const SymMatrix& p);

// Fixed-point iteration of riccati_step from P0 = Q until
// max|P_{k+1} - P_k| <= tol * max(1, max|P_k|).
RiccatiSolution solve_dare(const LinearModel& model, const CostWeights& w,
                           const DareOptions& options = {});

// max|riccati_step(P) - P| / max(1, max|P|)
double dare_residual(const LinearModel& model, const CostWeights& w, const SymMatrix& p);

// [[Q + A'PA, A'PB], [B'PA, R + B'PB]]
SymMatrix qmatrix_from_p(const LinearModel& model, const CostWeights& w, const SymMatrix& p);

// -(R + B'PB)^-1 B'PA
Gain gain_from_p(const LinearModel& model, const CostWeights& w, const SymMatrix& p);

// Largest |eigenvalue| of A + B K.
double closed_loop_spectral_radius(const LinearModel& model, const Gain& k);

// Symmetric eigenvalues, ascending.
Vector symmetric_eigenvalues(const SymMatrix& m);

}  // namespace lqrq
