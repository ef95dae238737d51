#include "lqrq/lqr_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace lqrq {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return e;
}

void check_shapes(const LinearModel& model, const CostWeights& w) {
  const std::size_t n = model.a.rows();
  if (!model.a.is_square() || model.b.rows() != n || w.q.dim() != n ||
      w.r.dim() != model.b.cols()) {
    throw std::invalid_argument("LQR: model and weight dimensions disagree");
  }
}

}  // namespace

CostWeights CostWeights::diagonal(std::span<const double> q_diag, double r) {
  const double r_arr[] = {r};
  return {SymMatrix(Matrix::diagonal(q_diag)), SymMatrix(Matrix::diagonal(r_arr))};
}

void CostWeights::validate() const {
  if (q.dim() == 0 || r.dim() == 0) throw std::invalid_argument("weights: empty Q or R");
  if (!q.matrix().all_finite() || !r.matrix().all_finite()) {
    throw std::invalid_argument("weights: non-finite entries");
  }
  const Vector qe = symmetric_eigenvalues(q);
  if (qe.front() < -1e-12) throw std::invalid_argument("weights.q must be positive semidefinite");
  const Vector re = symmetric_eigenvalues(r);
  if (!(re.front() > 0.0)) throw std::invalid_argument("weights.r must be positive definite");
}

NoConvergence::NoConvergence(std::size_t iterations)
    : std::runtime_error("solve_dare: no convergence after " + std::to_string(iterations) +
                         " iterations"),
      iterations_(iterations) {}

namespace {

// Shared pieces of one Riccati step: S = R + B'PB, B'PA, A'PA.
struct RiccatiTerms {
  Matrix s;
  Matrix bpa;
  Matrix apa;
};

RiccatiTerms riccati_terms(const LinearModel& model, const CostWeights& w, const SymMatrix& p) {
  const Matrix at = model.a.transpose();
  const Matrix bt = model.b.transpose();
  const Matrix pa = p.matrix() * model.a;
  return {w.r.matrix() + bt * p.matrix() * model.b, bt * pa, at * pa};
}

}  // namespace

SymMatrix riccati_step(const LinearModel& model, const CostWeights& w, const SymMatrix& p) {
  check_shapes(model, w);
  const RiccatiTerms t = riccati_terms(model, w, p);
  const Matrix correction = t.bpa.transpose() * invert_small(t.s) * t.bpa;
  return SymMatrix(w.q.matrix() + t.apa - correction);
}

Gain gain_from_p(const LinearModel& model, const CostWeights& w, const SymMatrix& p) {
  check_shapes(model, w);
  const RiccatiTerms t = riccati_terms(model, w, p);
  const Matrix k = -1.0 * (invert_small(t.s) * t.bpa);
  if (k.rows() != 1) throw std::invalid_argument("gain_from_p: single-input models only");
  return Gain{k.entries()};
}

double dare_residual(const LinearModel& model, const CostWeights& w, const SymMatrix& p) {
  const SymMatrix next = riccati_step(model, w, p);
  return (next.matrix() - p.matrix()).max_abs() / std::max(1.0, p.matrix().max_abs());
}

RiccatiSolution solve_dare(const LinearModel& model, const CostWeights& w,
                           const DareOptions& options) {
  check_shapes(model, w);
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_dare: tol must be > 0");

  SymMatrix p = w.q;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    if (options.on_iterate) options.on_iterate(p);
    SymMatrix next = riccati_step(model, w, p);
    if (!next.matrix().all_finite()) throw NoConvergence(it);
    const double step = (next.matrix() - p.matrix()).max_abs() /
                        std::max(1.0, p.matrix().max_abs());
    p = std::move(next);
    if (step <= options.tol) {
      RiccatiSolution sol;
      sol.k = gain_from_p(model, w, p);
      sol.m_star = qmatrix_from_p(model, w, p);
      sol.iterations = it;
      sol.residual = dare_residual(model, w, p);
      sol.p = std::move(p);
      return sol;
    }
  }
  throw NoConvergence(options.max_iter);
}

SymMatrix qmatrix_from_p(const LinearModel& model, const CostWeights& w, const SymMatrix& p) {
  check_shapes(model, w);
  const std::size_t n = model.a.rows();
  const std::size_t m = model.b.cols();
  const RiccatiTerms t = riccati_terms(model, w, p);
  const Matrix top_left = w.q.matrix() + t.apa;
  Matrix out(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = top_left(i, j);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out(n + i, j) = t.bpa(i, j);
      out(j, n + i) = t.bpa(i, j);
    }
    for (std::size_t j = 0; j < m; ++j) out(n + i, n + j) = t.s(i, j);
  }
  return SymMatrix(out);
}

double closed_loop_spectral_radius(const LinearModel& model, const Gain& k) {
  const std::size_t n = model.a.rows();
  if (model.b.cols() != 1 || k.k.size() != n) {
    throw std::invalid_argument("closed_loop_spectral_radius: dimension mismatch");
  }
  const Matrix closed = model.a + model.b * Matrix::row(k.k);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(to_eigen(closed), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("closed_loop_spectral_radius: eigenvalue iteration failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Vector symmetric_eigenvalues(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m.matrix()),
                                                        Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return Vector(ev.data(), ev.data() + ev.size());
}

}  // namespace lqrq
