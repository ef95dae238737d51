#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lqrq {

using Vector = std::vector<double>;

class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by least_squares when the regressors do not span the parameter space.
// In the learner this means the exploration did not excite every monomial.
class SingularNormalEquations : public std::runtime_error {
 public:
  SingularNormalEquations(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

// Dense row-major matrix. Sizes in this project never exceed 25x25.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, Vector entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix column(std::span<const double> v);
  static Matrix row(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const Vector& entries() const noexcept { return data_; }

  Matrix transpose() const;
  Matrix block(std::size_t row0, std::size_t col0, std::size_t nrows, std::size_t ncols) const;

  double max_abs() const;
  double frobenius_norm() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Square matrix with exact symmetry. Construction replaces m by (m + m')/2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);
  static SymMatrix zeros(std::size_t dim);
  static SymMatrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

  // z' M z
  double quadratic_form(std::span<const double> z) const;
  double frobenius_norm() const { return m_.frobenius_norm(); }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

// Block diagonal [[a, 0], [0, b]].
SymMatrix block_diagonal(const SymMatrix& a, const SymMatrix& b);

// Kronecker product of two row vectors: out[i*|b| + j] = a[i] * b[j].
Vector kron(std::span<const double> a, std::span<const double> b);

// Rows of m stacked horizontally, so that vec(M) . (z kron z) == z'Mz.
Vector vec(const SymMatrix& m);

// Half-vectorization of symmetric matrices: the upper triangle, row by row.
// regressor(z) carries a factor 2 on off-diagonal monomials, which makes
// regressor(z) . encode(M) == z'Mz with dim(dim+1)/2 unknowns instead of dim^2.
class SvecBasis {
 public:
  explicit SvecBasis(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t param_count() const noexcept { return dim_ * (dim_ + 1) / 2; }

  Vector encode(const SymMatrix& m) const;
  SymMatrix decode(std::span<const double> params) const;
  Vector regressor(std::span<const double> z) const;

 private:
  std::size_t dim_;
};

struct LeastSquaresResult {
  Vector solution;
  double residual = 0.0;  // ||A p - b||_2
  double rcond = 0.0;     // 1-norm reciprocal condition of the column-equilibrated regressor
};

inline constexpr double kMinRcond = 1e-14;

// argmin ||A p - b||^2 + ridge ||p||^2 by Householder QR of the
// column-equilibrated [A; sqrt(ridge) I]. A'A is never formed. Throws
// SingularNormalEquations when the reciprocal condition of the triangular
// factor drops below kMinRcond.
LeastSquaresResult least_squares(const Matrix& a, std::span<const double> b, double ridge = 0.0);

// least_squares with ridge 0; on SingularNormalEquations retries once with
// ridge = 1e-9 * trace(A'A) / cols.
LeastSquaresResult least_squares_ridge_fallback(const Matrix& a, std::span<const double> b);

// Gauss-Jordan inverse with partial pivoting, for dim <= 8.
// Throws SingularMatrix when |det| < 1e-14 times the product of row scales.
Matrix invert_small(const Matrix& m);

}  // namespace lqrq
