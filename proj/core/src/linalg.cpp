#include "lqrq/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace lqrq {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: entry count does not match shape");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, Vector(v.begin(), v.end()));
}

Matrix Matrix::row(std::span<const double> v) {
  return Matrix(1, v.size(), Vector(v.begin(), v.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t row0, std::size_t col0, std::size_t nrows,
                     std::size_t ncols) const {
  if (row0 + nrows > rows_ || col0 + ncols > cols_) {
    throw std::out_of_range("Matrix::block out of range");
  }
  Matrix b(nrows, ncols);
  for (std::size_t i = 0; i < nrows; ++i)
    for (std::size_t j = 0; j < ncols; ++j) b(i, j) = (*this)(row0 + i, col0 + j);
  return b;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::frobenius_norm() const { return norm2(data_); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("Matrix: shape mismatch in +=");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("Matrix: shape mismatch in -=");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Matrix: shape mismatch in product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("Matrix: shape mismatch in mat-vec");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------

SymMatrix::SymMatrix(const Matrix& m) : m_(m) {
  if (!m.is_square()) throw std::invalid_argument("SymMatrix: matrix is not square");
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m_(i, j) = avg;
      m_(j, i) = avg;
    }
}

SymMatrix SymMatrix::zeros(std::size_t dim) { return SymMatrix(Matrix(dim, dim)); }
SymMatrix SymMatrix::identity(std::size_t dim) { return SymMatrix(Matrix::identity(dim)); }

double SymMatrix::quadratic_form(std::span<const double> z) const {
  if (z.size() != dim()) throw std::invalid_argument("SymMatrix: quadratic form size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) row += m_(i, j) * z[j];
    acc += z[i] * row;
  }
  return acc;
}

SymMatrix block_diagonal(const SymMatrix& a, const SymMatrix& b) {
  const std::size_t n = a.dim() + b.dim();
  Matrix m(n, n);
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) m(a.dim() + i, a.dim() + j) = b(i, j);
  return SymMatrix(m);
}

Vector kron(std::span<const double> a, std::span<const double> b) {
  Vector out;
  out.reserve(a.size() * b.size());
  for (double ai : a)
    for (double bj : b) out.push_back(ai * bj);
  return out;
}

Vector vec(const SymMatrix& m) { return m.matrix().entries(); }

// ---------------------------------------------------------------------------

SvecBasis::SvecBasis(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("SvecBasis: dim must be >= 1");
}

Vector SvecBasis::encode(const SymMatrix& m) const {
  if (m.dim() != dim_) throw std::invalid_argument("SvecBasis::encode: dimension mismatch");
  Vector p;
  p.reserve(param_count());
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j) p.push_back(m(i, j));
  return p;
}

SymMatrix SvecBasis::decode(std::span<const double> params) const {
  if (params.size() != param_count()) {
    throw std::invalid_argument("SvecBasis::decode: parameter count mismatch");
  }
  Matrix m(dim_, dim_);
  std::size_t k = 0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j, ++k) {
      m(i, j) = params[k];
      m(j, i) = params[k];
    }
  return SymMatrix(m);
}

Vector SvecBasis::regressor(std::span<const double> z) const {
  if (z.size() != dim_) throw std::invalid_argument("SvecBasis::regressor: size mismatch");
  Vector r;
  r.reserve(param_count());
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j) r.push_back((i == j ? 1.0 : 2.0) * z[i] * z[j]);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

double one_norm_upper(const Matrix& r) {
  double best = 0.0;
  for (std::size_t j = 0; j < r.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i <= j; ++i) s += std::abs(r(i, j));
    best = std::max(best, s);
  }
  return best;
}

// Inverse of an upper-triangular matrix; returns false on a zero pivot.
bool invert_upper(const Matrix& r, Matrix& inv) {
  const std::size_t n = r.rows();
  inv = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    if (r(j, j) == 0.0) return false;
    inv(j, j) = 1.0 / r(j, j);
    for (std::size_t ii = j; ii-- > 0;) {
      double s = 0.0;
      for (std::size_t k = ii + 1; k <= j; ++k) s += r(ii, k) * inv(k, j);
      inv(ii, j) = -s / r(ii, ii);
    }
  }
  return inv.all_finite();
}

}  // namespace

LeastSquaresResult least_squares(const Matrix& a, std::span<const double> b, double ridge) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  if (cols == 0 || rows < cols) {
    throw std::invalid_argument("least_squares: need rows >= cols >= 1");
  }
  if (b.size() != rows) throw std::invalid_argument("least_squares: b has wrong length");
  if (!(ridge >= 0.0)) throw std::invalid_argument("least_squares: ridge must be >= 0");

  // Stack [A; sqrt(ridge) I] p = [b; 0] and equilibrate columns to unit norm.
  const std::size_t aug_rows = ridge > 0.0 ? rows + cols : rows;
  Matrix w(aug_rows, cols);
  Vector rhs(aug_rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) w(i, j) = a(i, j);
    rhs[i] = b[i];
  }
  if (ridge > 0.0) {
    const double s = std::sqrt(ridge);
    for (std::size_t j = 0; j < cols; ++j) w(rows + j, j) = s;
  }

  Vector scale(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < aug_rows; ++i) n2 += w(i, j) * w(i, j);
    const double n = std::sqrt(n2);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw SingularNormalEquations("least_squares: regressor column is identically zero", 0.0);
    }
    scale[j] = 1.0 / n;
    for (std::size_t i = 0; i < aug_rows; ++i) w(i, j) *= scale[j];
  }

  // Householder QR, applied to rhs on the fly.
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < aug_rows; ++i) norm += w(i, k) * w(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = w(k, k) > 0.0 ? -norm : norm;
    Vector v(aug_rows - k);
    for (std::size_t i = k; i < aug_rows; ++i) v[i - k] = w(i, k);
    v[0] -= alpha;
    const double vnorm2 = dot(v, v);
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = k; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < aug_rows; ++i) s += v[i - k] * w(i, j);
      s = 2.0 * s / vnorm2;
      for (std::size_t i = k; i < aug_rows; ++i) w(i, j) -= s * v[i - k];
    }
    double s = 0.0;
    for (std::size_t i = k; i < aug_rows; ++i) s += v[i - k] * rhs[i];
    s = 2.0 * s / vnorm2;
    for (std::size_t i = k; i < aug_rows; ++i) rhs[i] -= s * v[i - k];
  }

  Matrix r = w.block(0, 0, cols, cols);
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = 0; j < i; ++j) r(i, j) = 0.0;

  Matrix r_inv;
  double rcond = 0.0;
  if (invert_upper(r, r_inv)) rcond = 1.0 / (one_norm_upper(r) * one_norm_upper(r_inv));
  if (!(rcond >= kMinRcond)) {
    throw SingularNormalEquations("least_squares: normal equations are numerically singular",
                                  rcond);
  }

  Vector y(cols, 0.0);
  for (std::size_t ii = cols; ii-- > 0;) {
    double s = rhs[ii];
    for (std::size_t k = ii + 1; k < cols; ++k) s -= r(ii, k) * y[k];
    y[ii] = s / r(ii, ii);
  }

  LeastSquaresResult out;
  out.solution.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) out.solution[j] = y[j] * scale[j];
  Vector fit = a * std::span<const double>(out.solution);
  double res2 = 0.0;
  for (std::size_t i = 0; i < rows; ++i) res2 += (fit[i] - b[i]) * (fit[i] - b[i]);
  out.residual = std::sqrt(res2);
  out.rcond = rcond;
  return out;
}

LeastSquaresResult least_squares_ridge_fallback(const Matrix& a, std::span<const double> b) {
  try {
    return least_squares(a, b, 0.0);
  } catch (const SingularNormalEquations&) {
    double trace = 0.0;
    for (double v : a.entries()) trace += v * v;
    const double ridge = 1e-9 * trace / static_cast<double>(a.cols());
    if (!(ridge > 0.0)) throw;
    return least_squares(a, b, ridge);
  }
}

Matrix invert_small(const Matrix& m) {
  if (!m.is_square()) throw std::invalid_argument("invert_small: matrix is not square");
  const std::size_t n = m.rows();
  if (n == 0 || n > 8) throw std::invalid_argument("invert_small: dim must be in [1, 8]");

  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_max = std::max(row_max, std::abs(m(i, j)));
    if (row_max == 0.0) throw SingularMatrix("invert_small: zero row");
    scale *= row_max;
  }

  Matrix work = m;
  Matrix inv = Matrix::identity(n);
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(work(i, col)) > std::abs(work(pivot, col))) pivot = i;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(work(col, j), work(pivot, j));
        std::swap(inv(col, j), inv(pivot, j));
      }
      det = -det;
    }
    const double p = work(col, col);
    det *= p;
    if (p == 0.0) break;
    for (std::size_t j = 0; j < n; ++j) {
      work(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = work(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        work(i, j) -= f * work(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  if (!(std::abs(det) >= 1e-14 * scale) || !inv.all_finite()) {
    throw SingularMatrix("invert_small: matrix is numerically singular");
  }
  return inv;
}

}  // namespace lqrq
