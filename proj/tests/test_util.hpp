#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "lqrq/linalg.hpp"
#include "lqrq/plant.hpp"

namespace lqrq::testing {

inline Vector random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

inline SymMatrix random_symmetric(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  return SymMatrix(Matrix(n, n, random_vector(n * n, rng, scale)));
}

// Random M = G G' + shift I, positive definite for shift > 0.
inline SymMatrix random_pd(std::size_t n, std::mt19937_64& rng, double shift = 0.5) {
  const Matrix g(n, n, random_vector(n * n, rng));
  return SymMatrix(g * g.transpose() + shift * Matrix::identity(n));
}

// Plain triple-loop quadratic form, independent of SymMatrix::quadratic_form.
inline double direct_quadratic_form(const Matrix& m, std::span<const double> z) {
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < z.size(); ++j) acc += z[i] * m(i, j) * z[j];
  return acc;
}

inline PlantParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mass(0.05, 1.0), cart(0.2, 3.0), len(0.1, 1.5),
      grav(5.0, 15.0);
  return {mass(rng), cart(rng), len(rng), grav(rng)};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lqrq_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace lqrq::testing
