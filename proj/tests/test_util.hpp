#pragma once

// Random instance generators shared by the unit and acceptance suites.

#include <cstdint>
#include <random>

#include "oslobs/systems.hpp"

namespace oslobs::testing {

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, int n, double scale = 1.0) {
  const Matrix m = random_matrix(rng, n, n, scale);
  return (m + m.transpose()) / 2.0;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random polynomial system with n in [1, max_n], up to 6 terms of total
/// degree <= 3. `homogeneous_degree` > 0 forces every term to that degree.
inline DynamicalSystem random_polynomial_system(std::mt19937_64& rng, int max_n = 3, double radius = 1.0,
                                                int homogeneous_degree = 0) {
  const int n = uniform_int(rng, 1, max_n);
  DynamicalSystem sys;
  sys.A = random_matrix(rng, n, n);
  sys.C = random_matrix(rng, 1, n);
  std::vector<PolynomialTerm> terms;
  const int count = uniform_int(rng, 1, 6);
  for (int k = 0; k < count; ++k) {
    PolynomialTerm t;
    t.out = uniform_int(rng, 0, n - 1);
    t.coef = uniform(rng, -2.0, 2.0);
    t.exps.assign(n, 0);
    const int degree = homogeneous_degree > 0 ? homogeneous_degree : uniform_int(rng, 1, 3);
    for (int d = 0; d < degree; ++d) ++t.exps[uniform_int(rng, 0, n - 1)];
    terms.push_back(std::move(t));
  }
  sys.phi = Nonlinearity::polynomial(std::move(terms));
  sys.region = Region::ball(n, radius);
  sys.validate();
  return sys;
}

inline Vector random_point_in_ball(std::mt19937_64& rng, int n, double r) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = normal(rng);
  d.normalize();
  return d * r * std::pow(uniform(rng, 0.0, 1.0), 1.0 / n);
}

}  // namespace oslobs::testing
