#pragma once

// Plant model x' = A x + phi(x, u), y = C x, plus its operating region.

#include <optional>
#include <string>
#include <vector>

#include "oslobs/matrixcore.hpp"

namespace oslobs {

/// One monomial contribution to output `out`:
/// coef * prod_j x_j^exps[j] * (input ? u[*input] : 1).
struct PolynomialTerm {
  int out = 0;
  double coef = 0.0;
  std::vector<int> exps;
  std::optional<int> input;

  bool operator==(const PolynomialTerm&) const = default;
};

struct Nonlinearity {
  enum class Kind { Builtin, Polynomial };

  Kind kind = Kind::Polynomial;
  std::string name;                  // Builtin only
  std::vector<PolynomialTerm> terms;  // Polynomial only

  static Nonlinearity polynomial(std::vector<PolynomialTerm> terms) {
    return {Kind::Polynomial, {}, std::move(terms)};
  }
  static Nonlinearity builtin(std::string name) { return {Kind::Builtin, std::move(name), {}}; }

  bool operator==(const Nonlinearity&) const = default;
};

/// A ball is centered at the origin.
struct Region {
  enum class Shape { Ball, Box };

  Shape shape = Shape::Ball;
  int dim = 1;
  double radius = 1.0;
  Vector lower;
  Vector upper;

  static Region ball(int dim, double r);
  static Region box(Vector lower, Vector upper);

  bool contains(const Vector& x, double tol = 1e-12) const;
  /// True when every point of `other` lies in this region.
  bool encloses(const Region& other, double tol = 1e-12) const;
  /// Characteristic length: ball radius, or half the shortest box side.
  double scale() const;

  bool operator==(const Region& o) const;
};

struct DynamicalSystem {
  Matrix A;
  Matrix C;
  Nonlinearity phi;
  Region region;
  int input_dim = 0;

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(C.rows()); }

  /// Throws DimensionMismatch / NonFinite / PreconditionViolated on a bad model.
  void validate() const;

  bool operator==(const DynamicalSystem& o) const;
};

Vector eval_phi(const DynamicalSystem& sys, const Vector& x, const Vector& u);
inline Vector eval_phi(const DynamicalSystem& sys, const Vector& x) {
  return eval_phi(sys, x, Vector::Zero(sys.input_dim));
}

/// Analytic d phi / dx. Builtins without an analytic form fall back to central
/// differences. Throws NotDifferentiableAtPoint where phi has no derivative.
Matrix jacobian(const DynamicalSystem& sys, const Vector& x, const Vector& u);
inline Matrix jacobian(const DynamicalSystem& sys, const Vector& x) {
  return jacobian(sys, x, Vector::Zero(sys.input_dim));
}

/// Central differences with step 1e-6 * max(1, |x|).
Matrix finite_difference_jacobian(const DynamicalSystem& sys, const Vector& x, const Vector& u);

/// Registry of the worked examples:
///   example1: x' = -x^3 on |x| <= r (default r = 2)
///   example2: x' = -sgn(x) sqrt|x| on [-m, m] (default m = 1)
///   example3: planar limit-cycle system, y = x2, on |x| <= r (default r = 5.9372)
DynamicalSystem builtin(const std::string& name, std::optional<double> region_size = std::nullopt);
std::vector<std::string> builtin_names();

DynamicalSystem parse_system(const std::string& json_text);
std::string serialize_system(const DynamicalSystem& sys);

}  // namespace oslobs
