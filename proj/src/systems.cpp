#include "oslobs/systems.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "json.hpp"

namespace oslobs {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Region

Region Region::ball(int dim, double r) {
  if (dim < 1) throw Error(ErrorCode::PreconditionViolated, "region dimension must be positive");
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::PreconditionViolated, "ball radius must be > 0");
  Region reg;
  reg.shape = Shape::Ball;
  reg.dim = dim;
  reg.radius = r;
  return reg;
}

Region Region::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "box bounds must have equal positive length");
  }
  if (!lower.allFinite() || !upper.allFinite()) throw Error(ErrorCode::NonFinite, "box bounds");
  if (!(lower.array() < upper.array()).all()) {
    throw Error(ErrorCode::PreconditionViolated, "box requires lower < upper componentwise");
  }
  Region reg;
  reg.shape = Shape::Box;
  reg.dim = static_cast<int>(lower.size());
  reg.lower = std::move(lower);
  reg.upper = std::move(upper);
  return reg;
}

bool Region::contains(const Vector& x, double tol) const {
  if (x.size() != dim) return false;
  if (shape == Shape::Ball) return x.norm() <= radius * (1.0 + tol);
  const Vector slack = (upper - lower) * tol;
  return ((x - lower).array() >= -slack.array()).all() && ((upper - x).array() >= -slack.array()).all();
}

bool Region::encloses(const Region& other, double tol) const {
  if (other.dim != dim) return false;
  if (other.shape == Shape::Ball) {
    if (shape == Shape::Ball) return other.radius <= radius * (1.0 + tol);
    const double room = std::min((-lower).minCoeff(), upper.minCoeff());
    return other.radius <= room + tol * std::max(1.0, room);
  }
  // A box is enclosed iff its farthest corner (ball) or both corners (box) are.
  if (shape == Shape::Ball) {
    const Vector far = other.lower.cwiseAbs().cwiseMax(other.upper.cwiseAbs());
    return far.norm() <= radius * (1.0 + tol);
  }
  return contains(other.lower, tol) && contains(other.upper, tol);
}

double Region::scale() const {
  if (shape == Shape::Ball) return radius;
  return 0.5 * (upper - lower).minCoeff();
}

bool Region::operator==(const Region& o) const {
  if (shape != o.shape || dim != o.dim) return false;
  if (shape == Shape::Ball) return radius == o.radius;
  return lower == o.lower && upper == o.upper;
}

// ---------------------------------------------------------------------------
// Builtin nonlinearities

namespace {

struct BuiltinPhi {
  int dim;
  std::function<Vector(const Vector&)> eval;
  std::function<Matrix(const Vector&)> jac;  // empty -> finite differences
};

const std::map<std::string, BuiltinPhi>& builtin_registry() {
  static const std::map<std::string, BuiltinPhi> registry = {
      {"example1",
       {1, [](const Vector& x) { return Vector::Constant(1, -x(0) * x(0) * x(0)); },
        [](const Vector& x) { return Matrix::Constant(1, 1, -3.0 * x(0) * x(0)); }}},
      {"example2",
       {1,
        [](const Vector& x) {
          const double s = (x(0) > 0) - (x(0) < 0);
          return Vector::Constant(1, -s * std::sqrt(std::abs(x(0))));
        },
        [](const Vector& x) {
          // The derivative blows up at the origin; treat a tiny neighbourhood as singular.
          if (std::abs(x(0)) < 1e-8) {
            throw Error(ErrorCode::NotDifferentiableAtPoint, "example2 is not differentiable at x = 0");
          }
          return Matrix::Constant(1, 1, -0.5 / std::sqrt(std::abs(x(0))));
        }}},
      {"example3",
       {2,
        [](const Vector& x) {
          const double r2 = x.squaredNorm();
          return Vector(-x * r2);
        },
        [](const Vector& x) {
          const double a = x(0), b = x(1);
          Matrix j(2, 2);
          j << -3 * a * a - b * b, -2 * a * b, -2 * a * b, -3 * b * b - a * a;
          return j;
        }}},
  };
  return registry;
}

const BuiltinPhi& lookup_builtin(const std::string& name) {
  const auto& reg = builtin_registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw Error(ErrorCode::UnknownBuiltin, name);
  return it->second;
}

double term_value(const PolynomialTerm& t, const Vector& x, const Vector& u) {
  double v = t.coef;
  for (std::size_t j = 0; j < t.exps.size(); ++j) {
    if (t.exps[j] != 0) v *= std::pow(x(static_cast<Eigen::Index>(j)), t.exps[j]);
  }
  if (t.input) v *= u(*t.input);
  return v;
}

void check_point(const DynamicalSystem& sys, const Vector& x, const Vector& u) {
  if (x.size() != sys.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state has length " + std::to_string(x.size()) + ", expected " + std::to_string(sys.n()));
  }
  if (u.size() != sys.input_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "input has length " + std::to_string(u.size()) + ", expected " + std::to_string(sys.input_dim));
  }
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : builtin_registry()) names.push_back(name);
  return names;
}

// ---------------------------------------------------------------------------
// DynamicalSystem

void DynamicalSystem::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "A must be square n x n");
  if (C.cols() != A.rows() || C.rows() < 1) throw Error(ErrorCode::DimensionMismatch, "C must be p x n");
  if (!A.allFinite() || !C.allFinite()) throw Error(ErrorCode::NonFinite, "A or C");
  if (input_dim < 0) throw Error(ErrorCode::DimensionMismatch, "input dimension must be >= 0");
  if (region.dim != n()) throw Error(ErrorCode::DimensionMismatch, "region dimension differs from n");
  if (phi.kind == Nonlinearity::Kind::Builtin) {
    if (lookup_builtin(phi.name).dim != n()) {
      throw Error(ErrorCode::DimensionMismatch, "builtin '" + phi.name + "' has a different state dimension");
    }
    return;
  }
  for (const auto& t : phi.terms) {
    if (t.out < 0 || t.out >= n()) throw Error(ErrorCode::DimensionMismatch, "term output index out of range");
    if (static_cast<int>(t.exps.size()) != n()) {
      throw Error(ErrorCode::DimensionMismatch, "exponent vector length differs from n");
    }
    for (int e : t.exps) {
      if (e < 0) throw Error(ErrorCode::PreconditionViolated, "negative exponent");
    }
    if (!std::isfinite(t.coef)) throw Error(ErrorCode::NonFinite, "term coefficient");
    if (t.input && (*t.input < 0 || *t.input >= input_dim)) {
      throw Error(ErrorCode::DimensionMismatch, "term input index out of range");
    }
  }
}

bool DynamicalSystem::operator==(const DynamicalSystem& o) const {
  return A.rows() == o.A.rows() && A.cols() == o.A.cols() && A == o.A && C.rows() == o.C.rows() &&
         C.cols() == o.C.cols() && C == o.C && phi == o.phi && region == o.region && input_dim == o.input_dim;
}

Vector eval_phi(const DynamicalSystem& sys, const Vector& x, const Vector& u) {
  check_point(sys, x, u);
  if (sys.phi.kind == Nonlinearity::Kind::Builtin) return lookup_builtin(sys.phi.name).eval(x);
  Vector out = Vector::Zero(sys.n());
  for (const auto& t : sys.phi.terms) out(t.out) += term_value(t, x, u);
  return out;
}

Matrix finite_difference_jacobian(const DynamicalSystem& sys, const Vector& x, const Vector& u) {
  check_point(sys, x, u);
  const double step = 1e-6 * std::max(1.0, x.norm());
  Matrix j(sys.n(), sys.n());
  for (int k = 0; k < sys.n(); ++k) {
    Vector xp = x, xm = x;
    xp(k) += step;
    xm(k) -= step;
    j.col(k) = (eval_phi(sys, xp, u) - eval_phi(sys, xm, u)) / (2.0 * step);
  }
  return j;
}

Matrix jacobian(const DynamicalSystem& sys, const Vector& x, const Vector& u) {
  check_point(sys, x, u);
  if (sys.phi.kind == Nonlinearity::Kind::Builtin) {
    const auto& b = lookup_builtin(sys.phi.name);
    return b.jac ? b.jac(x) : finite_difference_jacobian(sys, x, u);
  }
  Matrix j = Matrix::Zero(sys.n(), sys.n());
  for (const auto& t : sys.phi.terms) {
    for (int k = 0; k < sys.n(); ++k) {
      const int ek = t.exps[k];
      if (ek == 0) continue;
      double v = t.coef * ek;
      for (int i = 0; i < sys.n(); ++i) {
        const int e = (i == k) ? ek - 1 : t.exps[i];
        if (e != 0) v *= std::pow(x(i), e);
      }
      if (t.input) v *= u(*t.input);
      j(t.out, k) += v;
    }
  }
  return j;
}

DynamicalSystem builtin(const std::string& name, std::optional<double> region_size) {
  DynamicalSystem sys;
  sys.phi = Nonlinearity::builtin(name);
  if (name == "example1") {
    sys.A = Matrix::Zero(1, 1);
    sys.C = Matrix::Ones(1, 1);
    sys.region = Region::ball(1, region_size.value_or(2.0));
  } else if (name == "example2") {
    const double m = region_size.value_or(1.0);
    sys.A = Matrix::Zero(1, 1);
    sys.C = Matrix::Ones(1, 1);
    sys.region = Region::box(Vector::Constant(1, -m), Vector::Constant(1, m));
  } else if (name == "example3") {
    sys.A.resize(2, 2);
    sys.A << 1, -1, 1, 1;
    sys.C.resize(1, 2);
    sys.C << 0, 1;
    sys.region = Region::ball(2, region_size.value_or(5.9372));
  } else {
    throw Error(ErrorCode::UnknownBuiltin, name);
  }
  sys.validate();
  return sys;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, path + (what.empty() ? "" : ": " + what));
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const std::string full = path.empty() ? key : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) schema_error(full, "");
  return obj.at(key);
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected integer");
  return v.get<int>();
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected number");
  return v.get<double>();
}

Vector as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = as_real(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

Matrix as_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) schema_error(path, "expected non-empty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Matrix out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) schema_error(row_path, "expected array");
    if (v[i].size() != cols) throw Error(ErrorCode::DimensionMismatch, row_path + " has ragged length");
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = as_real(v[i][j], row_path + "[" + std::to_string(j) + "]");
  }
  return out;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

DynamicalSystem parse_system(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) schema_error("", "top level must be an object");

  const int n = as_int(require(doc, "n", ""), "n");
  const int p = as_int(require(doc, "p", ""), "p");
  const int m = as_int(require(doc, "m", ""), "m");
  if (n < 1 || p < 1 || m < 0) throw Error(ErrorCode::SchemaError, "n, p must be positive and m nonnegative");

  DynamicalSystem sys;
  sys.input_dim = m;
  sys.A = as_matrix(require(doc, "A", ""), "A");
  sys.C = as_matrix(require(doc, "C", ""), "C");
  if (sys.A.rows() != n || sys.A.cols() != n) throw Error(ErrorCode::DimensionMismatch, "A must be n x n");
  if (sys.C.rows() != p || sys.C.cols() != n) throw Error(ErrorCode::DimensionMismatch, "C must be p x n");

  const json& phi = require(doc, "phi", "");
  const json& kind = require(phi, "kind", "phi");
  if (kind == "builtin") {
    const json& name = require(phi, "name", "phi");
    if (!name.is_string()) schema_error("phi.name", "expected string");
    sys.phi = Nonlinearity::builtin(name.get<std::string>());
    lookup_builtin(sys.phi.name);
  } else if (kind == "polynomial") {
    const json& terms = require(phi, "terms", "phi");
    if (!terms.is_array()) schema_error("phi.terms", "expected array");
    std::vector<PolynomialTerm> parsed;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string path = "phi.terms[" + std::to_string(i) + "]";
      const json& t = terms[i];
      PolynomialTerm term;
      term.out = as_int(require(t, "out", path), join(path, "out"));
      term.coef = as_real(require(t, "coef", path), join(path, "coef"));
      const json& exps = require(t, "exps", path);
      if (!exps.is_array()) schema_error(join(path, "exps"), "expected array");
      for (std::size_t k = 0; k < exps.size(); ++k) {
        term.exps.push_back(as_int(exps[k], join(path, "exps") + "[" + std::to_string(k) + "]"));
      }
      if (static_cast<int>(term.exps.size()) != n) {
        throw Error(ErrorCode::DimensionMismatch, join(path, "exps") + " must have length n");
      }
      if (t.contains("input")) term.input = as_int(t.at("input"), join(path, "input"));
      parsed.push_back(std::move(term));
    }
    sys.phi = Nonlinearity::polynomial(std::move(parsed));
  } else {
    schema_error("phi.kind", "expected \"polynomial\" or \"builtin\"");
  }

  const json& region = require(doc, "region", "");
  const json& shape = require(region, "shape", "region");
  if (shape == "ball") {
    sys.region = Region::ball(n, as_real(require(region, "r", "region"), "region.r"));
  } else if (shape == "box") {
    Vector lo = as_vector(require(region, "lower", "region"), "region.lower");
    Vector hi = as_vector(require(region, "upper", "region"), "region.upper");
    if (lo.size() != n || hi.size() != n) throw Error(ErrorCode::DimensionMismatch, "box bounds must have length n");
    sys.region = Region::box(std::move(lo), std::move(hi));
  } else {
    schema_error("region.shape", "expected \"ball\" or \"box\"");
  }

  sys.validate();
  return sys;
}

std::string serialize_system(const DynamicalSystem& sys) {
  json doc;
  doc["n"] = sys.n();
  doc["p"] = sys.p();
  doc["m"] = sys.input_dim;
  doc["A"] = matrix_json(sys.A);
  doc["C"] = matrix_json(sys.C);
  if (sys.phi.kind == Nonlinearity::Kind::Builtin) {
    doc["phi"] = {{"kind", "builtin"}, {"name", sys.phi.name}};
  } else {
    json terms = json::array();
    for (const auto& t : sys.phi.terms) {
      json jt = {{"out", t.out}, {"coef", t.coef}, {"exps", t.exps}};
      if (t.input) jt["input"] = *t.input;
      terms.push_back(jt);
    }
    doc["phi"] = {{"kind", "polynomial"}, {"terms", terms}};
  }
  if (sys.region.shape == Region::Shape::Ball) {
    doc["region"] = {{"shape", "ball"}, {"r", sys.region.radius}};
  } else {
    doc["region"] = {{"shape", "box"}, {"lower", vector_json(sys.region.lower)}, {"upper", vector_json(sys.region.upper)}};
  }
  return doc.dump(2);
}

}  // namespace oslobs
