#include "oslobs/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace oslobs {

std::string to_string(Method m) { return m == Method::Rk4 ? "rk4" : "implicit_euler"; }

Method parse_method(const std::string& name) {
  if (name == "rk4") return Method::Rk4;
  if (name == "implicit_euler") return Method::ImplicitEuler;
  throw Error(ErrorCode::PreconditionViolated, "unknown method '" + name + "' (rk4 | implicit_euler)");
}

namespace {

constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 50;
constexpr int kMaxHalvings = 30;

Matrix fd_jacobian(const VectorField& field, double t, const Vector& x) {
  const double step = 1e-6 * std::max(1.0, x.norm());
  Matrix j(x.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector xp = x, xm = x;
    xp(k) += step;
    xm(k) -= step;
    j.col(k) = (field.f(t, xp) - field.f(t, xm)) / (2.0 * step);
  }
  return j;
}

Vector rk4_step(const VectorField& field, double t, const Vector& x, double h) {
  const Vector k1 = field.f(t, x);
  const Vector k2 = field.f(t + h / 2, x + h / 2 * k1);
  const Vector k3 = field.f(t + h / 2, x + h / 2 * k2);
  const Vector k4 = field.f(t + h, x + h * k3);
  return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

Vector implicit_euler_step(const VectorField& field, double t, const Vector& x, double h) {
  const double t_next = t + h;
  auto residual = [&](const Vector& z) -> Vector { return z - x - h * field.f(t_next, z); };
  Vector z = x;
  Vector g = residual(z);
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    // Relative, so tiny states still take a Newton step instead of freezing.
    if (g.norm() <= 1e-14 * (x.norm() + z.norm())) return z;
    const Matrix jf = field.jacobian ? field.jacobian(t_next, z) : fd_jacobian(field, t_next, z);
    const Matrix jg = Matrix::Identity(x.size(), x.size()) - h * jf;
    const Vector dz = jg.partialPivLu().solve(-g);
    if (!dz.allFinite()) break;

    double damping = 1.0;
    Vector z_try = z + dz;
    Vector g_try = residual(z_try);
    int halvings = 0;
    while (!(g_try.allFinite() && g_try.norm() < g.norm()) && halvings < kMaxHalvings) {
      damping /= 2;
      z_try = z + damping * dz;
      g_try = residual(z_try);
      ++halvings;
    }
    if (!g_try.allFinite()) break;
    const double moved = (damping * dz).norm();
    z = std::move(z_try);
    g = std::move(g_try);
    if (moved <= kNewtonTol * std::max(1.0, z.norm())) return z;
  }
  throw Error(ErrorCode::NewtonDivergence, "implicit Euler Newton iteration did not converge at t = " +
                                               std::to_string(t_next));
}

void validate_span(double t0, double t1, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::PreconditionViolated, "step h must be > 0");
  if (!(t1 > t0) || !std::isfinite(t1) || !std::isfinite(t0)) {
    throw Error(ErrorCode::PreconditionViolated, "requires t1 > t0");
  }
}

std::size_t step_count(double t0, double t1, double h) {
  return static_cast<std::size_t>(std::ceil((t1 - t0) / h - 1e-9));
}

}  // namespace

SimulationTrace integrate(const VectorField& field, const Vector& x0, double t0, double t1, double h, Method method) {
  validate_span(t0, t1, h);
  if (!x0.allFinite()) throw Error(ErrorCode::NonFiniteState, "initial state");
  const std::size_t steps = step_count(t0, t1, h);
  SimulationTrace trace;
  trace.times.reserve(steps + 1);
  trace.states.reserve(steps + 1);
  trace.times.push_back(t0);
  trace.states.push_back(x0);
  Vector x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = trace.times.back();
    const double t_next = k + 1 == steps ? t1 : t0 + static_cast<double>(k + 1) * h;
    const double dt = t_next - t;
    x = method == Method::Rk4 ? rk4_step(field, t, x, dt) : implicit_euler_step(field, t, x, dt);
    if (!x.allFinite()) {
      throw Error(ErrorCode::NonFiniteState, "state became non-finite at t = " + std::to_string(t_next));
    }
    trace.times.push_back(t_next);
    trace.states.push_back(x);
  }
  return trace;
}

namespace {

Vector input_at(const DynamicalSystem& sys, const InputSignal& u, double t) {
  if (!u) return Vector::Zero(sys.input_dim);
  Vector v = u(t);
  if (v.size() != sys.input_dim) throw Error(ErrorCode::DimensionMismatch, "input signal length differs from m");
  return v;
}

Matrix phi_jacobian(const DynamicalSystem& sys, const Vector& x, const Vector& u) {
  try {
    return jacobian(sys, x, u);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotDifferentiableAtPoint) throw;
    return finite_difference_jacobian(sys, x, u);
  }
}

void note_region(const DynamicalSystem& sys, SimulationTrace& trace, double t, const Vector& x, const Vector* xhat) {
  if (trace.left_region) return;
  if (sys.region.contains(x) && (xhat == nullptr || sys.region.contains(*xhat))) return;
  trace.left_region = true;
  trace.first_exit_time = t;
  trace.warnings.push_back("trajectory left the system region at t = " + std::to_string(t) +
                           "; guarantees are regional");
}

}  // namespace

SimulationTrace simulate_plant(const DynamicalSystem& sys, const Vector& x0, const InputSignal& u, double t1,
                               double h, Method method) {
  if (x0.size() != sys.n()) throw Error(ErrorCode::DimensionMismatch, "x0 length differs from n");
  VectorField field;
  field.f = [&](double t, const Vector& x) -> Vector { return sys.A * x + eval_phi(sys, x, input_at(sys, u, t)); };
  field.jacobian = [&](double t, const Vector& x) -> Matrix {
    return sys.A + phi_jacobian(sys, x, input_at(sys, u, t));
  };
  SimulationTrace trace = integrate(field, x0, 0.0, t1, h, method);
  for (std::size_t k = 0; k < trace.size(); ++k) note_region(sys, trace, trace.times[k], trace.states[k], nullptr);
  return trace;
}

SimulationTrace simulate_observer(const DynamicalSystem& sys, const Matrix& L, const Vector& x0, const Vector& xhat0,
                                  const InputSignal& u, double t1, double h, Method method,
                                  const std::optional<Matrix>& P) {
  const int n = sys.n();
  if (x0.size() != n || xhat0.size() != n) throw Error(ErrorCode::DimensionMismatch, "initial states must have length n");
  if (L.rows() != n || L.cols() != sys.p()) throw Error(ErrorCode::DimensionMismatch, "L must be n x p");
  if (P && (P->rows() != n || P->cols() != n)) throw Error(ErrorCode::DimensionMismatch, "P must be n x n");
  const Matrix LC = L * sys.C;

  VectorField field;
  field.f = [&](double t, const Vector& z) -> Vector {
    const Vector uu = input_at(sys, u, t);
    const Vector x = z.head(n), xh = z.tail(n);
    Vector dz(2 * n);
    dz.head(n) = sys.A * x + eval_phi(sys, x, uu);
    dz.tail(n) = sys.A * xh + eval_phi(sys, xh, uu) + LC * (x - xh);
    return dz;
  };
  field.jacobian = [&](double t, const Vector& z) -> Matrix {
    const Vector uu = input_at(sys, u, t);
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    j.topLeftCorner(n, n) = sys.A + phi_jacobian(sys, z.head(n), uu);
    j.bottomLeftCorner(n, n) = LC;
    j.bottomRightCorner(n, n) = sys.A + phi_jacobian(sys, z.tail(n), uu) - LC;
    return j;
  };

  Vector z0(2 * n);
  z0 << x0, xhat0;
  SimulationTrace coupled = integrate(field, z0, 0.0, t1, h, method);

  SimulationTrace trace;
  trace.times = std::move(coupled.times);
  trace.states.reserve(trace.times.size());
  trace.estimates.reserve(trace.times.size());
  trace.error_norms.reserve(trace.times.size());
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const Vector& z = coupled.states[k];
    trace.states.push_back(z.head(n));
    trace.estimates.push_back(z.tail(n));
    const Vector e = trace.states.back() - trace.estimates.back();
    trace.error_norms.push_back(e.norm());
    if (P) trace.lyapunov.push_back(e.dot(*P * e));
    note_region(sys, trace, trace.times[k], trace.states.back(), &trace.estimates.back());
  }
  return trace;
}

ErrorMetrics error_metrics(const SimulationTrace& trace) {
  if (trace.error_norms.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no error samples");
  ErrorMetrics m;
  m.initial_error = trace.error_norms.front();
  m.final_error = trace.error_norms.back();
  m.ratio = m.initial_error > 0.0 ? m.final_error / m.initial_error : 0.0;
  for (std::size_t k = 0; k < trace.error_norms.size(); ++k) {
    if (trace.error_norms[k] <= 0.01 * m.initial_error) {
      m.time_to_one_percent = trace.times[k];
      break;
    }
  }
  if (!trace.lyapunov.empty()) {
    m.initial_lyapunov = trace.lyapunov.front();
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < trace.lyapunov.size(); ++k) {
      worst = std::max(worst, trace.lyapunov[k + 1] - trace.lyapunov[k]);
    }
    m.max_lyapunov_increase = worst;
  }
  return m;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_csv(std::ostream& out, const SimulationTrace& trace) {
  const std::size_t n = trace.states.empty() ? 0 : static_cast<std::size_t>(trace.states.front().size());
  const bool has_v = !trace.lyapunov.empty();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",xhat" << i;
  out << ",err_norm";
  if (has_v) out << ",V";
  out << '\n';
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    put(out, trace.times[k]);
    for (std::size_t i = 0; i < n; ++i) {
      out << ',';
      put(out, trace.states[k](i));
    }
    for (std::size_t i = 0; i < n; ++i) {
      out << ',';
      put(out, trace.estimates.empty() ? 0.0 : trace.estimates[k](i));
    }
    out << ',';
    put(out, trace.error_norms.empty() ? 0.0 : trace.error_norms[k]);
    if (has_v) {
      out << ',';
      put(out, trace.lyapunov[k]);
    }
    out << '\n';
  }
}

}  // namespace oslobs
