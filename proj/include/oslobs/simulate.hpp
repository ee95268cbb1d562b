#pragma once

// Fixed-step integration of the plant and the coupled plant/observer pair.

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "oslobs/synthesis.hpp"
#include "oslobs/systems.hpp"

namespace oslobs {

enum class Method { Rk4, ImplicitEuler };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct VectorField {
  std::function<Vector(double, const Vector&)> f;
  std::function<Matrix(double, const Vector&)> jacobian;  // optional; finite differences when empty
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> estimates;
  std::vector<double> error_norms;
  std::vector<double> lyapunov;
  bool left_region = false;
  std::optional<double> first_exit_time;
  std::vector<std::string> warnings;

  std::size_t size() const { return times.size(); }
};

/// Classical RK4 or implicit Euler (damped Newton, tol 1e-10, at most 50
/// iterations) from t0 to t1 with step h; the last step is shortened to land
/// on t1. Only `times` and `states` are filled.
SimulationTrace integrate(const VectorField& field, const Vector& x0, double t0, double t1, double h, Method method);

using InputSignal = std::function<Vector(double)>;

SimulationTrace simulate_observer(const DynamicalSystem& sys, const Matrix& L, const Vector& x0, const Vector& xhat0,
                                  const InputSignal& u, double t1, double h, Method method,
                                  const std::optional<Matrix>& P = std::nullopt);

inline SimulationTrace simulate_observer(const DynamicalSystem& sys, const ObserverDesign& design, const Vector& x0,
                                         const Vector& xhat0, const InputSignal& u, double t1, double h,
                                         Method method, const std::optional<Matrix>& P = std::nullopt) {
  return simulate_observer(sys, design.L, x0, xhat0, u, t1, h, method, P);
}

/// Plant alone, x' = A x + phi(x, u).
SimulationTrace simulate_plant(const DynamicalSystem& sys, const Vector& x0, const InputSignal& u, double t1,
                               double h, Method method);

struct ErrorMetrics {
  double initial_error = 0.0;
  double final_error = 0.0;
  double ratio = 0.0;                          // final / initial; 0 when the error is identically 0
  std::optional<double> time_to_one_percent;   // first t with |e| <= 0.01 |e(0)|
  std::optional<double> max_lyapunov_increase; // max_k max(0, V_{k+1} - V_k)
  std::optional<double> initial_lyapunov;
};

ErrorMetrics error_metrics(const SimulationTrace& trace);

/// Header t,x1..xn,xhat1..xhatn,err_norm[,V]; 17 significant digits.
void write_csv(std::ostream& out, const SimulationTrace& trace);

}  // namespace oslobs
