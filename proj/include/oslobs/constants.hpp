#pragma once

// Sampled estimates of the regularity constants of phi over a region:
// Lipschitz constant l, one-sided Lipschitz constant rho, and a quadratic
// inner-boundedness pair (beta, gamma) satisfying
//   |dphi|^2 <= beta |dx|^2 + gamma <dx, dphi>.
//
// Sampling only ever yields lower bounds on the suprema. Reports say "no
// violation found at N samples", never "proved".

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oslobs/systems.hpp"

namespace oslobs {

struct SamplePlan {
  enum class Mode { Grid, Random };

  Mode mode = Mode::Random;
  int points_per_axis = 0;     // Grid
  std::size_t count = 0;       // Random anchors; 0 means pair_count
  std::uint64_t seed = 42;
  std::size_t pair_count = 20000;
  std::optional<Vector> input;  // held fixed while sampling; zeros when absent

  static SamplePlan random(std::size_t pairs, std::uint64_t seed = 42) {
    SamplePlan p;
    p.pair_count = pairs;
    p.seed = seed;
    return p;
  }
  static SamplePlan grid(int points_per_axis, std::size_t pairs, std::uint64_t seed = 42) {
    SamplePlan p;
    p.mode = Mode::Grid;
    p.points_per_axis = points_per_axis;
    p.pair_count = pairs;
    p.seed = seed;
    return p;
  }
};

/// Points and index pairs drawn from a region. Every pair has distinct points.
/// Half the pairs are near-diagonal (|x1 - x2| in [1e-6, 1e-2] * scale); the
/// rest join two independent anchors. Region extreme points (centre, axis
/// tips or box corners) are always among the points.
struct SampleSet {
  std::vector<Vector> points;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

SampleSet draw_samples(const Region& region, const SamplePlan& plan);

struct Witness {
  Vector x1;
  Vector x2;  // equals x1 for Jacobian-route witnesses
  double value = 0.0;
  std::string route;  // "pairwise" or "jacobian"
};

struct ConstantEstimate {
  double value = 0.0;                // max of both routes
  double pairwise = 0.0;
  std::optional<double> jacobian;    // absent when phi is nowhere differentiable on the samples
  Witness witness;
  std::size_t pairs = 0;
  std::size_t jacobian_points = 0;
};

ConstantEstimate estimate_lipschitz(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan);
ConstantEstimate estimate_osl(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan);

struct QibPair {
  double beta = 0.0;
  double gamma = 0.0;
  double xi = 0.0;  // (beta + 1) + rho (gamma + 2 alpha)
};

/// Per-pair data of the QIB constraint beta*a + gamma*b >= c, with
/// a = |dx|^2, b = <dx, dphi>, c = |dphi|^2.
struct QibConstraint {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

std::vector<QibConstraint> qib_constraints(const DynamicalSystem& sys, const SampleSet& samples,
                                           const Vector& input);

/// Minimizes xi over (beta, gamma) subject to every constraint and
/// gamma + 2 alpha >= 1e-9. Ties: smallest |gamma|, then smallest beta.
QibPair solve_qib_lp(const std::vector<QibConstraint>& constraints, double alpha, double rho);

QibPair qib_estimate(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan, double alpha,
                     double rho);

struct QibViolationReport {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;  // min over pairs of beta*a + gamma*b - c
  Witness worst;
};

QibViolationReport verify_qib(const DynamicalSystem& sys, double beta, double gamma, const Region& region,
                              const SamplePlan& plan);

/// Radius of the ball on which (beta, gamma) is a QIB pair for the planar cubic
/// phi(x) = -x |x|^2 (example3 family only).
double qib_region_radius(double beta, double gamma);

/// Lipschitz constant implied by (rho, beta, gamma[, alpha]) when one of the
/// classical reductions applies; nullopt otherwise.
std::optional<double> implied_lipschitz_bound(double rho, double beta, double gamma,
                                              std::optional<double> alpha = std::nullopt);

/// All constants computed on one shared sample set.
struct RegularityEstimate {
  double rho = 0.0;
  double lip = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double alpha = 1.0;
  double xi = 0.0;
  Region region;
  std::vector<Witness> witnesses;
  std::size_t pairs = 0;
  std::uint64_t seed = 0;
  std::string method;
  ConstantEstimate lip_detail;
  ConstantEstimate rho_detail;
  std::optional<std::string> qib_failure;  // set when the LP step failed
};

RegularityEstimate estimate_regularity(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan,
                                       double alpha);

}  // namespace oslobs
