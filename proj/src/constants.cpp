#include "oslobs/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace oslobs {

namespace {

constexpr double kGammaSlack = 1e-9;
constexpr double kNearMinExp = -6.0;
constexpr double kNearMaxExp = -2.0;
constexpr std::size_t kMinEstimationPairs = 100;

/// Maps unit-region coordinates z (unit ball or [-1,1]^n) into the region.
Vector to_region(const Region& region, const Vector& z) {
  if (region.shape == Region::Shape::Ball) return region.radius * z;
  const Vector centre = 0.5 * (region.lower + region.upper);
  const Vector half = 0.5 * (region.upper - region.lower);
  return centre + half.cwiseProduct(z);
}

bool in_unit(const Region& region, const Vector& z) {
  if (region.shape == Region::Shape::Ball) return z.squaredNorm() <= 1.0;
  return z.cwiseAbs().maxCoeff() <= 1.0;
}

Vector random_direction(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector d(n);
  do {
    for (int i = 0; i < n; ++i) d(i) = normal(rng);
  } while (d.norm() == 0.0);
  return d / d.norm();
}

Vector random_unit_point(const Region& region, std::mt19937_64& rng) {
  const int n = region.dim;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (region.shape == Region::Shape::Ball) {
    const Vector dir = random_direction(rng, n);
    return dir * std::pow(uni(rng), 1.0 / n);
  }
  Vector z(n);
  for (int i = 0; i < n; ++i) z(i) = 2.0 * uni(rng) - 1.0;
  return z;
}

std::vector<Vector> extreme_unit_points(const Region& region) {
  const int n = region.dim;
  std::vector<Vector> pts;
  pts.push_back(Vector::Zero(n));
  for (int i = 0; i < n; ++i) {
    pts.push_back(Vector::Unit(n, i));
    pts.push_back(-Vector::Unit(n, i));
  }
  if (region.shape == Region::Shape::Box && n <= 10) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      Vector z(n);
      for (int i = 0; i < n; ++i) z(i) = (mask >> i) & 1u ? 1.0 : -1.0;
      pts.push_back(z);
    }
  }
  return pts;
}

std::vector<Vector> grid_unit_points(const Region& region, int per_axis) {
  const int n = region.dim;
  if (per_axis < 2) throw Error(ErrorCode::EmptyRegion, "grid needs at least 2 points per axis");
  const double total = std::pow(static_cast<double>(per_axis), n);
  if (total > 2e6) throw Error(ErrorCode::PreconditionViolated, "grid too large");
  std::vector<Vector> pts;
  std::vector<int> idx(n, 0);
  for (long k = 0; k < static_cast<long>(total); ++k) {
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = -1.0 + 2.0 * idx[i] / (per_axis - 1);
    if (in_unit(region, z)) pts.push_back(z);
    for (int i = 0; i < n; ++i) {
      if (++idx[i] < per_axis) break;
      idx[i] = 0;
    }
  }
  return pts;
}

void require_subregion(const DynamicalSystem& sys, const Region& region) {
  if (region.dim != sys.n()) throw Error(ErrorCode::DimensionMismatch, "region dimension differs from n");
  if (!sys.region.encloses(region)) {
    throw Error(ErrorCode::PreconditionViolated, "estimation region must lie inside the system region");
  }
}

Vector plan_input(const DynamicalSystem& sys, const SamplePlan& plan) {
  if (!plan.input) return Vector::Zero(sys.input_dim);
  if (plan.input->size() != sys.input_dim) throw Error(ErrorCode::DimensionMismatch, "sample plan input");
  return *plan.input;
}

SampleSet checked_samples(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan) {
  require_subregion(sys, region);
  if (plan.pair_count < kMinEstimationPairs) {
    throw Error(ErrorCode::PreconditionViolated, "estimation needs at least 100 sample pairs");
  }
  return draw_samples(region, plan);
}

struct PairDiff {
  Vector dx;
  Vector dphi;
};

template <typename Fn>
void for_each_pair(const DynamicalSystem& sys, const SampleSet& s, const Vector& u, Fn&& fn) {
  std::vector<Vector> phis;
  phis.reserve(s.points.size());
  for (const auto& x : s.points) phis.push_back(eval_phi(sys, x, u));
  for (std::size_t k = 0; k < s.pairs.size(); ++k) {
    const auto [i, j] = s.pairs[k];
    fn(k, PairDiff{s.points[i] - s.points[j], phis[i] - phis[j]});
  }
}

enum class Route { Lipschitz, OneSided };

ConstantEstimate estimate_on(const DynamicalSystem& sys, const SampleSet& s, const Vector& u, Route route) {
  ConstantEstimate est;
  est.pairs = s.pairs.size();
  double best_pair = -std::numeric_limits<double>::infinity();
  std::size_t best_pair_idx = 0;

  for_each_pair(sys, s, u, [&](std::size_t k, const PairDiff& d) {
    const double ndx = d.dx.norm();
    const double ndphi = d.dphi.norm();
    const double ratio = ndphi / ndx;
    double value = ratio;
    if (route == Route::OneSided) {
      // cos * ratio keeps the Cauchy-Schwarz ordering exact in floating point.
      const double cosine = ndphi == 0.0 ? 0.0 : std::clamp(d.dx.dot(d.dphi) / (ndx * ndphi), -1.0, 1.0);
      value = cosine * ratio;
    }
    if (value > best_pair) {
      best_pair = value;
      best_pair_idx = k;
    }
  });
  est.pairwise = best_pair;

  double best_jac = -std::numeric_limits<double>::infinity();
  std::size_t best_jac_idx = 0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    Matrix j;
    try {
      j = jacobian(sys, s.points[i], u);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotDifferentiableAtPoint) continue;
      throw;
    }
    if (!j.allFinite()) continue;
    ++est.jacobian_points;
    const double value = route == Route::Lipschitz ? spectral_norm(j) : log_norm2(j);
    if (value > best_jac) {
      best_jac = value;
      best_jac_idx = i;
    }
  }

  const auto& [wi, wj] = s.pairs[best_pair_idx];
  est.value = est.pairwise;
  est.witness = {s.points[wi], s.points[wj], est.pairwise, "pairwise"};
  if (est.jacobian_points > 0) {
    est.jacobian = best_jac;
    if (best_jac > est.value) {
      est.value = best_jac;
      est.witness = {s.points[best_jac_idx], s.points[best_jac_idx], best_jac, "jacobian"};
    }
  }
  return est;
}

double qib_slack(const QibConstraint& c, double beta, double gamma) { return beta * c.a + gamma * c.b - c.c; }

double qib_scale(const QibConstraint& c, double beta, double gamma) {
  return std::abs(beta * c.a) + std::abs(gamma * c.b) + std::abs(c.c);
}

// A line beta >= intercept + slope * gamma, in normalized form.
struct Line {
  double slope;
  double intercept;
  double at(double g) const { return intercept + slope * g; }
};

/// Upper envelope of lines, ordered by increasing slope.
std::vector<Line> upper_envelope(std::vector<Line> lines) {
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.slope < b.slope || (a.slope == b.slope && a.intercept > b.intercept);
  });
  std::vector<Line> hull;
  for (const Line& l : lines) {
    if (!hull.empty() && hull.back().slope == l.slope) continue;  // dominated by same-slope predecessor
    while (hull.size() >= 2) {
      const Line& a = hull[hull.size() - 2];
      const Line& b = hull.back();
      // b is useless if a and l cross at or left of where a and b cross.
      const double x_ab = (a.intercept - b.intercept) / (b.slope - a.slope);
      const double x_al = (a.intercept - l.intercept) / (l.slope - a.slope);
      if (x_al <= x_ab) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(l);
  }
  return hull;
}

}  // namespace

SampleSet draw_samples(const Region& region, const SamplePlan& plan) {
  if (plan.pair_count == 0) throw Error(ErrorCode::EmptyRegion, "sample plan requests no pairs");
  const int n = region.dim;
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  // Sampling happens in unit coordinates so that ball samples are exactly
  // r times the unit-ball samples for the same seed.
  std::vector<Vector> unit = extreme_unit_points(region);
  if (plan.mode == SamplePlan::Mode::Grid) {
    for (auto& z : grid_unit_points(region, plan.points_per_axis)) unit.push_back(std::move(z));
  } else {
    const std::size_t count = plan.count == 0 ? plan.pair_count : plan.count;
    for (std::size_t k = 0; k < count; ++k) unit.push_back(random_unit_point(region, rng));
  }
  const std::size_t n_anchor = unit.size();
  if (n_anchor < 2) throw Error(ErrorCode::EmptyRegion, "region yields fewer than two sample points");

  SampleSet out;
  out.pairs.reserve(plan.pair_count);
  std::uniform_int_distribution<std::size_t> pick(0, n_anchor - 1);
  for (std::size_t k = 0; k < plan.pair_count; ++k) {
    const std::size_t i = k % n_anchor;
    if (k % 2 == 1) {
      std::size_t j = pick(rng);
      while (j == i || unit[j] == unit[i]) j = pick(rng);
      out.pairs.emplace_back(i, j);
      continue;
    }
    const double dist = std::pow(10.0, kNearMinExp + (kNearMaxExp - kNearMinExp) * uni(rng));
    Vector base = unit[i];
    Vector partner;
    for (int attempt = 0;; ++attempt) {
      const Vector dir = random_direction(rng, n);
      partner = base + dist * dir;
      if (in_unit(region, partner)) break;
      partner = base - dist * dir;
      if (in_unit(region, partner)) break;
      if (attempt >= 8) {
        // Rare: anchor sits on the boundary and both directions leave. Step inward.
        partner = base * (1.0 - dist);
        if (partner == base) partner = base - dist * base.normalized();
        break;
      }
    }
    unit.push_back(partner);
    out.pairs.emplace_back(i, unit.size() - 1);
  }

  out.points.reserve(unit.size());
  for (const auto& z : unit) out.points.push_back(to_region(region, z));
  return out;
}

ConstantEstimate estimate_lipschitz(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan) {
  const SampleSet s = checked_samples(sys, region, plan);
  return estimate_on(sys, s, plan_input(sys, plan), Route::Lipschitz);
}

ConstantEstimate estimate_osl(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan) {
  const SampleSet s = checked_samples(sys, region, plan);
  return estimate_on(sys, s, plan_input(sys, plan), Route::OneSided);
}

std::vector<QibConstraint> qib_constraints(const DynamicalSystem& sys, const SampleSet& samples,
                                           const Vector& input) {
  std::vector<QibConstraint> out;
  out.reserve(samples.pairs.size());
  for_each_pair(sys, samples, input, [&](std::size_t, const PairDiff& d) {
    const double a = d.dx.squaredNorm();
    if (a > 0.0) out.push_back({a, d.dx.dot(d.dphi), d.dphi.squaredNorm()});
  });
  return out;
}

QibPair solve_qib_lp(const std::vector<QibConstraint>& constraints, double alpha, double rho) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::PreconditionViolated, "alpha must be > 0");
  if (constraints.empty()) throw Error(ErrorCode::InfeasibleSamples, "no sample pairs to constrain (beta, gamma)");

  // Each constraint reads beta >= c/a - (b/a) gamma. The feasible set is the
  // epigraph of the upper envelope g(gamma), cut by gamma >= gamma_min.
  const double gamma_min = -2.0 * alpha + kGammaSlack;
  std::vector<Line> lines;
  lines.reserve(constraints.size());
  double min_bhat = std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) {
    lines.push_back({-c.b / c.a, c.c / c.a});
    min_bhat = std::min(min_bhat, c.b / c.a);
  }
  // Objective beta + rho*gamma has slope rho - min(b/a) once gamma is large.
  if (rho - min_bhat < 0.0) {
    throw Error(ErrorCode::Unbounded, "xi decreases without bound as gamma grows");
  }

  const std::vector<Line> hull = upper_envelope(std::move(lines));
  auto envelope = [&](double g) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Line& l : hull) best = std::max(best, l.at(g));
    return best;
  };

  // Vertices of the feasible polygon: envelope breakpoints right of gamma_min,
  // the cut itself, and gamma = 0 for the smallest-|gamma| tie-break.
  std::vector<double> candidates{gamma_min};
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const double x = (hull[k].intercept - hull[k + 1].intercept) / (hull[k + 1].slope - hull[k].slope);
    if (x > gamma_min && std::isfinite(x)) candidates.push_back(x);
  }
  if (0.0 > gamma_min) candidates.push_back(0.0);

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> scored;  // (objective, gamma)
  for (double g : candidates) {
    const double obj = envelope(g) + rho * g;
    scored.emplace_back(obj, g);
    best = std::min(best, obj);
  }
  const double tie = 1e-12 * std::max(1.0, std::abs(best));
  double gamma = 0.0, beta = 0.0;
  bool chosen = false;
  for (const auto& [obj, g] : scored) {
    if (obj > best + tie) continue;
    const double b = envelope(g);
    if (!chosen || std::abs(g) < std::abs(gamma) || (std::abs(g) == std::abs(gamma) && b < beta)) {
      gamma = g;
      beta = b;
      chosen = true;
    }
  }

  // Recompute beta against the raw constraints so every slack is >= 0 in
  // floating point, not just in the normalized form.
  for (const auto& c : constraints) beta = std::max(beta, (c.c - gamma * c.b) / c.a);
  for (int pass = 0; pass < 4; ++pass) {
    double deficit = 0.0;
    for (const auto& c : constraints) deficit = std::max(deficit, -qib_slack(c, beta, gamma) / c.a);
    if (deficit <= 0.0) break;
    beta += deficit + std::numeric_limits<double>::epsilon() * std::abs(beta);
  }

  QibPair out;
  out.beta = beta;
  out.gamma = gamma;
  out.xi = (beta + 1.0) + rho * (gamma + 2.0 * alpha);
  return out;
}

QibPair qib_estimate(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan, double alpha,
                     double rho) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::PreconditionViolated, "alpha must be > 0");
  const SampleSet s = checked_samples(sys, region, plan);
  return solve_qib_lp(qib_constraints(sys, s, plan_input(sys, plan)), alpha, rho);
}

QibViolationReport verify_qib(const DynamicalSystem& sys, double beta, double gamma, const Region& region,
                              const SamplePlan& plan) {
  require_subregion(sys, region);
  const SampleSet s = draw_samples(region, plan);
  const Vector u = plan_input(sys, plan);
  QibViolationReport rep;
  rep.pairs = s.pairs.size();
  rep.worst_slack = std::numeric_limits<double>::infinity();
  for_each_pair(sys, s, u, [&](std::size_t k, const PairDiff& d) {
    const QibConstraint c{d.dx.squaredNorm(), d.dx.dot(d.dphi), d.dphi.squaredNorm()};
    const double slack = qib_slack(c, beta, gamma);
    // Relative rounding allowance on the three summands.
    if (slack < -1e-12 * qib_scale(c, beta, gamma)) ++rep.violations;
    if (slack < rep.worst_slack) {
      rep.worst_slack = slack;
      const auto [i, j] = s.pairs[k];
      rep.worst = {s.points[i], s.points[j], slack, "pairwise"};
    }
  });
  return rep;
}

double qib_region_radius(double beta, double gamma) {
  const double inner = beta + gamma * gamma / 4.0;
  if (!(gamma < 0.0) || !(inner > 0.0)) {
    throw Error(ErrorCode::PreconditionViolated, "requires gamma < 0 and beta + gamma^2/4 > 0");
  }
  return std::min(std::sqrt(-gamma / 4.0), std::pow(inner, 0.25));
}

std::optional<double> implied_lipschitz_bound(double rho, double beta, double gamma, std::optional<double> alpha) {
  std::optional<double> best;
  auto offer = [&](double v) {
    if (!best || v < *best) best = v;
  };
  if (gamma == 0.0 && beta > 0.0) offer(std::sqrt(beta));
  if (gamma > 0.0 && beta + gamma * rho > 0.0) offer(std::sqrt(beta + gamma * rho));
  if (alpha) {
    const double a = *alpha;
    const double inner = (beta + 1.0) + (gamma + 2.0 * a) * rho;
    if (a > 0.0 && a <= 1.0 && gamma + 2.0 * a > 0.0 && inner >= 0.0) offer((1.0 + std::sqrt(inner)) / a);
  }
  return best;
}

RegularityEstimate estimate_regularity(const DynamicalSystem& sys, const Region& region, const SamplePlan& plan,
                                       double alpha) {
  const SampleSet s = checked_samples(sys, region, plan);
  const Vector u = plan_input(sys, plan);
  RegularityEstimate est;
  est.region = region;
  est.pairs = s.pairs.size();
  est.seed = plan.seed;
  est.alpha = alpha;
  est.method = plan.mode == SamplePlan::Mode::Grid ? "grid+near-diagonal pairs" : "random+near-diagonal pairs";
  est.lip_detail = estimate_on(sys, s, u, Route::Lipschitz);
  est.rho_detail = estimate_on(sys, s, u, Route::OneSided);
  est.lip = est.lip_detail.value;
  est.rho = est.rho_detail.value;
  est.witnesses = {est.lip_detail.witness, est.rho_detail.witness};
  try {
    const QibPair q = solve_qib_lp(qib_constraints(sys, s, u), alpha, est.rho);
    est.beta = q.beta;
    est.gamma = q.gamma;
    est.xi = q.xi;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unbounded && e.code() != ErrorCode::InfeasibleSamples) throw;
    est.qib_failure = e.what();
  }
  return est;
}

}  // namespace oslobs
