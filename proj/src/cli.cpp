#include "oslobs/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "oslobs/analysis.hpp"

namespace oslobs {

namespace {

struct SystemSource {
  std::string builtin_name;
  std::string system_file;
  std::optional<double> radius;
  std::vector<double> box;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void add_source_options(CLI::App* cmd, SystemSource& src) {
  cmd->add_option("--builtin", src.builtin_name, "Built-in system: example1 | example2 | example3");
  cmd->add_option("--system", src.system_file, "System JSON file");
  cmd->add_option("--radius", src.radius, "Override the region with a ball of this radius");
  cmd->add_option("--box", src.box, "Override the region with a box: LO HI (every axis) or LO1..LOn HI1..HIn")
      ->expected(2, 1000);
}

DynamicalSystem load_system(const SystemSource& src) {
  if (src.builtin_name.empty() == src.system_file.empty()) {
    throw Error(ErrorCode::PreconditionViolated, "give exactly one of --builtin or --system");
  }
  DynamicalSystem sys = src.builtin_name.empty() ? parse_system(read_file(src.system_file))
                                                 : builtin(src.builtin_name);
  const int n = sys.n();
  if (src.radius && !src.box.empty()) throw Error(ErrorCode::PreconditionViolated, "--radius and --box are exclusive");
  if (src.radius) sys.region = Region::ball(n, *src.radius);
  if (!src.box.empty()) {
    Vector lo(n), hi(n);
    if (src.box.size() == 2) {
      lo.setConstant(src.box[0]);
      hi.setConstant(src.box[1]);
    } else if (static_cast<int>(src.box.size()) == 2 * n) {
      for (int i = 0; i < n; ++i) {
        lo(i) = src.box[i];
        hi(i) = src.box[n + i];
      }
    } else {
      throw Error(ErrorCode::DimensionMismatch, "--box needs 2 or 2n values");
    }
    sys.region = Region::box(lo, hi);
  }
  return sys;
}

Json source_json(const SystemSource& src) {
  Json j;
  j["builtin"] = src.builtin_name.empty() ? Json(nullptr) : Json(src.builtin_name);
  j["system_file"] = src.system_file.empty() ? Json(nullptr) : Json(src.system_file);
  j["radius"] = src.radius ? Json(*src.radius) : Json(nullptr);
  j["box"] = src.box.empty() ? Json(nullptr) : Json(src.box);
  return j;
}

void emit(const RunReport& report, bool as_json, std::ostream& out, std::ostream& err) {
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (as_json) {
    out << report.to_json().dump(2) << '\n';
  } else {
    out << report.to_table();
  }
}

Vector cycled(const std::vector<double>& given, std::initializer_list<double> pattern, int n) {
  if (!given.empty()) {
    if (static_cast<int>(given.size()) != n) throw Error(ErrorCode::DimensionMismatch, "initial state length differs from n");
    return Eigen::Map<const Vector>(given.data(), n);
  }
  const std::vector<double> p(pattern);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = p[static_cast<std::size_t>(i) % p.size()];
  return v;
}

Matrix design_P(double lambda, int n) {
  if (n >= 2 && lambda > 0.0 && lambda < 1.0) return construct_P(lambda, n);
  return Matrix::Identity(n, n);
}

// ---------------------------------------------------------------------------
// Subcommands

struct EstimationFailure {
  RunReport report;
  std::string reason;
};

struct EstimateArgs {
  SystemSource src;
  std::size_t pairs = 20000;
  std::uint64_t seed = 42;
  std::optional<int> grid;
  double alpha = 1.0;
};

RunReport cmd_estimate(const EstimateArgs& a) {
  const DynamicalSystem sys = load_system(a.src);
  SamplePlan plan = a.grid ? SamplePlan::grid(*a.grid, a.pairs, a.seed) : SamplePlan::random(a.pairs, a.seed);
  RunReport rep;
  rep.command = "estimate";
  rep.inputs = {{"source", source_json(a.src)}, {"pairs", a.pairs}, {"seed", a.seed}, {"alpha", a.alpha}};
  rep.inputs["grid"] = a.grid ? Json(*a.grid) : Json(nullptr);
  const RegularityEstimate est = estimate_regularity(sys, sys.region, plan, a.alpha);
  rep.results = to_json(est);
  if (est.qib_failure) {
    rep.warnings.push_back("QIB pair not found: " + *est.qib_failure);
    throw EstimationFailure{rep, *est.qib_failure};
  }
  return rep;
}

struct SynthesizeArgs {
  SystemSource src;
  double rho = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  std::optional<double> alpha;
  std::string out_file;
};

RunReport cmd_synthesize(const SynthesizeArgs& a) {
  const DynamicalSystem sys = load_system(a.src);
  RunReport rep;
  rep.command = "synthesize";
  rep.inputs = {{"source", source_json(a.src)}, {"rho", a.rho}, {"beta", a.beta}, {"gamma", a.gamma}};
  rep.inputs["alpha"] = a.alpha ? Json(*a.alpha) : Json(nullptr);
  const ObserverDesign d = design_observer(sys.A, sys.C, a.rho, a.beta, a.gamma, a.alpha);
  rep.results["design"] = to_json(d);
  if (!a.out_file.empty()) {
    std::ofstream f(a.out_file);
    if (!f) throw Error(ErrorCode::PreconditionViolated, "cannot write '" + a.out_file + "'");
    f << serialize_design(design_file_of(d)) << '\n';
    rep.results["design_file"] = a.out_file;
  }
  return rep;
}

struct AnalyzeArgs {
  SystemSource src;
  std::string design_file;
  std::string mode = "all";
};

RunReport cmd_analyze(const AnalyzeArgs& a) {
  const DynamicalSystem sys = load_system(a.src);
  const DesignFile d = parse_design(read_file(a.design_file));
  if (d.L.rows() != sys.n() || d.L.cols() != sys.p()) throw Error(ErrorCode::DimensionMismatch, "L must be n x p");
  RunReport rep;
  rep.command = "analyze";
  rep.inputs = {{"source", source_json(a.src)}, {"design_file", a.design_file}, {"mode", a.mode}};
  rep.inputs["design"] = Json::parse(serialize_design(d));

  const bool all = a.mode == "all";
  const double xi = xi_of(d.rho, d.beta, d.gamma, d.alpha);
  const Matrix M = sys.A - d.L * sys.C;
  if (all || a.mode == "corollary1") {
    rep.results["corollary1"] = to_json(check_corollary1(sys.A, sys.C, d.L, d.lambda, d.alpha, d.rho, d.beta, d.gamma));
  }
  if (all || a.mode == "theorem1" || a.mode == "lyapunov") {
    if (sys.n() < 2 || !(d.lambda > 0.0 && d.lambda < 1.0)) {
      rep.warnings.push_back("P = diag(1/lambda, 1, ...) needs n >= 2 and 0 < lambda < 1; using P = I");
    }
    const Matrix P = design_P(d.lambda, sys.n());
    if (all || a.mode == "theorem1") {
      const Matrix Q = -(M.transpose() * P + P * M);
      Json thm = to_json(check_theorem1(sys.A, sys.C, d.L, P, Q, d.alpha, d.rho, d.beta, d.gamma));
      thm["P"] = to_json(P);
      thm["Q"] = to_json(Q);
      rep.results["theorem1"] = thm;
    }
    rep.results["lyapunov"] = {{"value", lyapunov_certificate(sys.A, sys.C, d.L, d.alpha, xi, P)},
                               {"xi", xi},
                               {"P", to_json(P)},
                               {"negative_certifies", true},
                               {"provenance", "closed-form"}};
  }
  if (all || a.mode == "identity") {
    rep.results["identity_P"] = to_json(identity_P_analysis(sys.A, sys.C, d.L, d.rho));
  }
  if (rep.results.empty()) {
    throw Error(ErrorCode::PreconditionViolated,
                "unknown --mode '" + a.mode + "' (all | theorem1 | corollary1 | lyapunov | identity)");
  }
  return rep;
}

struct SimulateArgs {
  SystemSource src;
  std::string design_file;
  std::vector<double> x0;
  std::vector<double> xhat0;
  double t1 = 30.0;
  double h = 1e-3;
  std::string method = "rk4";
  std::string out_file;
};

RunReport cmd_simulate(const SimulateArgs& a) {
  if (!(a.h > 0.0)) throw Error(ErrorCode::PreconditionViolated, "--h must be > 0");
  if (!(a.t1 > 0.0)) throw Error(ErrorCode::PreconditionViolated, "--t1 must be > 0");
  const Method method = parse_method(a.method);
  const DynamicalSystem sys = load_system(a.src);
  const DesignFile d = parse_design(read_file(a.design_file));
  const Vector x0 = cycled(a.x0, {0.3, 0.4}, sys.n());
  const Vector xhat0 = cycled(a.xhat0, {-0.5, 0.2}, sys.n());
  const Matrix P = design_P(d.lambda, sys.n());

  RunReport rep;
  rep.command = "simulate";
  rep.inputs = {{"source", source_json(a.src)}, {"design_file", a.design_file}, {"x0", to_json(x0)},
                {"xhat0", to_json(xhat0)},      {"t1", a.t1},                   {"h", a.h},
                {"method", a.method}};
  rep.inputs["out"] = a.out_file.empty() ? Json(nullptr) : Json(a.out_file);
  if (!sys.region.contains(x0) || !sys.region.contains(xhat0)) {
    rep.warnings.push_back("initial state lies outside the system region");
  }
  const SimulationTrace trace = simulate_observer(sys, d.L, x0, xhat0, nullptr, a.t1, a.h, method, P);
  for (const auto& w : trace.warnings) rep.warnings.push_back(w);
  rep.results["metrics"] = to_json(error_metrics(trace));
  rep.results["samples"] = trace.size();
  rep.results["left_region"] = trace.left_region;
  rep.results["P"] = to_json(P);
  if (!a.out_file.empty()) {
    std::ofstream f(a.out_file);
    if (!f) throw Error(ErrorCode::PreconditionViolated, "cannot write '" + a.out_file + "'");
    write_csv(f, trace);
    rep.results["trace_file"] = a.out_file;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Reproduction

struct Row {
  std::string name;
  Json toolkit;
  Json published;
  std::string tolerance;
  std::string status;
};

std::string verdict(bool ok) { return ok ? "match" : "mismatch"; }

}  // namespace

RunReport reproduce_example3(std::size_t pairs, std::uint64_t seed, bool& all_match) {
  constexpr double kBeta = -200.0, kGamma = -141.0, kAlpha = 70.6, kRho = 0.0;
  constexpr double kPublishedLambda = 0.999892;
  const DynamicalSystem sys = builtin("example3");
  std::vector<Row> rows;

  const double r = qib_region_radius(kBeta, kGamma);
  rows.push_back({"region_radius", r, 5.9372, "1e-3", verdict(std::abs(r - 5.9372) <= 1e-3)});

  const double xi = xi_of(kRho, kBeta, kGamma, kAlpha);
  rows.push_back({"xi", xi, -199.0, "1e-12", verdict(std::abs(xi + 199.0) <= 1e-12)});

  const ObserverDesign d = design_observer(sys.A, sys.C, kRho, kBeta, kGamma, kAlpha);
  Vector published_L(2);
  published_L << -1.0, 1.0;
  rows.push_back({"gain_L", to_json(Vector(d.L.col(0))), to_json(published_L), "1e-12",
                  verdict((d.L.col(0) - published_L).cwiseAbs().maxCoeff() <= 1e-12)});

  Matrix published_M(2, 2);
  published_M << 1, 0, 1, 0;
  const Matrix M = sys.A - d.L * sys.C;
  rows.push_back({"closed_loop_A_minus_LC", to_json(M), to_json(published_M), "1e-12",
                  verdict((M - published_M).cwiseAbs().maxCoeff() <= 1e-12)});
  rows.push_back({"sigma_star", d.sigma_star, spectral_norm(published_M), "1e-12",
                  verdict(std::abs(d.sigma_star - std::sqrt(2.0)) <= 1e-12)});

  rows.push_back({"lambda_window", Json::array({d.window.lambda_low, d.window.lambda_high}), kPublishedLambda,
                  "contains", verdict(d.window.contains(kPublishedLambda))});

  const Corollary1Report cor = check_corollary1(sys.A, sys.C, d.L, kPublishedLambda, kAlpha, kRho, kBeta, kGamma);
  rows.push_back({"corollary1_at_published_lambda", cor.overall, true, "exact", verdict(cor.overall)});

  const Matrix P = construct_P(kPublishedLambda, 2);
  const double lyap = lyapunov_certificate(sys.A, sys.C, d.L, kAlpha, xi, P);
  rows.push_back({"lyapunov_scalar", lyap, -0.4187, "1e-3", verdict(std::abs(lyap + 0.4187) <= 1e-3)});

  const IdentityPAnalysis idp = identity_P_analysis(sys.A, sys.C, d.L, kRho);
  rows.push_back({"A_minus_LC_unstable", idp.max_real_eig, "unstable (max Re eig >= 0)", "sign",
                  verdict(idp.max_real_eig >= 0.0 && !idp.sufficient)});

  const SamplePlan plan = SamplePlan::random(pairs, seed);
  const ConstantEstimate osl = estimate_osl(sys, sys.region, plan);
  rows.push_back({"one_sided_lipschitz_rho", osl.value, 0.0, "[-1e-3, 1e-9]",
                  verdict(osl.value >= -1e-3 && osl.value <= 1e-9)});
  const ConstantEstimate lip = estimate_lipschitz(sys, sys.region, plan);
  rows.push_back({"lipschitz_l", lip.value, 105.75, "2%", verdict(std::abs(lip.value - 105.75) <= 0.02 * 105.75)});

  const QibViolationReport qib = verify_qib(sys, kBeta, kGamma, sys.region, plan);
  rows.push_back({"qib_pair_violations", qib.violations, 0, "exact", verdict(qib.violations == 0)});

  rows.push_back({"max_admissible_rho", max_admissible_rho(sys.A, sys.C, kBeta, kGamma, kAlpha), nullptr, "-", "info"});

  // A Hurwitz gain (poles -1, -2) for the classical Lipschitz-observer baseline.
  Matrix L_stable(2, 1);
  L_stable << 5.0, 5.0;
  const Matrix M_stable = sys.A - L_stable * sys.C;
  const Matrix Q = Matrix::Identity(2, 2);
  const Matrix P_stable = solve_lyapunov(M_stable, Q);
  const double classical = conservative_lipschitz_margin(sys.A, sys.C, L_stable, P_stable, Q, 105.75);
  rows.push_back({"classical_lipschitz_margin_at_l_105.75", classical, "negative", "sign", verdict(classical < 0.0)});

  rows.push_back({"lipschitz_context l=1.0324", nullptr, 1.0324, "-", "literature, not reproduced"});

  all_match = true;
  Json table = Json::array();
  for (const auto& row : rows) {
    if (row.status == "mismatch") all_match = false;
    table.push_back({{"name", row.name},
                     {"toolkit", row.toolkit},
                     {"published", row.published},
                     {"tolerance", row.tolerance},
                     {"status", row.status}});
  }

  RunReport rep;
  rep.command = "reproduce";
  rep.inputs = {{"example", "example3"}, {"pairs", pairs}, {"seed", seed}};
  rep.results["rows"] = table;
  rep.results["design"] = to_json(d);
  rep.results["all_match"] = all_match;
  rep.results["caveat"] = kRegionCaveat;
  return rep;
}

namespace {

std::string reproduce_table(const RunReport& rep) {
  std::ostringstream out;
  out << std::left << std::setw(42) << "quantity" << std::setw(34) << "toolkit" << std::setw(30) << "published"
      << std::setw(16) << "tolerance"
      << "status\n";
  for (const auto& row : rep.results.at("rows")) {
    auto text = [](const Json& v) {
      if (v.is_null()) return std::string("-");
      if (v.is_string()) return v.get<std::string>();
      return v.dump();
    };
    out << std::setw(42) << row.at("name").get<std::string>() << std::setw(34) << text(row.at("toolkit"))
        << std::setw(30) << text(row.at("published")) << std::setw(16) << row.at("tolerance").get<std::string>()
        << row.at("status").get<std::string>() << '\n';
  }
  return out.str();
}

int exit_code_for(ErrorCode code, const std::string& command) {
  if (command == "estimate" &&
      (code == ErrorCode::InfeasibleSamples || code == ErrorCode::Unbounded || code == ErrorCode::EmptyRegion)) {
    return kExitEstimation;
  }
  if (code == ErrorCode::StructurallyInfeasible) return kExitStructural;
  if (code == ErrorCode::NoFeasibleAlpha) return kExitNoAlpha;
  if (code == ErrorCode::NewtonDivergence || code == ErrorCode::NonFiniteState) return kExitIntegration;
  return kExitInput;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Observer design and certification for one-sided Lipschitz systems", "oslobs"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  bool as_json = false;

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate Lipschitz, one-sided Lipschitz and QIB constants");
  add_source_options(c_est, est.src);
  c_est->add_option("--pairs", est.pairs, "Sample pairs")->check(CLI::Range(std::size_t{100}, std::size_t{100000000}));
  c_est->add_option("--seed", est.seed, "Random seed");
  c_est->add_option("--grid", est.grid, "Grid sampling with this many points per axis");
  c_est->add_option("--alpha", est.alpha, "alpha used by the QIB objective")->check(CLI::PositiveNumber);
  c_est->add_flag("--json", as_json, "Emit JSON");

  SynthesizeArgs syn;
  auto* c_syn = app.add_subcommand("synthesize", "Design the observer gain");
  add_source_options(c_syn, syn.src);
  c_syn->add_option("--rho", syn.rho, "One-sided Lipschitz constant")->required();
  c_syn->add_option("--beta", syn.beta, "QIB beta")->required();
  c_syn->add_option("--gamma", syn.gamma, "QIB gamma")->required();
  c_syn->add_option("--alpha", syn.alpha, "alpha (automatic when omitted)");
  c_syn->add_option("--out", syn.out_file, "Write the design file here");
  c_syn->add_flag("--json", as_json, "Emit JSON");

  AnalyzeArgs ana;
  auto* c_ana = app.add_subcommand("analyze", "Check certificates for a design");
  add_source_options(c_ana, ana.src);
  c_ana->add_option("--design", ana.design_file, "Design JSON file")->required();
  c_ana->add_option("--mode", ana.mode, "all | theorem1 | corollary1 | lyapunov | identity");
  c_ana->add_flag("--json", as_json, "Emit JSON");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate plant and observer");
  c_sim->set_help_flag("--help", "Print this help message and exit");
  add_source_options(c_sim, sim.src);
  c_sim->add_option("--design", sim.design_file, "Design JSON file")->required();
  c_sim->add_option("--x0", sim.x0, "Initial plant state");
  c_sim->add_option("--xhat0", sim.xhat0, "Initial observer state");
  c_sim->add_option("--t1", sim.t1, "Final time");
  c_sim->add_option("--h", sim.h, "Step size");
  c_sim->add_option("--method", sim.method, "rk4 | implicit_euler");
  c_sim->add_option("--out", sim.out_file, "CSV trace file");
  c_sim->add_flag("--json", as_json, "Emit JSON");

  std::string example = "example3";
  std::size_t rep_pairs = 20000;
  std::uint64_t rep_seed = 42;
  auto* c_rep = app.add_subcommand("reproduce", "Reproduce the published numbers of the planar example");
  c_rep->add_option("example", example, "Only example3 is available");
  c_rep->add_option("--pairs", rep_pairs, "Sample pairs for the constant estimates");
  c_rep->add_option("--seed", rep_seed, "Random seed");
  c_rep->add_flag("--json", as_json, "Emit JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "estimate") {
      try {
        emit(cmd_estimate(est), as_json, out, err);
      } catch (const EstimationFailure& failed) {
        emit(failed.report, as_json, out, err);
        err << "error: estimation infeasible: " << failed.reason << '\n';
        return kExitEstimation;
      }
    } else if (command == "synthesize") {
      emit(cmd_synthesize(syn), as_json, out, err);
    } else if (command == "analyze") {
      emit(cmd_analyze(ana), as_json, out, err);
    } else if (command == "simulate") {
      emit(cmd_simulate(sim), as_json, out, err);
    } else if (command == "reproduce") {
      if (example != "example3") throw Error(ErrorCode::UnknownBuiltin, "reproduce supports only example3");
      bool all_match = false;
      const RunReport rep = reproduce_example3(rep_pairs, rep_seed, all_match);
      if (as_json) {
        out << rep.to_json().dump(2) << '\n';
      } else {
        out << reproduce_table(rep);
      }
      return all_match ? kExitOk : kExitMismatch;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code(), command);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace oslobs
