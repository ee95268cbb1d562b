#include "oslobs/report.hpp"

#include <charconv>
#include <sstream>

namespace oslobs {

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Region& r) {
  if (r.shape == Region::Shape::Ball) return {{"shape", "ball"}, {"dim", r.dim}, {"r", r.radius}};
  return {{"shape", "box"}, {"dim", r.dim}, {"lower", to_json(r.lower)}, {"upper", to_json(r.upper)}};
}

Json to_json(const Witness& w) {
  return {{"route", w.route}, {"value", w.value}, {"x1", to_json(w.x1)}, {"x2", to_json(w.x2)}};
}

Json to_json(const ConstantEstimate& e) {
  Json j = {{"value", e.value}, {"pairwise", e.pairwise}};
  j["jacobian"] = e.jacobian ? Json(*e.jacobian) : Json(nullptr);
  j["pairs"] = e.pairs;
  j["jacobian_points"] = e.jacobian_points;
  j["witness"] = to_json(e.witness);
  j["bound"] = "lower";
  j["provenance"] = "estimated";
  return j;
}

Json to_json(const RegularityEstimate& e) {
  Json j;
  j["lip"] = to_json(e.lip_detail);
  j["rho"] = to_json(e.rho_detail);
  Json qib = {{"alpha", e.alpha}, {"provenance", "estimated"}};
  if (e.qib_failure) {
    qib["beta"] = nullptr;
    qib["gamma"] = nullptr;
    qib["xi"] = nullptr;
    qib["failure"] = *e.qib_failure;
  } else {
    qib["beta"] = e.beta;
    qib["gamma"] = e.gamma;
    qib["xi"] = e.xi;
    qib["failure"] = nullptr;
  }
  j["qib"] = qib;
  j["region"] = to_json(e.region);
  j["samples"] = {{"pairs", e.pairs}, {"seed", e.seed}, {"method", e.method}};
  j["certification"] = "no violation found at " + std::to_string(e.pairs) + " samples";
  return j;
}

Json to_json(const FeasibilityWindow& w) {
  return {{"lambda_low", w.lambda_low}, {"lambda_high", w.lambda_high}, {"empty", w.empty}, {"provenance", "closed-form"}};
}

Json to_json(const CertificateReport& r) {
  Json ineq = Json::array();
  for (const auto& i : r.inequalities) ineq.push_back({{"label", i.label}, {"margin", i.margin}, {"holds", i.holds}});
  return {{"name", r.name},
          {"inequalities", ineq},
          {"overall", r.overall},
          {"caveat", r.caveat},
          {"provenance", "closed-form"}};
}

Json to_json(const Corollary1Report& r) {
  Json j = to_json(static_cast<const CertificateReport&>(r));
  j["block_route"] = r.block_route;
  j["schur_route"] = r.schur_route;
  return j;
}

Json to_json(const ObserverDesign& d) {
  return {{"L", to_json(d.L)},         {"alpha", d.alpha},
          {"alpha_policy", d.alpha_policy}, {"lambda", d.lambda},
          {"xi", d.xi},                {"sigma_star", d.sigma_star},
          {"rho", d.rho},              {"beta", d.beta},
          {"gamma", d.gamma},          {"window", to_json(d.window)},
          {"certificate", to_json(d.certificate)}, {"provenance", "closed-form"}};
}

Json to_json(const IdentityPAnalysis& a) {
  return {{"log_norm", a.log_norm},
          {"max_real_eig", a.max_real_eig},
          {"sufficient", a.sufficient},
          {"sufficient_margin", a.sufficient_margin},
          {"necessary", a.necessary},
          {"necessary_margin", a.necessary_margin},
          {"shift_feasible", a.shift_feasible},
          {"shift_margin", a.shift_margin},
          {"eigen_method", a.eigen_method},
          {"provenance", "closed-form"}};
}

Json to_json(const ErrorMetrics& m) {
  Json j = {{"initial_error", m.initial_error}, {"final_error", m.final_error}, {"ratio", m.ratio}};
  j["time_to_one_percent"] = m.time_to_one_percent ? Json(*m.time_to_one_percent) : Json(nullptr);
  j["max_lyapunov_increase"] = m.max_lyapunov_increase ? Json(*m.max_lyapunov_increase) : Json(nullptr);
  j["initial_lyapunov"] = m.initial_lyapunov ? Json(*m.initial_lyapunov) : Json(nullptr);
  j["provenance"] = "simulated";
  return j;
}

// ---------------------------------------------------------------------------
// Design files

namespace {

double design_real(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(ErrorCode::SchemaError, key);
  if (!doc.at(key).is_number()) throw Error(ErrorCode::SchemaError, std::string(key) + ": expected number");
  return doc.at(key).get<double>();
}

}  // namespace

DesignFile parse_design(const std::string& json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "design file must be an object");
  DesignFile d;
  if (!doc.contains("L")) throw Error(ErrorCode::SchemaError, "L");
  const Json& rows = doc.at("L");
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty()) {
    throw Error(ErrorCode::SchemaError, "L: expected non-empty array of rows");
  }
  d.L.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != rows[0].size()) {
      throw Error(ErrorCode::DimensionMismatch, "L rows must have equal length");
    }
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      if (!rows[i][k].is_number()) throw Error(ErrorCode::SchemaError, "L: expected numbers");
      d.L(i, k) = rows[i][k].get<double>();
    }
  }
  d.alpha = design_real(doc, "alpha");
  d.lambda = design_real(doc, "lambda");
  d.rho = design_real(doc, "rho");
  d.beta = design_real(doc, "beta");
  d.gamma = design_real(doc, "gamma");
  return d;
}

std::string serialize_design(const DesignFile& d) {
  Json doc = {{"L", to_json(d.L)}, {"alpha", d.alpha}, {"lambda", d.lambda},
              {"rho", d.rho},      {"beta", d.beta},   {"gamma", d.gamma}};
  return doc.dump(2);
}

DesignFile design_file_of(const ObserverDesign& d) { return {d.L, d.alpha, d.lambda, d.rho, d.beta, d.gamma}; }

// ---------------------------------------------------------------------------
// Run report

Json RunReport::to_json() const {
  return {{"command", command}, {"version", version}, {"inputs", inputs}, {"results", results}, {"warnings", warnings}};
}

namespace {

std::string scalar_text(const Json& v) {
  if (v.is_number_float()) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>(), std::chars_format::general, 10);
    return std::string(buf, res.ptr);
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool is_flat_numbers(const Json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v) {
    if (e.is_number()) continue;
    if (e.is_array()) {
      for (const auto& x : e)
        if (!x.is_number()) return false;
      continue;
    }
    return false;
  }
  return true;
}

void flatten(const Json& v, const std::string& path, std::ostringstream& out) {
  if (v.is_object()) {
    for (const auto& [k, child] : v.items()) flatten(child, path.empty() ? k : path + "." + k, out);
    return;
  }
  if (v.is_array() && !is_flat_numbers(v)) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "[" + std::to_string(i) + "]", out);
    return;
  }
  out << path << "  " << (v.is_array() ? v.dump() : scalar_text(v)) << '\n';
}

}  // namespace

std::string RunReport::to_table() const {
  std::ostringstream out;
  out << "command  " << command << "\nversion  " << version << '\n';
  flatten(inputs, "inputs", out);
  flatten(results, "results", out);
  return out.str();
}

Json json_skeleton(const Json& value) {
  if (value.is_object()) {
    Json out = Json::object();
    for (const auto& [k, child] : value.items()) out[k] = json_skeleton(child);
    return out;
  }
  if (value.is_array()) {
    Json out = Json::array();
    if (!value.empty()) out.push_back(json_skeleton(value[0]));
    return out;
  }
  if (value.is_number()) return "number";
  if (value.is_boolean()) return "boolean";
  if (value.is_string()) return "string";
  return "null";
}

}  // namespace oslobs
