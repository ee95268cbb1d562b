#pragma once

// JSON views of the domain objects and the CLI run report.

#include <string>
#include <vector>

#include "json.hpp"
#include "oslobs/constants.hpp"
#include "oslobs/simulate.hpp"
#include "oslobs/synthesis.hpp"

namespace oslobs {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Json to_json(const Region& r);
Json to_json(const Witness& w);
Json to_json(const ConstantEstimate& e);
Json to_json(const RegularityEstimate& e);
Json to_json(const FeasibilityWindow& w);
Json to_json(const CertificateReport& r);
Json to_json(const Corollary1Report& r);
Json to_json(const ObserverDesign& d);
Json to_json(const IdentityPAnalysis& a);
Json to_json(const ErrorMetrics& m);

/// Design file: {"L": [[...]], "alpha", "lambda", "rho", "beta", "gamma"}.
struct DesignFile {
  Matrix L;
  double alpha = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

DesignFile parse_design(const std::string& json_text);
std::string serialize_design(const DesignFile& d);
DesignFile design_file_of(const ObserverDesign& d);

struct RunReport {
  std::string command;
  Json inputs = Json::object();
  Json results = Json::object();
  std::vector<std::string> warnings;
  std::string version = kVersion;

  Json to_json() const;
  /// Flat "path  value" lines for terminal use.
  std::string to_table() const;
};

/// Structure of a JSON value with every leaf replaced by its type name;
/// arrays collapse to their first element. Used to pin report schemas.
Json json_skeleton(const Json& value);

}  // namespace oslobs
