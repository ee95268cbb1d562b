#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "oslobs/cli.hpp"
#include "oslobs/report.hpp"

using namespace oslobs;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oslobs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // The published design: lambda = 0.999892 rather than the window midpoint.
  std::string published_design(double lambda = 0.999892) const {
    DesignFile d;
    d.L = (Matrix(2, 1) << -1, 1).finished();
    d.alpha = 70.6;
    d.lambda = lambda;
    d.rho = 0.0;
    d.beta = -200.0;
    d.gamma = -141.0;
    const std::string p = path("design_" + std::to_string(lambda) + ".json");
    std::ofstream(p) << serialize_design(d);
    return p;
  }

  fs::path dir_;
};

// Pins the report structure; regenerate with OSLOBS_UPDATE_GOLDEN=1.
void expect_golden(const std::string& name, const Json& report) {
  const Json skeleton = json_skeleton(report);
  const fs::path file = fs::path(OSLOBS_GOLDEN_DIR) / (name + ".json");
  if (std::getenv("OSLOBS_UPDATE_GOLDEN")) {
    std::ofstream(file) << skeleton.dump(2) << '\n';
    return;
  }
  std::ifstream in(file);
  ASSERT_TRUE(in) << "missing golden file " << file;
  EXPECT_EQ(skeleton, Json::parse(in)) << "report structure changed: " << name;
}

}  // namespace

TEST_F(Cli, EstimateExample3) {
  const CliRun r = run({"estimate", "--builtin", "example3", "--radius", "5.9372", "--pairs", "20000", "--seed", "7",
                     "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_NEAR(j["results"]["rho"]["value"].get<double>(), 0.0, 1e-3);
  EXPECT_EQ(j["inputs"]["seed"].get<int>(), 7);
  expect_golden("estimate", j);
}

TEST_F(Cli, EstimateExample2Box) {
  const CliRun r = run({"estimate", "--builtin", "example2", "--box", "-1", "1", "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(r.json()["results"]["rho"]["value"].get<double>(), -0.5, 1e-3);
  EXPECT_EQ(r.json()["inputs"]["seed"].get<int>(), 42);
}

TEST_F(Cli, HumanTableByDefault) {
  const CliRun r = run({"estimate", "--builtin", "example1", "--pairs", "1000"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_FALSE(Json::accept(r.out));
  EXPECT_NE(r.out.find("rho"), std::string::npos);
}

TEST_F(Cli, MissingSystemFile) {
  const std::string missing = path("nope.json");
  const CliRun r = run({"estimate", "--system", missing});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, SynthesizeExample3) {
  const std::string out = path("d.json");
  const CliRun r = run({"synthesize", "--builtin", "example3", "--rho", "0", "--beta", "-200", "--gamma", "-141",
                     "--alpha", "70.6", "--out", out, "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_DOUBLE_EQ(j["results"]["design"]["L"][0][0].get<double>(), -1.0);
  EXPECT_DOUBLE_EQ(j["results"]["design"]["L"][1][0].get<double>(), 1.0);
  expect_golden("synthesize", j);

  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  const DesignFile d = parse_design(ss.str());
  EXPECT_DOUBLE_EQ(d.alpha, 70.6);
  EXPECT_GT(d.lambda, 0.999799);
}

TEST_F(Cli, SynthesizeStructurallyInfeasible) {
  const CliRun r = run({"synthesize", "--builtin", "example3", "--rho", "0", "--beta", "0", "--gamma", "-1"});
  EXPECT_EQ(r.code, kExitStructural);
}

TEST_F(Cli, SynthesizeNoAlpha) {
  const CliRun r =
      run({"synthesize", "--builtin", "example3", "--rho", "0", "--beta", "-200", "--gamma", "-141", "--alpha", "70"});
  EXPECT_EQ(r.code, kExitNoAlpha);
}

TEST_F(Cli, SynthesizeDefaultAlpha) {
  const CliRun r =
      run({"synthesize", "--builtin", "example3", "--rho", "0", "--beta", "-5", "--gamma", "-1", "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_DOUBLE_EQ(r.json()["results"]["design"]["alpha"].get<double>(), 1.0);
  EXPECT_EQ(r.json()["results"]["design"]["alpha_policy"], "alpha_one");
}

TEST_F(Cli, AnalyzePublishedDesign) {
  const CliRun r = run({"analyze", "--builtin", "example3", "--design", published_design(), "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_NEAR(j["results"]["lyapunov"]["value"].get<double>(), -0.4187, 1e-3);
  EXPECT_TRUE(j["results"]["corollary1"]["overall"].get<bool>());
  EXPECT_FALSE(j["results"]["identity_P"]["sufficient"].get<bool>());
  expect_golden("analyze", j);
}

TEST_F(Cli, AnalyzeIdentityMode) {
  const CliRun r =
      run({"analyze", "--builtin", "example3", "--design", published_design(), "--mode", "identity", "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_FALSE(j["results"]["identity_P"]["sufficient"].get<bool>());
  EXPECT_FALSE(j["results"].contains("corollary1"));
}

TEST_F(Cli, AnalyzeTamperedLambda) {
  const CliRun r = run({"analyze", "--builtin", "example3", "--design", published_design(0.5), "--mode", "corollary1",
                     "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json cor = r.json()["results"]["corollary1"];
  EXPECT_FALSE(cor["overall"].get<bool>());
  bool seen = false;
  for (const Json& ineq : cor["inequalities"]) {
    if (ineq["label"] == "cor1.lambda") {
      seen = true;
      EXPECT_LT(ineq["margin"].get<double>(), 0.0);
    }
  }
  EXPECT_TRUE(seen);
}

TEST_F(Cli, SimulateExample3) {
  const std::string csv = path("trace.csv");
  const CliRun r = run({"simulate", "--builtin", "example3", "--design", published_design(), "--out", csv, "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_LE(j["results"]["metrics"]["ratio"].get<double>(), 1e-3);
  EXPECT_EQ(j["results"]["samples"].get<int>(), 30001);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x1,x2,xhat1,xhat2,err_norm,V");
  expect_golden("simulate", j);
}

TEST_F(Cli, SimulateStiffImplicitEuler) {
  DesignFile d;
  d.L = Matrix::Zero(1, 1);
  d.alpha = 1.0;
  d.lambda = 0.5;
  d.beta = -1.0;
  const std::string design = path("d1.json");
  std::ofstream(design) << serialize_design(d);
  const CliRun r = run({"simulate", "--builtin", "example1", "--radius", "20", "--design", design, "--x0", "10",
                     "--xhat0", "10", "--h", "0.25", "--t1", "5", "--method", "implicit_euler", "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const CliRun bad = run({"simulate", "--builtin", "example1", "--radius", "20", "--design", design, "--x0", "10",
                       "--xhat0", "10", "--h", "0.25", "--t1", "5", "--method", "rk4"});
  EXPECT_EQ(bad.code, kExitIntegration);
}

TEST_F(Cli, SimulateNegativeStep) {
  const CliRun r = run({"simulate", "--builtin", "example3", "--design", published_design(), "--h", "-1"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("--h"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({"estimate"}).code, kExitInput);
  EXPECT_EQ(run({"estimate", "--builtin", "example3", "--system", "x.json"}).code, kExitInput);
  EXPECT_EQ(run({"estimate", "--builtin", "nope"}).code, kExitInput);
  EXPECT_EQ(run({"frobnicate"}).code, kExitInput);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(Cli, Reproduce) {
  const CliRun r = run({"reproduce", "example3", "--pairs", "2000", "--json"});
  // The published QIB pair is violated near the origin, so the run reports a mismatch.
  EXPECT_EQ(r.code, kExitMismatch) << r.err;
  const Json j = r.json();
  std::map<std::string, std::string> status;
  for (const Json& row : j["results"]["rows"]) status[row["name"]] = row["status"];
  EXPECT_EQ(status["gain_L"], "match");
  EXPECT_EQ(status["lyapunov_scalar"], "match");
  EXPECT_EQ(status["region_radius"], "match");
  EXPECT_EQ(status["lambda_window"], "match");
  EXPECT_EQ(status["qib_pair_violations"], "mismatch");
  EXPECT_EQ(status["max_admissible_rho"], "info");
  expect_golden("reproduce", j);
}
