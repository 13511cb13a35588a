#include "coshfit/cli.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Outcome r;
  r.code = coshfit::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

nlohmann::json run_json(std::vector<std::string> args) {
  args.push_back("--json");
  args.push_back("-");
  const Outcome r = run(args);
  EXPECT_EQ(r.code, 0) << r.err;
  return nlohmann::json::parse(r.out);
}

std::string swiss_path() { return std::string(COSHFIT_DATA_DIR) + "/swiss.csv"; }

}  // namespace

TEST(Cli, DistValues) {
  const auto j = run_json({"dist", "--kind", "cosh", "--at", "0"});
  EXPECT_EQ(j["command"], "dist");
  EXPECT_EQ(j["schema_version"], "1");
  EXPECT_NEAR(j["results"]["pdf"].get<double>(), 1.0 / 3.141592653589793, 1e-15);
  EXPECT_DOUBLE_EQ(j["results"]["cdf"].get<double>(), 0.5);

  const auto k = run_json({"dist", "--kind", "skewed", "--tau", "0.25", "--kappa"});
  EXPECT_NEAR(k["results"]["kappa"].get<double>(), 3.400435385, 1e-8);

  const auto m = run_json({"dist", "--kind", "cauchy", "--moments"});
  EXPECT_EQ(m["results"]["mean"], "undefined");
  EXPECT_EQ(m["results"]["variance"], "undefined");

  const auto v = run_json({"dist", "--kind", "cosh", "--sigma", "2", "--moments", "--fisher"});
  EXPECT_NEAR(v["results"]["variance"].get<double>(), 3.141592653589793 * 3.141592653589793, 1e-12);
  EXPECT_NEAR(v["results"]["fisher_information"].get<double>(), 0.125, 1e-12);
}

TEST(Cli, DistTextOutput) {
  const Outcome r = run({"dist", "--kind", "cosh", "--inv", "0.5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("== dist =="), std::string::npos);
  EXPECT_NE(r.out.find("inv_cdf"), std::string::npos);
}

TEST(Cli, SamplesAreDeterministic) {
  const Outcome a = run({"dist", "--sample", "20", "--seed", "3", "--json", "-"});
  const Outcome b = run({"dist", "--sample", "20", "--seed", "3", "--json", "-"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(run({"dist", "--sample", "20"}).code, coshfit::cli::kExitUsage);
}

TEST(Cli, FitLocationAndRegression) {
  const auto loc = run_json({"fit", "--data", "location25", "--loss", "logcosh"});
  EXPECT_NEAR(loc["results"]["coefficients"]["theta"].get<double>(), -0.069974, 1e-5);
  EXPECT_TRUE(loc["results"]["converged"].get<bool>());

  const auto tel = run_json({"fit", "--data", "telephone", "--loss", "l2"});
  EXPECT_NEAR(tel["results"]["coefficients"]["year"].get<double>(), 0.50415, 1e-4);

  const auto swiss = run_json({"fit", "--data", swiss_path(), "--response", "Fertility", "--loss", "huber",
                               "--huber-scale", "mad"});
  EXPECT_EQ(swiss["results"]["coefficients"].size(), 6u);
  EXPECT_TRUE(swiss["results"]["coefficients"].contains("IM"));
}

TEST(Cli, FitIterationLimitExitsTwo) {
  const Outcome r = run({"fit", "--data", "telephone", "--loss", "logcosh", "--max-iter", "1"});
  EXPECT_EQ(r.code, coshfit::cli::kExitNotConverged);
  EXPECT_NE(r.err.find("did not converge"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({"fit", "--data", "nope"}).code, coshfit::cli::kExitUsage);
  EXPECT_EQ(run({"fit", "--data", swiss_path()}).code, coshfit::cli::kExitUsage);
  EXPECT_EQ(run({"fit", "--data", "telephone", "--loss", "l1"}).code, coshfit::cli::kExitUsage);
  EXPECT_EQ(run({"dist", "--kind", "cosh", "--sigma", "-1", "--at", "0"}).code, coshfit::cli::kExitUsage);
  EXPECT_EQ(run({"dist", "--inv", "1.5"}).code, coshfit::cli::kExitUsage);
  EXPECT_EQ(run({"bootstrap", "--data", "location25", "--reps", "0", "--seed", "1"}).code,
            coshfit::cli::kExitUsage);
  EXPECT_EQ(run({"bootstrap", "--data", "location25", "--reps", "10"}).code, coshfit::cli::kExitUsage);
  EXPECT_EQ(run({"nonsense"}).code, coshfit::cli::kExitUsage);

  const Outcome taus = run({"quantile", "--data", "telephone", "--taus", "0.9,0.1"});
  EXPECT_EQ(taus.code, coshfit::cli::kExitUsage);
  EXPECT_NE(taus.err.find("strictly increasing"), std::string::npos);
  EXPECT_EQ(run({"quantile", "--data", "telephone", "--taus", ""}).code, coshfit::cli::kExitUsage);
}

TEST(Cli, HelpExitsZero) {
  const Outcome r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("bootstrap"), std::string::npos);
}

TEST(Cli, QuantileAudit) {
  const auto j = run_json({"quantile", "--data", swiss_path(), "--response", "Fertility", "--audit"});
  EXPECT_EQ(j["results"]["audit"]["violations"].get<int>(), 0);
}

TEST(Cli, BootstrapIsByteIdentical) {
  const std::vector<std::string> args{"bootstrap", "--data", "telephone", "--loss", "logcosh",
                                      "--reps", "50", "--seed", "9", "--json", "-"};
  const Outcome a = run(args);
  const Outcome b = run(args);
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);

  const auto p = run_json({"bootstrap", "--parametric", "--theta", "1", "--sigma", "2", "--n", "50", "--reps",
                           "40", "--seed", "4"});
  EXPECT_EQ(p["results"]["replicates"].get<int>(), 40);
  EXPECT_DOUBLE_EQ(p["results"]["n_var_analytic"].get<double>(), 8.0);

  const auto resid = run_json({"bootstrap", "--data", "telephone", "--loss", "huber", "--delta", "0.1",
                               "--reps", "30", "--seed", "2", "--resample", "residuals"});
  EXPECT_TRUE(resid["results"]["components"].contains("year"));
}

TEST(Cli, GofReport) {
  const auto j = run_json({"gof", "--data", "telephone", "--fit-loss", "l2", "--dist", "cosh"});
  const double d = j["results"]["D"].get<double>();
  EXPECT_GT(d, 0.0);
  EXPECT_LT(d, 1.0);
  EXPECT_EQ(j["results"]["n"].get<int>(), 24);
}

TEST(Cli, PlotdataWritesCsv) {
  const Outcome r = run({"plotdata", "--figure", "loss-curves", "--points", "11"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("x,value,series\n", 0), 0u);

  const auto path = std::filesystem::temp_directory_path() / "coshfit_test_plot.csv";
  const auto j = run_json({"plotdata", "--figure", "qq", "--n", "30", "--seed", "1", "--out", path.string()});
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x,value,series");
  EXPECT_GT(j["results"]["rows"].get<int>(), 0);
}

TEST(Cli, UnwritablePathExitsOne) {
  EXPECT_EQ(run({"plotdata", "--figure", "pdfs", "--out", "/nonexistent/dir/p.csv"}).code,
            coshfit::cli::kExitUsage);
  EXPECT_EQ(run({"dist", "--at", "0", "--json", "/nonexistent/dir/r.json"}).code, coshfit::cli::kExitUsage);
}
