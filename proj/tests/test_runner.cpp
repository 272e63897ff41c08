#include "georank/runner.hpp"
#include "georank/numerics.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace georank;
using nlohmann::json;

namespace {

ErrorCode run_code(const std::string& cmd, const std::string& cfg, const RunOptions& o = {}) {
  try {
    run_experiment(cmd, cfg, o);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

RunOptions quiet() {
  RunOptions o;
  o.timestamps = false;
  return o;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("georank_runner_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
            std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path / name) << text; }
};

const char* kDims = R"({"problem": {"type": "psd", "p": 5, "r": 2}})";

}  // namespace

TEST(Runner, DimsReportsLemmaCounts) {
  const RunResult res = run_experiment("dims", kDims, quiet());
  EXPECT_TRUE(res.all_pass);
  const json rep = json::parse(res.report);
  EXPECT_EQ(rep["schema"], "georank-report/1");
  bool saw = false;
  for (const auto& c : rep["checks"]) {
    EXPECT_EQ(c["dimension"], 9);
    EXPECT_EQ(c["basis_size"], 9);
    saw = saw || c["geometry"] == "psd-q1";
  }
  EXPECT_TRUE(saw);
  EXPECT_FALSE(rep.contains("generated_at"));
  EXPECT_FALSE(rep.contains("timings"));
}

TEST(Runner, GeneralDims) {
  const json rep = json::parse(
      run_experiment("dims", R"({"problem": {"type": "general", "p1": 4, "p2": 3, "r": 2}})", quiet()).report);
  for (const auto& c : rep["checks"]) EXPECT_EQ(c["dimension"], 10);
}

TEST(Runner, TimestampsOnlyWhenAsked) {
  RunOptions o;
  o.timestamps = true;
  const json rep = json::parse(run_experiment("dims", kDims, o).report);
  EXPECT_TRUE(rep.contains("generated_at"));
  EXPECT_TRUE(rep["timings"].contains("total_seconds"));
}

TEST(Runner, DeterministicAndSeedSensitive) {
  const std::string cfg = R"({"seed": 4, "trials": 2, "problem": {"type": "general", "p1": 4, "p2": 3, "r": 2}})";
  const std::string a = run_experiment("check-gradients", cfg, quiet()).report;
  const std::string b = run_experiment("check-gradients", cfg, quiet()).report;
  EXPECT_EQ(a, b);
  RunOptions o = quiet();
  o.seed = 5;
  const std::string c = run_experiment("check-gradients", cfg, o).report;
  EXPECT_NE(a, c);
  EXPECT_EQ(json::parse(c)["seed"], 5);
}

TEST(Runner, SandwichTwoGramRow) {
  const RunResult res = run_experiment(
      "verify-sandwich",
      R"({"seed": 9, "problem": {"type": "psd", "p": 5, "r": 2}, "geometries": ["psd-q1"], "metrics": ["2YtY"]})",
      quiet());
  EXPECT_TRUE(res.all_pass);
  const json rep = json::parse(res.report);
  ASSERT_EQ(rep["checks"].size(), 10u);  // C(5, 2) stationary truncations
  for (const auto& c : rep["checks"]) {
    EXPECT_EQ(c["alpha"], 1.0);
    EXPECT_EQ(c["beta"], 2.0);
    EXPECT_GE(c["min_margin"].get<double>(), -1e-8);
    EXPECT_EQ(c["eigenvalues_quotient"].size(), 9u);
    EXPECT_NE(c["coefficient_row"].get<std::string>().find("2YtY"), std::string::npos);
  }
  EXPECT_TRUE(rep.contains("notes"));
}

TEST(Runner, FailingChecksStillReport) {
  const RunResult res = run_experiment(
      "check-gradients",
      R"({"trials": 1, "problem": {"type": "psd", "p": 4, "r": 1}, "tolerances": {"gradient_fd": 1e-300}})", quiet());
  EXPECT_FALSE(res.all_pass);
  const json rep = json::parse(res.report);
  EXPECT_GT(rep["summary"]["failed"].get<int>(), 0);
}

TEST(Runner, ClassifyDiagonal) {
  const RunResult res =
      run_experiment("classify", R"({"problem": {"type": "psd", "diagonal": [3, 2, 1], "r": 1}})", quiet());
  EXPECT_TRUE(res.all_pass);
  const json rep = json::parse(res.report);
  ASSERT_EQ(rep["checks"].size(), 3u);
  EXPECT_EQ(rep["checks"][0]["expected"], "sosp");
  EXPECT_EQ(rep["checks"][1]["expected"], "strict-saddle");
}

TEST(Runner, ConfigErrors) {
  EXPECT_EQ(run_code("nope", kDims), ErrorCode::Variant);
  EXPECT_EQ(run_code("dims", "{not json"), ErrorCode::Parse);
  EXPECT_EQ(run_code("dims", R"({"problem": {"type": "psd", "p": 3, "r": 4}})"), ErrorCode::Dimension);
  EXPECT_EQ(run_code("dims", R"({"problem": {"type": "psd", "p": 3, "r": 1}, "metrics": ["RtR,LtL"]})"),
            ErrorCode::Enumeration);
  EXPECT_EQ(run_code("dims", R"({"problem": {"type": "psd", "p": 3, "r": 1}, "geometries": ["gen-q1"]})"),
            ErrorCode::Variant);
  EXPECT_EQ(run_code("dims", R"({"command": "classify", "problem": {"type": "psd", "p": 3, "r": 1}})"),
            ErrorCode::Parse);
  EXPECT_EQ(run_code("dims", R"({"problem": {"type": "psd", "p": 3, "r": 1}, "bogus": 1})"), ErrorCode::Parse);
  EXPECT_EQ(run_code("verify-sandwich", R"({"problem": {"kind": "sensing", "type": "psd", "p": 3, "r": 1}})"),
            ErrorCode::Precondition);
}

TEST(Runner, CsvTargets) {
  TempDir dir;
  dir.write("ok.csv", "4,1\n1,3\n");
  dir.write("bad.csv", "4,1\n1,zz\n");
  dir.write("ragged.csv", "4,1\n1\n");
  RunOptions o = quiet();
  o.base_dir = dir.path.string();
  const RunResult res =
      run_experiment("classify", R"({"problem": {"type": "psd", "target": "ok.csv", "r": 1}})", o);
  EXPECT_TRUE(res.all_pass);
  EXPECT_EQ(json::parse(res.report)["problem"]["p1"], 2);
  EXPECT_EQ(run_code("classify", R"({"problem": {"type": "psd", "target": "bad.csv", "r": 1}})", o), ErrorCode::Parse);
  EXPECT_EQ(run_code("classify", R"({"problem": {"type": "psd", "target": "ragged.csv", "r": 1}})", o),
            ErrorCode::Parse);
  EXPECT_EQ(run_code("classify", R"({"problem": {"type": "psd", "target": "missing.csv", "r": 1}})", o),
            ErrorCode::Io);
}

TEST(Runner, SyntheticRecipe) {
  // approx with the default target rank keeps the full Gaussian Gram target
  const json rep = json::parse(
      run_experiment("dims", R"({"seed": 2, "problem": {"type": "psd", "p": 4, "r": 1}})", quiet()).report);
  EXPECT_EQ(rep["problem"]["target"], "synthetic");
  EXPECT_EQ(rep["problem"]["target_rank"], 4);
}

TEST(Runner, BijectionAndFlow) {
  EXPECT_TRUE(run_experiment("bijection-roundtrip",
                             R"({"trials": 1, "vectors": 20, "problem": {"type": "general", "p1": 4, "p2": 3, "r": 2}})",
                             quiet())
                  .all_pass);
  const RunResult f = run_experiment(
      "flow-compare", R"({"problem": {"type": "psd", "p": 4, "r": 2}, "flow": {"T": 0.2, "dt": 0.01}})", quiet());
  EXPECT_TRUE(f.all_pass);
  const json rep = json::parse(f.report);
  ASSERT_EQ(rep["checks"].size(), 2u);
  EXPECT_EQ(rep["checks"][0]["relation"], "identical");
  EXPECT_EQ(rep["checks"][1]["relation"], "residual");
  EXPECT_GT(rep["checks"][1]["max_difference_field_norm"].get<double>(), 0.0);
}
