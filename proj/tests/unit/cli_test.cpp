#include <sys/wait.h>

#include <cstdlib>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support.hpp"
#include "travkit/cli.hpp"

namespace travkit {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "travkit");
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = run_cli(args);
  return {code, ::testing::internal::GetCapturedStdout(), ::testing::internal::GetCapturedStderr()};
}

// The installed binary, for exit-status checks through a real process.
int binary(const std::string& args) {
  const std::string cmd = std::string(TRAVKIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("travkit-cli");
    ASSERT_EQ(cli({"simulate-fixtures", "--out", dir_->path().string(), "--frames", "6"}).code, 0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string p(const std::string& rel) { return (dir_->path() / rel).string(); }
  static std::vector<std::string> annotate(const std::string& out) {
    return {"annotate", "--frames", p("frames"), "--trajectory", p("trajectory.txt"), "--camera", p("camera.json"),
            "--policy", p("policy.json"), "--fixture-masks", p("fixtures"), "--out", out};
  }
  static testing::TempDir* dir_;
};
testing::TempDir* Cli::dir_ = nullptr;

TEST_F(Cli, EvaluateIdenticalDirectories) {
  const CliRun r = cli({"evaluate", "--pred", p("gt"), "--gt", p("gt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["iou"].get<double>(), 1.0);
}

TEST_F(Cli, AnnotateIsReproducible) {
  testing::TempDir a, b;
  const CliRun ra = cli(annotate(a.path().string()));
  ASSERT_EQ(ra.code, 0) << ra.err;
  EXPECT_NE(ra.out.find("tuples 6, skipped 0"), std::string::npos) << ra.out;
  auto args = annotate(b.path().string());
  args.insert(args.end(), {"--jobs", "3"});
  ASSERT_EQ(cli(args).code, 0);
  EXPECT_EQ(testing::read_file(a / "manifest.json"), testing::read_file(b / "manifest.json"));
  for (int i = 0; i < 6; ++i) {
    const std::string name = "labels/00000" + std::to_string(i) + ".png";
    EXPECT_EQ(testing::read_file(a / name), testing::read_file(b / name));
  }
  const CliRun e = cli({"evaluate", "--pred", (a / "labels").string(), "--gt", p("gt")});
  ASSERT_EQ(e.code, 0);
  EXPECT_GE(nlohmann::json::parse(e.out)["iou"].get<double>(), 0.99);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  const CliRun r = cli({"evaluate", "--pred", p("gt"), "--gt", p("gt"), "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE((r.out + r.err).find("--pred"), std::string::npos);
  EXPECT_EQ(cli({"evaluate", "--pred", p("gt")}).code, 2);
  EXPECT_EQ(cli({"plan", "--map", p("corridor.map"), "--start", "1,2,3,4", "--goal", "6,5", "--out", p("x.json")}).code, 2);
  // Annotate needs exactly one adapter source.
  auto args = annotate(p("none"));
  args.erase(args.end() - 4, args.end() - 2);
  EXPECT_EQ(cli(args).code, 2);
  EXPECT_EQ(binary("frobnicate"), 2);
  EXPECT_EQ(binary("--help"), 0);
}

TEST_F(Cli, DomainErrorsExitOne) {
  testing::TempDir out;
  EXPECT_EQ(cli({"evaluate", "--pred", out.path().string(), "--gt", p("gt")}).code, 1);
  EXPECT_EQ(cli({"plan", "--map", p("missing.map"), "--start", "2,5", "--goal", "6,5", "--out", (out / "p.json").string()}).code, 1);
  // Goal outside the map cannot be planned to.
  const CliRun r = cli({"plan", "--map", p("corridor.map"), "--start", "2,5", "--goal", "60,5", "--out", (out / "p.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(binary("evaluate --pred " + out.path().string() + " --gt " + p("gt")), 1);
}

TEST_F(Cli, PlanOnCorridor) {
  testing::TempDir out;
  const CliRun r = cli({"plan", "--map", p("corridor.map"), "--start", "2,5,0", "--goal", "6,5", "--out",
                     (out / "path.json").string(), "--overlay", (out / "path.png").string(), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(testing::read_file(out / "path.json"));
  EXPECT_FALSE(j.empty());
  EXPECT_TRUE(fs::exists(out / "path.png"));
}

TEST_F(Cli, MapFromSimulatedSequence) {
  testing::TempDir out;
  const CliRun r = cli({"map", "--depth", p("depth"), "--labels", p("gt"), "--trajectory", p("trajectory.txt"),
                     "--camera", p("camera.json"), "--out", (out / "m.map").string(), "--overlay",
                     (out / "m.png").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "m.map"));
  EXPECT_TRUE(fs::exists(out / "m.png"));
}

}  // namespace
}  // namespace travkit
