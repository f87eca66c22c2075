#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "strokeseg/pipeline.hpp"
#include "strokeseg/commands.hpp"

namespace fs = std::filesystem;
using strokeseg::cli::run;

namespace {

int call(std::vector<std::string> args) {
  args.insert(args.begin(), "strokeseg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "strokeseg_cli_test";
    fs::remove_all(dir_);
    ASSERT_EQ(call({"phantom", "--out", (dir_ / "study").string(), "--count", "3", "--identity"}), 0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static fs::path manifest() { return dir_ / "study" / "manifest.json"; }
  static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, PhantomWritesLoadableStudy) {
  const auto m = strokeseg::load_manifest(manifest());
  ASSERT_EQ(m.cases.size(), 3u);
  for (const auto& c : m.cases) {
    const auto lc = strokeseg::load_case(m, c);
    EXPECT_EQ(lc.dwi.width(), 224);
    EXPECT_EQ(lc.flair.width(), 672);
    EXPECT_TRUE(lc.truth.has_value());
  }
}

TEST_F(Cli, ConfigurationErrorsExitTwo) {
  EXPECT_EQ(call({}), 2);
  EXPECT_EQ(call({"segment", "--out", (dir_ / "x").string(), "--manifest", manifest().string(), "--preset", "nope"}), 2);
  EXPECT_EQ(call({"segment", "--out", (dir_ / "x").string(), "--manifest", (dir_ / "missing.json").string(),
                  "--preset", "table2-otsu"}),
            2);
  EXPECT_EQ(call({"segment", "--out", (dir_ / "x").string(), "--manifest", manifest().string(), "--method", "otsu",
                  "--params", "3,9"}),
            2);
  EXPECT_EQ(call({"phantom", "--count", "2"}), 2);
}

TEST_F(Cli, SegmentScoresAgainstTruth) {
  const auto out = dir_ / "seg";
  ASSERT_EQ(call({"segment", "--manifest", manifest().string(), "--out", out.string(), "--preset", "table2-otsu-gc",
                  "--score-truth", "--keep-intermediates"}),
            0);
  const auto text = slurp(out / "segment_otsu-gc.csv");
  EXPECT_NE(text.find("\"16,14/0.9991\""), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "ph01_otsu-gc.pgm"));
  EXPECT_TRUE(fs::exists(out / "ph01_otsu-gc_seeds.pgm"));
  EXPECT_TRUE(fs::exists(out / "ph01_otsu-gc_strength.pgm"));
}

TEST_F(Cli, GoldstdWritesMasksAndReport) {
  const auto out = dir_ / "gold";
  ASSERT_EQ(call({"goldstd", "--manifest", manifest().string(), "--out", out.string(), "--case", "ph02"}), 0);
  EXPECT_TRUE(fs::exists(out / "ph02_gold.pgm"));
  EXPECT_NE(slurp(out / "goldstd.json").find("\"transform\""), std::string::npos);
  EXPECT_EQ(call({"goldstd", "--manifest", manifest().string(), "--out", out.string(), "--case", "nope"}), 2);
}

TEST_F(Cli, SweepThenReport) {
  const auto out = dir_ / "sweep";
  ASSERT_EQ(call({"sweep", "--method", "hillclimb", "--manifest", manifest().string(), "--out", out.string(),
                  "--score-truth", "--jobs", "2"}),
            0);
  const auto text = slurp(out / "sweep_hillclimb.csv");
  // Header plus 29 tuples on 3 cases.
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 29 * 3);
  EXPECT_EQ(call({"report", "--sweep", (out / "sweep_hillclimb.csv").string()}), 0);
  EXPECT_EQ(call({"report", "--sweep", (out / "absent.csv").string()}), 3);
}

TEST_F(Cli, SeedFromEnvironmentIsDeterministic) {
  const auto a = dir_ / "fa", b = dir_ / "fb";
  ::setenv("STROKESEG_SEED", "17", 1);
  ASSERT_EQ(call({"segment", "--manifest", manifest().string(), "--out", a.string(), "--preset", "table2-fcm"}), 0);
  ASSERT_EQ(call({"segment", "--manifest", manifest().string(), "--out", b.string(), "--preset", "table2-fcm",
                  "--jobs", "3"}),
            0);
  ::unsetenv("STROKESEG_SEED");
  for (const char* id : {"ph01", "ph02", "ph03"}) {
    EXPECT_EQ(slurp(a / (std::string(id) + "_fcm.pgm")), slurp(b / (std::string(id) + "_fcm.pgm")));
  }
}
