#include <gtest/gtest.h>

#include <random>

#include "expect_error.hpp"
#include "oracles.hpp"
#include "strokeseg/growcut.hpp"
#include "strokeseg/morphology.hpp"
#include "strokeseg/otsu.hpp"
#include "strokeseg/phantom.hpp"

using namespace strokeseg;

namespace {

std::vector<int> to_oracle(const SeedLabels& s) {
  std::vector<int> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = s[i] == SeedLabel::kForeground ? 1 : (s[i] == SeedLabel::kBackground ? 2 : 0);
  }
  return out;
}

void expect_matches_oracle(const IntensityImage& img, const SeedLabels& seeds) {
  const auto got = growcut_run(img, seeds, 500);
  const auto want = oracle::growcut(img, to_oracle(seeds), 500);
  ASSERT_TRUE(got.converged);
  EXPECT_EQ(got.iterations, want.iterations);
  EXPECT_EQ(to_oracle(got.label), want.label);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_DOUBLE_EQ(got.strength[i], want.strength[i]);
}

SeedLabels random_seeds(std::mt19937_64& rng, int w, int h) {
  SeedLabels s(w, h, SeedLabel::kNeutral);
  for (int k = 0; k < 4; ++k) {
    s[rng() % s.size()] = SeedLabel::kForeground;
    s[rng() % s.size()] = SeedLabel::kBackground;
  }
  s[0] = SeedLabel::kBackground;
  s[s.size() - 1] = SeedLabel::kForeground;
  return s;
}

}  // namespace

TEST(GrowcutG, Endpoints) {
  EXPECT_EQ(growcut_g(0.0, 1.0), 1.0);
  EXPECT_EQ(growcut_g(1.0, 1.0), 0.0);
  EXPECT_EQ(growcut_g(0.4, 0.8), 0.5);
}

TEST(Growcut, TwoHalvesSplitAtTheEdge) {
  IntensityImage img(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) img(x, y) = x < 4 ? 0.2 : 0.8;
  }
  SeedLabels seeds(8, 8, SeedLabel::kNeutral);
  seeds(6, 3) = SeedLabel::kForeground;
  seeds(1, 4) = SeedLabel::kBackground;
  const auto st = growcut_run(img, seeds);
  ASSERT_TRUE(st.converged);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      EXPECT_EQ(st.label(x, y), x < 4 ? SeedLabel::kBackground : SeedLabel::kForeground) << x << "," << y;
      EXPECT_EQ(st.strength(x, y), 1.0);
    }
  }
  expect_matches_oracle(img, seeds);
}

TEST(Growcut, UniformImageFloodsAtFullStrength) {
  IntensityImage img(12, 9, 0.5);
  SeedLabels seeds(12, 9, SeedLabel::kNeutral);
  seeds(2, 2) = SeedLabel::kForeground;
  seeds(10, 7) = SeedLabel::kBackground;
  const auto st = growcut_run(img, seeds);
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_NE(st.label[i], SeedLabel::kNeutral);
    EXPECT_EQ(st.strength[i], 1.0);
  }
  // First front to arrive wins; with a tie the earlier direction wins.
  EXPECT_EQ(st.label(0, 0), SeedLabel::kForeground);
  EXPECT_EQ(st.label(11, 8), SeedLabel::kBackground);
  expect_matches_oracle(img, seeds);
}

TEST(Growcut, MatchesNaiveOracleOnRandomImages) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 25; ++t) {
    const int w = 5 + static_cast<int>(rng() % 25), h = 5 + static_cast<int>(rng() % 25);
    IntensityImage img(w, h);
    // Quantized values make equal-strength ties common.
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = t % 2 ? u(rng) : static_cast<double>(rng() % 4) / 4.0;
    img[0] = 1.0;
    expect_matches_oracle(img, random_seeds(rng, w, h));
  }
}

TEST(Growcut, StepInvariants) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  IntensityImage img(30, 30);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = u(rng);
  const auto seeds = random_seeds(rng, 30, 30);
  GrowcutAutomaton gc(img, seeds);
  auto prev = gc.state().strength;
  int steps = 0;
  while (gc.step()) {
    ASSERT_LT(++steps, 500);
    const auto& st = gc.state();
    for (std::size_t i = 0; i < img.size(); ++i) {
      EXPECT_GE(st.strength[i], prev[i]);
      EXPECT_GE(st.strength[i], 0.0);
      EXPECT_LE(st.strength[i], 1.0);
      if (seeds[i] != SeedLabel::kNeutral) {
        EXPECT_EQ(st.label[i], seeds[i]);
        EXPECT_EQ(st.strength[i], 1.0);
      }
    }
    prev = st.strength;
  }
}

TEST(Growcut, NonConvergenceIsFlagged) {
  IntensityImage img(40, 1, 0.5);
  SeedLabels seeds(40, 1, SeedLabel::kNeutral);
  seeds(0, 0) = SeedLabel::kForeground;
  seeds(39, 0) = SeedLabel::kBackground;
  const auto st = growcut_run(img, seeds, 3);
  EXPECT_FALSE(st.converged);
  EXPECT_EQ(st.iterations, 3);
}

TEST(Growcut, RejectsMissingSeedClass) {
  IntensityImage img(4, 4, 0.5);
  SeedLabels seeds(4, 4, SeedLabel::kNeutral);
  seeds(0, 0) = SeedLabel::kForeground;
  EXPECT_ERROR_CODE(growcut_run(img, seeds), ErrorCode::kEmptySeeds);
}

TEST(Growcut, PhantomRunsConvergeDeterministically) {
  for (const auto& spec : phantom_series(4, 11, false)) {
    const auto ph = make_phantom(spec);
    const auto seeds = make_seeds(ph.truth, ph.dwi);
    const auto a = growcut_run(ph.dwi, seeds);
    const auto b = growcut_run(ph.dwi, seeds);
    EXPECT_TRUE(a.converged);
    EXPECT_LE(a.iterations, 500);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.strength, b.strength);
    // Thresholds nest.
    const auto thetas = growcut_thresholds();
    for (std::size_t k = 1; k < thetas.size(); ++k) {
      EXPECT_TRUE(is_subset(strength_mask(a, thetas[k]), strength_mask(a, thetas[k - 1])));
    }
  }
}

TEST(StrengthMask, LabelAndThreshold) {
  AutomatonState st;
  st.label = SeedLabels(3, 1, std::vector<SeedLabel>{SeedLabel::kForeground, SeedLabel::kForeground, SeedLabel::kBackground});
  st.strength = IntensityImage(3, 1, std::vector<double>{1.0, 0.9995, 1.0});
  EXPECT_EQ(strength_mask(st, 0.0), BinaryMask(3, 1, std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_EQ(strength_mask(st, 0.9995), BinaryMask(3, 1, std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_EQ(strength_mask(st, 0.9996), BinaryMask(3, 1, std::vector<std::uint8_t>{1, 0, 0}));
  EXPECT_EQ(strength_mask(st, 1.0), BinaryMask(3, 1, std::vector<std::uint8_t>{1, 0, 0}));
}

TEST(MakeSeeds, SmallBlobKeepsCandidate) {
  IntensityImage img(60, 60, 0.5);
  for (int x = 0; x < 60; ++x) img(x, 0) = 0.0;
  BinaryMask cand(60, 60);
  cand(30, 30) = cand(31, 30) = cand(30, 31) = 1;
  const auto s = make_seeds(cand, img);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto want = img[i] == 0.0 ? SeedLabel::kBackground : (cand[i] ? SeedLabel::kForeground : SeedLabel::kNeutral);
    EXPECT_EQ(s[i], want);
  }
}

TEST(MakeSeeds, TenPercentCandidateUsesBallFive) {
  IntensityImage img(40, 40);
  for (int y = 0; y < 25; ++y) {
    for (int x = 0; x < 40; ++x) img(x, y) = 0.4;
  }
  BinaryMask cand(40, 40);
  for (int y = 8; y < 18; ++y) {
    for (int x = 12; x < 22; ++x) cand(x, y) = 1;
  }
  // Outside the brain: must not count towards the fraction.
  for (int x = 0; x < 40; ++x) cand(x, 35) = 1;
  const auto s = make_seeds(cand, img);
  const auto want = oracle::erode(mask_and(cand, brain_mask(img)), 5);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i] == SeedLabel::kForeground, want[i] != 0);
  EXPECT_EQ(popcount(want), 36u);
}

TEST(MakeSeeds, Errors) {
  IntensityImage img(10, 10, 0.5);
  img(0, 0) = 0.0;
  EXPECT_ERROR_CODE(make_seeds(BinaryMask(10, 10), img), ErrorCode::kEmptySeeds);
  BinaryMask all(10, 10, std::uint8_t{1});
  EXPECT_ERROR_CODE(make_seeds(all, IntensityImage(10, 10, 0.5)), ErrorCode::kEmptySeeds);
  EXPECT_ERROR_CODE(make_seeds(BinaryMask(5, 5), img), ErrorCode::kDimensionMismatch);
}
