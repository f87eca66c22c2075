#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "expect_error.hpp"
#include "oracles.hpp"
#include "strokeseg/histogram.hpp"
#include "strokeseg/otsu.hpp"

using namespace strokeseg;

namespace {

Histogram spikes(int bins, std::initializer_list<std::pair<int, std::uint64_t>> s) {
  std::vector<std::uint64_t> c(static_cast<std::size_t>(bins), 0);
  for (auto [b, n] : s) c[static_cast<std::size_t>(b)] = n;
  return Histogram::from_counts(c);
}

std::vector<std::uint64_t> random_counts(std::mt19937_64& rng) {
  const int bins = 2 + static_cast<int>(rng() % 63);
  std::vector<std::uint64_t> c(static_cast<std::size_t>(bins));
  const bool sparse = rng() % 2;
  for (auto& v : c) v = sparse && rng() % 3 == 0 ? 0 : rng() % 50;
  // Keep at least four non-empty bins so n = 3 is feasible.
  for (int k = 0; k < 4; ++k) c[static_cast<std::size_t>(k * (bins - 1) / 3)] += 1 + rng() % 5;
  return c;
}

}  // namespace

TEST(Otsu, TwoSpikesSplitBetweenThem) {
  const auto ts = multilevel_otsu(spikes(256, {{51, 500}, {205, 500}}), 1);
  ASSERT_EQ(ts.n(), 1);
  EXPECT_GT(ts.thresholds[0], 51.0 / 256);
  EXPECT_LE(ts.thresholds[0], 205.0 / 256);
  EXPECT_EQ(ts.wcv, 0.0);
  // Smallest tuple: the cut right above the low spike.
  EXPECT_EQ(ts.cut_bins[0], 52);
}

TEST(Otsu, UniformEightBinsSplitsMidRange) {
  const auto ts = multilevel_otsu(Histogram::from_counts(std::vector<std::uint64_t>(8, 10)), 1);
  EXPECT_EQ(ts.cut_bins[0], 4);
  EXPECT_DOUBLE_EQ(ts.thresholds[0], 0.5);
}

TEST(Otsu, ThreeSpikesTwoThresholds) {
  const auto ts = multilevel_otsu(spikes(32, {{3, 7}, {15, 7}, {28, 7}}), 2);
  EXPECT_EQ(ts.wcv, 0.0);
  EXPECT_GT(ts.cut_bins[0], 3);
  EXPECT_LE(ts.cut_bins[0], 15);
  EXPECT_GT(ts.cut_bins[1], 15);
  EXPECT_LE(ts.cut_bins[1], 28);
}

TEST(Otsu, InfeasibleWhenTooFewNonzeroBins) {
  EXPECT_ERROR_CODE(multilevel_otsu(spikes(16, {{2, 5}, {9, 5}}), 2), ErrorCode::kInfeasible);
  EXPECT_ERROR_CODE(multilevel_otsu(spikes(16, {{2, 5}}), 0), ErrorCode::kInvalidArgument);
}

TEST(Otsu, MatchesBruteForce) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 60; ++t) {
    const auto counts = random_counts(rng);
    const auto h = Histogram::from_counts(counts);
    for (int n = 1; n <= 3; ++n) {
      if (h.nonzero_bins() < n + 1) continue;
      const auto ts = multilevel_otsu(h, n);
      EXPECT_EQ(ts.cut_bins, oracle::brute_force_otsu(counts, n)) << "trial " << t << " n " << n;
      EXPECT_NEAR(ts.wcv, oracle::wcv(counts, ts.cut_bins), 1e-10);
    }
  }
}

TEST(Otsu, ReportedWcvMatchesRecomputation) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 20; ++t) {
    const auto counts = random_counts(rng);
    const auto h = Histogram::from_counts(counts);
    if (h.nonzero_bins() < 3) continue;
    const auto ts = multilevel_otsu(h, 2);
    EXPECT_NEAR(ts.wcv, within_class_variance(h, ts.cut_bins), 1e-10);
    for (int k = 0; k < ts.n(); ++k) EXPECT_DOUBLE_EQ(ts.thresholds[static_cast<std::size_t>(k)], h.lower_edge(ts.cut_bins[static_cast<std::size_t>(k)]));
  }
}

TEST(Otsu, WcvNonIncreasingInN) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  IntensityImage img(40, 40);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = u(rng);
  const auto h = histogram(img, 256);
  double prev = 1e9;
  for (int n = 1; n <= 20; ++n) {
    const auto ts = multilevel_otsu(h, n);
    EXPECT_LE(ts.wcv, prev + 1e-15);
    for (int k = 1; k < ts.n(); ++k) EXPECT_LT(ts.thresholds[static_cast<std::size_t>(k - 1)], ts.thresholds[static_cast<std::size_t>(k)]);
    prev = ts.wcv;
  }
}

TEST(Otsu, PixelPermutationDoesNotMatter) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  IntensityImage img(30, 20);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = u(rng) * u(rng);
  auto values = img.values();
  std::shuffle(values.begin(), values.end(), rng);
  const IntensityImage shuffled(30, 20, values);
  for (int n : {1, 4, 9}) {
    const auto a = multilevel_otsu(histogram(img, 256), n);
    const auto b = multilevel_otsu(histogram(shuffled, 256), n);
    EXPECT_EQ(a.cut_bins, b.cut_bins);
    EXPECT_EQ(a.wcv, b.wcv);
  }
}

TEST(OtsuApply, EmptyOnZeroImageAndFullAtLevelOne) {
  const auto ts = multilevel_otsu(spikes(16, {{3, 5}, {12, 5}}), 1);
  EXPECT_EQ(popcount(apply_threshold_level(IntensityImage(4, 4), ts, 1)), 0u);
  EXPECT_EQ(popcount(apply_threshold_level(IntensityImage(4, 4, 0.99), ts, 1)), 16u);
  EXPECT_ERROR_CODE(apply_threshold_level(IntensityImage(4, 4), ts, 2), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(apply_threshold_level(IntensityImage(4, 4), ts, 0), ErrorCode::kInvalidArgument);
}

TEST(OtsuApply, TwoSpikeImageSelectsHighSpike) {
  IntensityImage img(10, 10, 0.2);
  for (int y = 3; y < 6; ++y) {
    for (int x = 2; x < 8; ++x) img(x, y) = 0.8;
  }
  const auto ts = multilevel_otsu(histogram(img, 256), 1);
  const auto m = apply_threshold_level(img, ts, 1);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(m[i] != 0, img[i] == 0.8);
}

TEST(OtsuApply, MasksNestByLevel) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  IntensityImage img(32, 32);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = u(rng);
  const auto ts = multilevel_otsu(histogram(img, 256), 8);
  for (int k = 1; k < 8; ++k) {
    const auto lo = apply_threshold_level(img, ts, k);
    const auto hi = apply_threshold_level(img, ts, k + 1);
    EXPECT_TRUE(is_subset(hi, lo));
    for (std::size_t i = 0; i < img.size(); ++i) {
      EXPECT_EQ(hi[i] != 0, img[i] >= ts.thresholds[static_cast<std::size_t>(k)]);
    }
  }
}
