#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "oracles.hpp"
#include "expect_error.hpp"
#include "strokeseg/histogram.hpp"
#include "strokeseg/image.hpp"
#include "strokeseg/pgm.hpp"
#include "strokeseg/phantom.hpp"

using namespace strokeseg;

TEST(Normalize, MapsMinToZeroAndMaxToOne) {
  RawImage raw(3, 1, std::vector<std::uint16_t>{0, 2048, 4095});
  const auto img = normalize(raw);
  EXPECT_DOUBLE_EQ(img[0], 0.0);
  EXPECT_NEAR(img[1], 2048.0 / 4095.0, 1e-15);
  EXPECT_DOUBLE_EQ(img[2], 1.0);
}

TEST(Normalize, UnitRangeDataUnchanged) {
  IntensityImage img(4, 1, std::vector<double>{0.0, 0.25, 0.7, 1.0});
  EXPECT_EQ(normalize(img), img);
}

TEST(Normalize, ConstantImageRejected) {
  RawImage raw(2, 2, std::uint16_t{7});
  EXPECT_ERROR_CODE(normalize(raw), ErrorCode::kConstantImage);
}

TEST(Normalize, IdempotentOnRandomImages) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> v(0, 4095);
  for (int t = 0; t < 20; ++t) {
    RawImage raw(9, 7);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<std::uint16_t>(v(rng));
    const auto once = normalize(raw);
    const auto twice = normalize(once);
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-15);
  }
}

TEST(BrainMask, ZeroImageGivesEmptyMask) {
  EXPECT_EQ(popcount(brain_mask(IntensityImage(5, 5))), 0u);
}

TEST(BrainMask, HalfImage) {
  IntensityImage img(4, 2);
  for (int x = 2; x < 4; ++x) img(x, 0) = img(x, 1) = 0.5;
  const auto m = brain_mask(img);
  EXPECT_EQ(popcount(m), 4u);
  EXPECT_TRUE(m(3, 1));
  EXPECT_FALSE(m(0, 0));
}

TEST(BrainMask, InvariantUnderPositiveRescaling) {
  std::mt19937_64 rng(5);
  RawImage raw(16, 16);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<std::uint16_t>(rng() % 3 == 0 ? 0 : rng() % 1000);
  raw[0] = 0;
  raw[1] = 999;
  RawImage scaled = raw;
  for (std::size_t i = 0; i < raw.size(); ++i) scaled[i] = static_cast<std::uint16_t>(raw[i] * 3);
  EXPECT_EQ(brain_mask(normalize(raw)), brain_mask(normalize(scaled)));
}

TEST(Histogram, TwoBinExample) {
  IntensityImage img(8, 1, std::vector<double>{0, 0, 0, 0, 1, 1, 1, 1});
  const auto h = histogram(img, 2);
  EXPECT_EQ(h.count(0), 4u);
  EXPECT_EQ(h.count(1), 4u);
  EXPECT_DOUBLE_EQ(h.probabilities()[0], 0.5);
  EXPECT_DOUBLE_EQ(h.probabilities()[1], 0.5);
}

TEST(Histogram, ConstantValueSingleBin) {
  const auto h = histogram(IntensityImage(5, 5, 0.3), 10);
  EXPECT_EQ(h.nonzero_bins(), 1);
  EXPECT_EQ(h.count(3), 25u);
}

TEST(Histogram, RampIsFlatWithinFactorTwo) {
  IntensityImage img(1000, 1);
  for (int x = 0; x < 1000; ++x) img(x, 0) = x / 999.0;
  const auto h = histogram(img, 256);
  std::uint64_t lo = ~0ull, hi = 0;
  for (auto c : h.counts()) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  ASSERT_GT(lo, 0u);
  EXPECT_LE(static_cast<double>(hi) / static_cast<double>(lo), 2.0);
}

TEST(Histogram, TotalsAndEdges) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  IntensityImage img(13, 11);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = i % 4 == 0 ? 0.0 : u(rng);
  for (int bins : {2, 7, 64, 256}) {
    const auto all = histogram(img, bins);
    const auto brain = histogram(img, bins, HistogramDomain::kBrainOnly);
    EXPECT_EQ(all.total(), img.size());
    EXPECT_EQ(brain.total(), popcount(brain_mask(img)));
    double s = 0;
    for (double p : all.probabilities()) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
    for (std::size_t i = 1; i < all.edges().size(); ++i) EXPECT_LT(all.edges()[i - 1], all.edges()[i]);
  }
}

TEST(Histogram, OneGoesToLastBinAndEmptyBrainRejected) {
  EXPECT_EQ(Histogram::bin_of(1.0, 10), 9);
  EXPECT_EQ(Histogram::bin_of(0.0, 10), 0);
  EXPECT_ERROR_CODE(histogram(IntensityImage(3, 3), 4, HistogramDomain::kBrainOnly), ErrorCode::kEmptyDomain);
  EXPECT_ERROR_CODE(histogram(IntensityImage(3, 3), 1), ErrorCode::kInvalidArgument);
}

TEST(Pgm, SixteenBitRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (std::uint16_t maxval : {std::uint16_t{4095}, std::uint16_t{65535}, std::uint16_t{255}}) {
    RawImage raw(17, 5);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<std::uint16_t>(rng() % (maxval + 1u));
    const auto bytes = encode_pgm(raw, maxval);
    const auto back = decode_pgm(bytes);
    EXPECT_EQ(back.pixels, raw);
    EXPECT_EQ(back.maxval, maxval);
    EXPECT_EQ(encode_pgm(back.pixels, back.maxval), bytes);
  }
}

TEST(Pgm, BigEndianSamplesAndComments) {
  const std::string text = "P5\n# note\n2 1\n# more\n4095\n";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  bytes.insert(bytes.end(), {0x0F, 0xFF, 0x01, 0x02});
  const auto img = decode_pgm(bytes);
  EXPECT_EQ(img.pixels(0, 0), 4095);
  EXPECT_EQ(img.pixels(1, 0), 0x0102);
}

TEST(Pgm, RejectsMalformedInput) {
  const std::string p2 = "P2\n1 1\n255\n0";
  EXPECT_ERROR_CODE(decode_pgm({reinterpret_cast<const std::uint8_t*>(p2.data()), p2.size()}), ErrorCode::kFormat);
  std::string trunc = "P5\n2 2\n255\n";
  trunc += "ab";
  EXPECT_ERROR_CODE(decode_pgm({reinterpret_cast<const std::uint8_t*>(trunc.data()), trunc.size()}),
                    ErrorCode::kFormat);
  std::string over = "P5\n1 1\n100\n";
  over += static_cast<char>(200);
  EXPECT_ERROR_CODE(decode_pgm({reinterpret_cast<const std::uint8_t*>(over.data()), over.size()}), ErrorCode::kFormat);
}

TEST(Pgm, MasksAndLabelsOnDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "strokeseg_pgm_test";
  std::filesystem::create_directories(dir);
  BinaryMask m(4, 3);
  m(1, 1) = m(3, 2) = 1;
  write_mask(dir / "m.pgm", m);
  EXPECT_EQ(read_mask(dir / "m.pgm"), m);
  const auto raw = read_pgm(dir / "m.pgm");
  EXPECT_EQ(raw.maxval, 255);
  EXPECT_EQ(raw.pixels(1, 1), 255);

  SeedLabels l(3, 1, std::vector<SeedLabel>{SeedLabel::kBackground, SeedLabel::kNeutral, SeedLabel::kForeground});
  write_labels(dir / "l.pgm", l);
  EXPECT_EQ(read_labels(dir / "l.pgm"), l);
  EXPECT_EQ(read_pgm(dir / "l.pgm").pixels(1, 0), 128);
  write_pgm(dir / "bad.pgm", RawImage(1, 1, std::uint16_t{7}), 255);
  EXPECT_ERROR_CODE(read_labels(dir / "bad.pgm"), ErrorCode::kFormat);
  EXPECT_ERROR_CODE(read_pgm(dir / "missing.pgm"), ErrorCode::kIo);
  std::filesystem::remove_all(dir);
}

TEST(Phantom, NoiseFreeHasThreeValues) {
  PhantomSpec s;
  s.noise_sigma = 0.0;
  const auto ph = make_phantom(s);
  std::set<double> values(ph.dwi.pixels().begin(), ph.dwi.pixels().end());
  EXPECT_EQ(values.size(), 3u);
  EXPECT_EQ(*values.begin(), 0.0);
  EXPECT_EQ(*values.rbegin(), 1.0);
}

TEST(Phantom, DeterministicForSeed) {
  PhantomSpec s;
  s.band = CorticalBand{};
  const auto a = make_phantom(s);
  const auto b = make_phantom(s);
  EXPECT_EQ(a.dwi_raw, b.dwi_raw);
  EXPECT_EQ(a.flair_raw, b.flair_raw);
  s.seed = 2;
  EXPECT_NE(make_phantom(s).dwi_raw, a.dwi_raw);
}

TEST(Phantom, TruthIsLatticeDisk) {
  PhantomSpec s;
  s.lesion_radius = 10;
  const auto ph = make_phantom(s);
  EXPECT_EQ(popcount(ph.truth), oracle::lattice_disk(s.lesion_cx, s.lesion_cy, 10, s.width, s.height));
}

TEST(Phantom, BrainMaskMatchesSupport) {
  PhantomSpec s;
  s.band = CorticalBand{};
  s.csf = CsfStructures{};
  s.lesion_cx = 60;
  s.lesion_cy = 150;
  const auto ph = make_phantom(s);
  EXPECT_EQ(brain_mask(ph.dwi), ph.brain);
  EXPECT_TRUE(is_subset(ph.truth, ph.brain));
  EXPECT_EQ(ph.flair.width(), 3 * s.width);
}

TEST(Phantom, IdentityFlairMatchesTruthAfterResize) {
  PhantomSpec s;
  const auto ph = make_phantom(s);
  BinaryMask small(s.width, s.height);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) small(x, y) = ph.truth_flair(3 * x + 1, 3 * y + 1);
  }
  EXPECT_EQ(small, ph.truth);
}

TEST(Phantom, GeometryViolationsRejected) {
  PhantomSpec s;
  s.lesion_cx = 20;
  EXPECT_ERROR_CODE(make_phantom(s), ErrorCode::kInvalidArgument);
  s = PhantomSpec{};
  s.lesion_level = 0.2;
  EXPECT_ERROR_CODE(make_phantom(s), ErrorCode::kInvalidArgument);
}

TEST(Phantom, SeriesIsDeterministicAndValid) {
  const auto a = phantom_series(6, 4, true);
  const auto b = phantom_series(6, 4, true);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].flair_transform, b[i].flair_transform);
    EXPECT_EQ(a[i].lesion_cx, b[i].lesion_cx);
    EXPECT_NO_THROW(make_phantom(a[i]));
  }
}
