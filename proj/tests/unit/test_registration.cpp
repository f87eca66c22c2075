#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "expect_error.hpp"
#include "strokeseg/phantom.hpp"
#include "strokeseg/registration.hpp"

using namespace strokeseg;

namespace {

IntensityImage textured_phantom() {
  PhantomSpec s;
  s.band = CorticalBand{};
  s.csf = CsfStructures{};
  s.lesion_cx = 150;
  s.lesion_cy = 80;
  s.lesion_radius = 15;
  return make_phantom(s).dwi;
}

constexpr Point2 kCenter{111.5, 111.5};

// Moving image whose pixel t(p) shows what the fixed image shows at p.
IntensityImage plant(const IntensityImage& fixed, const AffineTransform2D& t) {
  return warp_linear(fixed, t.inverse(), fixed.width(), fixed.height());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BinaryMask disk(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m(x, y) = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
  }
  return m;
}

}  // namespace

TEST(ResizeNn, IntegerRatioSamplesCentre) {
  IntensityImage big(672, 672);
  for (int y = 0; y < 672; ++y) {
    for (int x = 0; x < 672; ++x) big(x, y) = (x * 7 + y * 13) % 101 / 100.0;
  }
  const auto small = resize_nn(big, 224, 224);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) ASSERT_EQ(small(x, y), big(3 * x + 1, 3 * y + 1));
  }
  EXPECT_EQ(resize_nn(big, 672, 672), big);
}

TEST(ResizeNn, FourByFourToTwoByTwo) {
  BinaryMask checker(4, 4);
  IntensityImage ramp(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      checker(x, y) = (x + y) % 2;
      ramp(x, y) = (4 * y + x) / 16.0;
    }
  }
  // floor((x + 0.5) * 2) = 2x + 1: every output lands on an even-sum cell.
  EXPECT_EQ(popcount(resize_nn(checker, 2, 2)), 0u);
  const auto r = resize_nn(ramp, 2, 2);
  EXPECT_EQ(r(0, 0), ramp(1, 1));
  EXPECT_EQ(r(1, 0), ramp(3, 1));
  EXPECT_EQ(r(0, 1), ramp(1, 3));
  EXPECT_EQ(r(1, 1), ramp(3, 3));
  EXPECT_ERROR_CODE(resize_nn(ramp, 0, 2), ErrorCode::kInvalidArgument);
}

TEST(Transform, InverseAndCompose) {
  const auto t = AffineTransform2D::similarity(0.3, 1.2, 4, -2, kCenter);
  const auto id = t.compose(t.inverse());
  const auto want = AffineTransform2D::identity().row_major();
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(id.row_major()[static_cast<std::size_t>(k)], want[static_cast<std::size_t>(k)], 1e-12);
  const auto p = t.apply(kCenter.x, kCenter.y);
  EXPECT_NEAR(p.x, kCenter.x + 4, 1e-12);
  EXPECT_NEAR(p.y, kCenter.y - 2, 1e-12);
  AffineTransform2D flat;
  flat.d = 0.0;
  EXPECT_ERROR_CODE(flat.inverse(), ErrorCode::kSingularTransform);
  EXPECT_EQ(parse_transform_family("similarity"), TransformFamily::kSimilarity);
  EXPECT_ERROR_CODE(parse_transform_family("shear"), ErrorCode::kConfig);
}

TEST(WarpMask, IdentityAndUnitShift) {
  const auto m = disk(30, 20, 12, 9, 6);
  EXPECT_EQ(warp_mask(m, AffineTransform2D::identity(), 30, 20), m);
  BinaryMask edge(5, 3);
  for (int y = 0; y < 3; ++y) edge(0, y) = edge(4, y) = edge(2, y) = 1;
  const auto shifted = warp_mask(edge, AffineTransform2D::translation(1, 0), 5, 3);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 5; ++x) EXPECT_EQ(shifted(x, y), x + 1 < 5 ? edge(x + 1, y) : 0);
  }
  AffineTransform2D flat;
  flat.a = 0.0;
  EXPECT_ERROR_CODE(warp_mask(m, flat, 30, 20), ErrorCode::kSingularTransform);
}

TEST(WarpMask, RotatedDiskMatchesRasterization) {
  const auto m = disk(224, 224, 120, 100, 20);
  const auto t = AffineTransform2D::similarity(5.0 * std::numbers::pi / 180, 1.0, 0, 0, kCenter);
  const auto w = warp_mask(m, t, 224, 224);
  std::size_t brute = 0;
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) {
      const auto p = t.apply(x, y);
      const int rx = static_cast<int>(std::floor(p.x + 0.5)), ry = static_cast<int>(std::floor(p.y + 0.5));
      const bool in = rx >= 0 && ry >= 0 && rx < 224 && ry < 224 && m(rx, ry);
      EXPECT_EQ(w(x, y) != 0, in);
      brute += in;
    }
  }
  EXPECT_EQ(popcount(w), brute);
  EXPECT_NEAR(static_cast<double>(popcount(w)), static_cast<double>(popcount(m)), 0.02 * static_cast<double>(popcount(m)));
}

TEST(WarpMask, RoundTripKeepsArea) {
  for (double deg : {-12.0, 3.0, 17.0}) {
    for (double r : {6.0, 15.0, 30.0}) {
      const auto m = disk(160, 160, 80, 75, r);
      ASSERT_GE(popcount(m), 100u);
      const auto t = AffineTransform2D::similarity(deg * std::numbers::pi / 180, 1.0, 3.2, -1.7, {79.5, 79.5});
      const auto back = warp_mask(warp_mask(m, t, 160, 160), t.inverse(), 160, 160);
      EXPECT_NEAR(static_cast<double>(popcount(back)), static_cast<double>(popcount(m)), 0.02 * static_cast<double>(popcount(m)));
    }
  }
}

TEST(MutualInformation, PeaksAtAlignment) {
  const auto img = textured_phantom();
  const double at = mutual_information(img, img, AffineTransform2D::identity());
  EXPECT_GT(at, mutual_information(img, img, AffineTransform2D::translation(3, 0)));
  EXPECT_GT(at, mutual_information(img, img, AffineTransform2D::similarity(0.05, 1.0, 0, 0, kCenter)));
}

TEST(Register, RejectsConstantImages) {
  const auto img = textured_phantom();
  EXPECT_ERROR_CODE(register_images(img, IntensityImage(224, 224, 0.3)), ErrorCode::kDegenerateImage);
  EXPECT_ERROR_CODE(register_images(IntensityImage(224, 224), img), ErrorCode::kDegenerateImage);
}

TEST(Register, SelfRegistrationIsIdentity) {
  const auto img = textured_phantom();
  for (auto family : {TransformFamily::kTranslation, TransformFamily::kRigid, TransformFamily::kSimilarity,
                      TransformFamily::kAffine}) {
    RegistrationOptions o;
    o.family = family;
    const auto r = register_images(img, img, o);
    const auto& t = r.transform;
    EXPECT_NEAR(t.a, 1.0, 1e-3);
    EXPECT_NEAR(t.b, 0.0, 1e-3);
    EXPECT_NEAR(t.c, 0.0, 1e-3);
    EXPECT_NEAR(t.d, 1.0, 1e-3);
    EXPECT_NEAR(t.tx, 0.0, 0.1);
    EXPECT_NEAR(t.ty, 0.0, 0.1);
    EXPECT_GE(r.mi_final, r.mi_identity);
  }
}

TEST(Register, RecoversTranslation) {
  const auto fixed = textured_phantom();
  const auto moving = plant(fixed, AffineTransform2D::translation(5, 3));
  RegistrationOptions o;
  o.family = TransformFamily::kTranslation;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = register_images(fixed, moving, o);
  EXPECT_LT(seconds_since(t0), 30.0);
  EXPECT_NEAR(r.transform.tx, 5.0, 0.5);
  EXPECT_NEAR(r.transform.ty, 3.0, 0.5);
  EXPECT_EQ(r.transform.a, 1.0);
  EXPECT_EQ(r.transform.b, 0.0);
}

TEST(Register, RecoversSimilarity) {
  const auto fixed = textured_phantom();
  const double angle = 5.0 * std::numbers::pi / 180;
  const auto moving = plant(fixed, AffineTransform2D::similarity(angle, 1.05, 0, 0, kCenter));
  RegistrationOptions o;
  o.family = TransformFamily::kSimilarity;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = register_images(fixed, moving, o);
  EXPECT_LT(seconds_since(t0), 30.0);
  const auto& t = r.transform;
  EXPECT_NEAR(std::atan2(t.c, t.a) * 180 / std::numbers::pi, 5.0, 0.5);
  EXPECT_NEAR(std::hypot(t.a, t.c), 1.05, 0.01);
  // Similarity keeps the linear part a scaled rotation.
  EXPECT_NEAR(t.a, t.d, 1e-12);
  EXPECT_NEAR(t.b, -t.c, 1e-12);
  EXPECT_GT(t.determinant(), 0.0);
}

TEST(Register, AcceptedStepsNeverLowerObjective) {
  const auto fixed = textured_phantom();
  const auto moving = plant(fixed, AffineTransform2D::similarity(-0.04, 0.97, 2, -4, kCenter));
  const auto r = register_images(fixed, moving);
  ASSERT_FALSE(r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    if (r.trace[i].shrink == r.trace[i - 1].shrink) EXPECT_GE(r.trace[i].mi, r.trace[i - 1].mi);
  }
  EXPECT_EQ(r.trace.back().shrink, 1);
  EXPECT_GT(r.mi_final, r.mi_identity);
}

TEST(Register, Deterministic) {
  const auto fixed = textured_phantom();
  const auto moving = plant(fixed, AffineTransform2D::translation(-2, 4));
  const auto a = register_images(fixed, moving);
  const auto b = register_images(fixed, moving);
  EXPECT_EQ(a.transform.row_major(), b.transform.row_major());
  EXPECT_EQ(a.mi_final, b.mi_final);
}
