#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "strokeseg/image.hpp"

namespace strokeseg {

enum class TransformFamily { kTranslation, kRigid, kSimilarity, kAffine };

std::string_view to_string(TransformFamily family);
// Accepts "translation", "rigid", "similarity", "affine".
TransformFamily parse_transform_family(std::string_view name);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Maps fixed-image pixel coordinates (x, y) to moving-image coordinates:
//   x' = a x + b y + tx,  y' = c x + d y + ty
// Pixel (i, j) has its centre at coordinate (i, j).
struct AffineTransform2D {
  double a = 1.0, b = 0.0, tx = 0.0;
  double c = 0.0, d = 1.0, ty = 0.0;
  TransformFamily family = TransformFamily::kAffine;

  static AffineTransform2D identity(TransformFamily family = TransformFamily::kAffine);
  static AffineTransform2D translation(double dx, double dy);
  // Rotation by angle (radians, counter-clockwise in x-right/y-down pixel
  // axes) and isotropic scale about `center`, followed by (dx, dy).
  static AffineTransform2D similarity(double angle, double scale, double dx, double dy, Point2 center);

  Point2 apply(double x, double y) const noexcept { return {a * x + b * y + tx, c * x + d * y + ty}; }
  double determinant() const noexcept { return a * d - b * c; }
  // Throws kSingularTransform.
  AffineTransform2D inverse() const;
  // (this o other)(p) == this(other(p)).
  AffineTransform2D compose(const AffineTransform2D& other) const;
  // a, b, tx, c, d, ty
  std::array<double, 6> row_major() const noexcept { return {a, b, tx, c, d, ty}; }
};

// Nearest neighbour: out(x, y) = in(floor((x + 0.5) * sw), floor((y + 0.5) * sh))
// with sw, sh the input/output size ratios.
template <typename T>
Grid<T> resize_nn(const Grid<T>& in, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1) throw Error(ErrorCode::kInvalidArgument, "target dimensions must be positive");
  if (in.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot resize an empty grid");
  const double sw = static_cast<double>(in.width()) / new_width;
  const double sh = static_cast<double>(in.height()) / new_height;
  std::vector<int> xs(static_cast<std::size_t>(new_width));
  for (int x = 0; x < new_width; ++x) {
    const int sx = static_cast<int>((x + 0.5) * sw);
    xs[static_cast<std::size_t>(x)] = sx < in.width() ? sx : in.width() - 1;
  }
  Grid<T> out(new_width, new_height);
  for (int y = 0; y < new_height; ++y) {
    int sy = static_cast<int>((y + 0.5) * sh);
    if (sy >= in.height()) sy = in.height() - 1;
    for (int x = 0; x < new_width; ++x) out(x, y) = in(xs[static_cast<std::size_t>(x)], sy);
  }
  return out;
}

// Bilinear sample with zero padding outside the grid.
double sample_linear(const IntensityImage& img, double x, double y) noexcept;

// out(x, y) = mask(round(t(x, y))), false outside the mask. Throws
// kSingularTransform for a non-invertible t.
BinaryMask warp_mask(const BinaryMask& mask, const AffineTransform2D& t, int out_width, int out_height);
IntensityImage warp_linear(const IntensityImage& img, const AffineTransform2D& t, int out_width, int out_height);

// Mutual information (nats) between fixed and moving resampled through t,
// from a hard-binned joint histogram over [0,1] x [0,1].
double mutual_information(const IntensityImage& fixed, const IntensityImage& moving, const AffineTransform2D& t,
                          int bins = 32);

struct RegistrationOptions {
  TransformFamily family = TransformFamily::kAffine;
  int bins = 32;
  int levels = 3;  // shrink factors 2^(levels-1) .. 1
  int max_iter_per_level = 200;
};

struct RegistrationResult {
  AffineTransform2D transform;
  double mi_identity = 0.0;
  double mi_final = 0.0;
  int iterations = 0;
  bool converged = false;
  // Objective after every accepted step, tagged with the pyramid shrink
  // factor it was measured at; non-decreasing within one factor.
  struct Step {
    int shrink;
    double mi;
  };
  std::vector<Step> trace;
};

// Maximizes mutual information over the family's parameters by finite
// difference gradient ascent with step halving on a coarse-to-fine pyramid.
// Throws kDegenerateImage for a constant input.
RegistrationResult register_images(const IntensityImage& fixed, const IntensityImage& moving,
                                   const RegistrationOptions& options = {});

}  // namespace strokeseg
