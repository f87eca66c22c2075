#include "strokeseg/registration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace strokeseg {

std::string_view to_string(TransformFamily family) {
  switch (family) {
    case TransformFamily::kTranslation: return "translation";
    case TransformFamily::kRigid: return "rigid";
    case TransformFamily::kSimilarity: return "similarity";
    case TransformFamily::kAffine: return "affine";
  }
  return "affine";
}

TransformFamily parse_transform_family(std::string_view name) {
  for (auto f : {TransformFamily::kTranslation, TransformFamily::kRigid, TransformFamily::kSimilarity,
                 TransformFamily::kAffine}) {
    if (name == to_string(f)) return f;
  }
  throw Error(ErrorCode::kConfig, "unknown transform family '" + std::string(name) + "'");
}

AffineTransform2D AffineTransform2D::identity(TransformFamily family) {
  AffineTransform2D t;
  t.family = family;
  return t;
}

AffineTransform2D AffineTransform2D::translation(double dx, double dy) {
  AffineTransform2D t;
  t.tx = dx;
  t.ty = dy;
  t.family = TransformFamily::kTranslation;
  return t;
}

AffineTransform2D AffineTransform2D::similarity(double angle, double scale, double dx, double dy, Point2 center) {
  AffineTransform2D t;
  const double cs = std::cos(angle) * scale;
  const double sn = std::sin(angle) * scale;
  t.a = cs;
  t.b = -sn;
  t.c = sn;
  t.d = cs;
  t.tx = center.x - (cs * center.x - sn * center.y) + dx;
  t.ty = center.y - (sn * center.x + cs * center.y) + dy;
  t.family = scale == 1.0 ? TransformFamily::kRigid : TransformFamily::kSimilarity;
  return t;
}

AffineTransform2D AffineTransform2D::inverse() const {
  const double det = determinant();
  if (!(std::abs(det) > 1e-12)) throw Error(ErrorCode::kSingularTransform, "transform is not invertible");
  AffineTransform2D inv;
  inv.a = d / det;
  inv.b = -b / det;
  inv.c = -c / det;
  inv.d = a / det;
  inv.tx = -(inv.a * tx + inv.b * ty);
  inv.ty = -(inv.c * tx + inv.d * ty);
  inv.family = family;
  return inv;
}

AffineTransform2D AffineTransform2D::compose(const AffineTransform2D& o) const {
  AffineTransform2D r;
  r.a = a * o.a + b * o.c;
  r.b = a * o.b + b * o.d;
  r.c = c * o.a + d * o.c;
  r.d = c * o.b + d * o.d;
  r.tx = a * o.tx + b * o.ty + tx;
  r.ty = c * o.tx + d * o.ty + ty;
  r.family = std::max(family, o.family);
  return r;
}

double sample_linear(const IntensityImage& img, double x, double y) noexcept {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  if (fx < -1.0 || fy < -1.0 || fx >= img.width() || fy >= img.height()) return 0.0;
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double wx = x - fx;
  const double wy = y - fy;
  auto at = [&](int xx, int yy) { return img.contains(xx, yy) ? img(xx, yy) : 0.0; };
  return (1 - wy) * ((1 - wx) * at(x0, y0) + wx * at(x0 + 1, y0)) + wy * ((1 - wx) * at(x0, y0 + 1) + wx * at(x0 + 1, y0 + 1));
}

BinaryMask warp_mask(const BinaryMask& mask, const AffineTransform2D& t, int out_width, int out_height) {
  if (!(std::abs(t.determinant()) > 1e-12)) throw Error(ErrorCode::kSingularTransform, "transform is not invertible");
  BinaryMask out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Point2 p = t.apply(x, y);
      const double rx = std::floor(p.x + 0.5);
      const double ry = std::floor(p.y + 0.5);
      if (rx < 0 || ry < 0 || rx >= mask.width() || ry >= mask.height()) continue;
      out(x, y) = mask(static_cast<int>(rx), static_cast<int>(ry)) ? 1 : 0;
    }
  }
  return out;
}

IntensityImage warp_linear(const IntensityImage& img, const AffineTransform2D& t, int out_width, int out_height) {
  IntensityImage out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Point2 p = t.apply(x, y);
      out(x, y) = sample_linear(img, p.x, p.y);
    }
  }
  return out;
}

namespace {

int bin_index(double v, int bins) {
  if (!(v > 0.0)) return 0;
  const int b = static_cast<int>(v * bins);
  return b >= bins ? bins - 1 : b;
}

// Pixel i of a level image with shrink factor f covers full-resolution
// pixels f*i .. f*i + f - 1, so its centre sits at f*i + (f - 1)/2.
struct Level {
  int shrink;
  IntensityImage fixed;
  IntensityImage moving;
};

IntensityImage shrink_image(const IntensityImage& img, int f) {
  if (f == 1) return img;
  const int w = std::max(1, img.width() / f);
  const int h = std::max(1, img.height() / f);
  IntensityImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int yy = y * f; yy < std::min(img.height(), y * f + f); ++yy) {
        for (int xx = x * f; xx < std::min(img.width(), x * f + f); ++xx) {
          sum += img(xx, yy);
          ++n;
        }
      }
      out(x, y) = sum / n;
    }
  }
  return out;
}

double level_mi(const Level& lv, const AffineTransform2D& t, int bins, std::vector<double>& joint) {
  const double f = lv.shrink;
  const double off = (f - 1.0) / 2.0;
  joint.assign(static_cast<std::size_t>(bins) * bins, 0.0);
  const int w = lv.fixed.width();
  const int h = lv.fixed.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Point2 q = t.apply(f * x + off, f * y + off);
      const double mv = sample_linear(lv.moving, (q.x - off) / f, (q.y - off) / f);
      joint[static_cast<std::size_t>(bin_index(lv.fixed(x, y), bins)) * bins + bin_index(mv, bins)] += 1.0;
    }
  }
  const double n = static_cast<double>(w) * h;
  std::vector<double> pf(static_cast<std::size_t>(bins), 0.0), pm(static_cast<std::size_t>(bins), 0.0);
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      const double v = joint[static_cast<std::size_t>(i) * bins + j];
      pf[static_cast<std::size_t>(i)] += v;
      pm[static_cast<std::size_t>(j)] += v;
    }
  }
  double mi = 0.0;
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      const double v = joint[static_cast<std::size_t>(i) * bins + j];
      if (v > 0.0) mi += v / n * std::log(v * n / (pf[static_cast<std::size_t>(i)] * pm[static_cast<std::size_t>(j)]));
    }
  }
  return mi;
}

// Family parameters about the fixed-image centre; scale[] gives the size of a
// "unit" move in each coordinate (1 px, ~1 px of rotation at 100 px radius,
// 1% of scale or shear).
struct Parameterization {
  TransformFamily family;
  Point2 center;

  std::vector<double> initial() const {
    switch (family) {
      case TransformFamily::kTranslation: return {0, 0};
      case TransformFamily::kRigid: return {0, 0, 0};
      case TransformFamily::kSimilarity: return {0, 0, 0, 0};
      case TransformFamily::kAffine: return {0, 0, 0, 0, 0, 0};
    }
    return {};
  }

  std::vector<double> scales() const {
    switch (family) {
      case TransformFamily::kTranslation: return {1, 1};
      case TransformFamily::kRigid: return {0.01, 1, 1};
      case TransformFamily::kSimilarity: return {0.01, 0.01, 1, 1};
      case TransformFamily::kAffine: return {0.01, 0.01, 0.01, 0.01, 1, 1};
    }
    return {};
  }

  AffineTransform2D make(const std::vector<double>& p) const {
    double m00 = 1, m01 = 0, m10 = 0, m11 = 1, dx = 0, dy = 0;
    switch (family) {
      case TransformFamily::kTranslation:
        dx = p[0];
        dy = p[1];
        break;
      case TransformFamily::kRigid:
      case TransformFamily::kSimilarity: {
        const bool sim = family == TransformFamily::kSimilarity;
        const double s = sim ? std::exp(p[1]) : 1.0;
        m00 = s * std::cos(p[0]);
        m01 = -s * std::sin(p[0]);
        m10 = s * std::sin(p[0]);
        m11 = s * std::cos(p[0]);
        dx = p[sim ? 2 : 1];
        dy = p[sim ? 3 : 2];
        break;
      }
      case TransformFamily::kAffine: {
        // Rotation times [sx k; 0 sy], so turning is a single coordinate.
        const double cs = std::cos(p[0]), sn = std::sin(p[0]);
        const double sx = std::exp(p[1]), sy = std::exp(p[2]), k = p[3];
        m00 = cs * sx;
        m01 = cs * k - sn * sy;
        m10 = sn * sx;
        m11 = sn * k + cs * sy;
        dx = p[4];
        dy = p[5];
        break;
      }
    }
    AffineTransform2D t;
    t.a = m00;
    t.b = m01;
    t.c = m10;
    t.d = m11;
    t.tx = center.x - (m00 * center.x + m01 * center.y) + dx;
    t.ty = center.y - (m10 * center.x + m11 * center.y) + dy;
    t.family = family;
    return t;
  }
};

bool is_constant(const IntensityImage& img) {
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  return *lo == *hi;
}

}  // namespace

double mutual_information(const IntensityImage& fixed, const IntensityImage& moving, const AffineTransform2D& t,
                          int bins) {
  if (bins < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two bins");
  if (fixed.empty() || moving.empty()) throw Error(ErrorCode::kInvalidArgument, "empty image");
  std::vector<double> joint;
  // Full-resolution level: shrink factor 1 needs no copies of the images.
  const Level lv{1, fixed, moving};
  return level_mi(lv, t, bins, joint);
}

namespace {

struct Ascent {
  double mi = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<RegistrationResult::Step> trace;
};

// Normalized-gradient ascent on one pyramid level, starting from p.
Ascent ascend(const Level& lv, const Parameterization& param, std::vector<double>& p, const RegistrationOptions& opt) {
  const std::vector<double> scale = param.scales();
  const std::size_t np = p.size();
  const int f = lv.shrink;
  std::vector<double> joint;
  auto objective = [&](const std::vector<double>& q) {
    const AffineTransform2D t = param.make(q);
    if (!(t.determinant() > 0.1)) return -1.0;
    return level_mi(lv, t, opt.bins, joint);
  };
  Ascent a;
  a.mi = objective(p);
  // Steps are measured in scale units; one unit is one pixel of motion.
  const double max_step = 2.0 * f;
  const double min_step = 0.02 * f;
  double step = max_step;
  for (int it = 0; it < opt.max_iter_per_level; ++it) {
    ++a.iterations;
    std::vector<double> grad(np);
    double norm = 0.0;
    for (std::size_t k = 0; k < np; ++k) {
      const double h = 0.5 * f * scale[k];
      std::vector<double> hi = p, lo = p;
      hi[k] += h;
      lo[k] -= h;
      grad[k] = (objective(hi) - objective(lo)) / (2.0 * h) * scale[k];
      norm += grad[k] * grad[k];
    }
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) return a;
    bool accepted = false;
    while (step >= min_step) {
      std::vector<double> q = p;
      for (std::size_t k = 0; k < np; ++k) q[k] += step * grad[k] / norm * scale[k];
      const double v = objective(q);
      if (v > a.mi) {
        p = std::move(q);
        a.mi = v;
        a.trace.push_back({f, v});
        accepted = true;
        step = std::min(2.0 * step, max_step);
        break;
      }
      step /= 2.0;
    }
    // Gradient stalled: probe each coordinate on its own before giving up.
    for (double probe = max_step; !accepted && probe >= min_step; probe /= 2.0) {
      for (std::size_t k = 0; k < np && !accepted; ++k) {
        for (double sign : {1.0, -1.0}) {
          std::vector<double> q = p;
          q[k] += sign * probe * scale[k];
          const double v = objective(q);
          if (v > a.mi) {
            p = std::move(q);
            a.mi = v;
            a.trace.push_back({f, v});
            accepted = true;
            break;
          }
        }
      }
    }
    if (!accepted) return a;
  }
  a.converged = false;
  return a;
}

// Coarse-level starting points: identity plus small rotations.
std::vector<std::vector<double>> starts(const Parameterization& param) {
  std::vector<std::vector<double>> out{param.initial()};
  if (param.family == TransformFamily::kTranslation) return out;
  for (double deg : {-6.0, -3.0, 3.0, 6.0}) {
    const double th = deg * M_PI / 180.0;
    std::vector<double> p = param.initial();
    p[0] = th;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

RegistrationResult register_images(const IntensityImage& fixed, const IntensityImage& moving,
                                   const RegistrationOptions& opt) {
  if (fixed.empty() || moving.empty()) throw Error(ErrorCode::kInvalidArgument, "empty image");
  if (is_constant(fixed) || is_constant(moving)) throw Error(ErrorCode::kDegenerateImage, "cannot register a constant image");
  if (opt.levels < 1) throw Error(ErrorCode::kInvalidArgument, "pyramid needs at least one level");
  if (opt.max_iter_per_level < 1) throw Error(ErrorCode::kInvalidArgument, "iteration cap must be positive");

  const Parameterization param{opt.family, {(fixed.width() - 1) / 2.0, (fixed.height() - 1) / 2.0}};
  std::vector<double> p = param.initial();

  RegistrationResult result;
  result.mi_identity = mutual_information(fixed, moving, param.make(p), opt.bins);
  result.converged = true;

  for (int level = opt.levels - 1; level >= 0; --level) {
    const int f = 1 << level;
    const Level lv{f, shrink_image(fixed, f), shrink_image(moving, f)};
    Ascent best;
    if (level == opt.levels - 1) {
      bool first = true;
      for (auto q : starts(param)) {
        Ascent a = ascend(lv, param, q, opt);
        result.iterations += a.iterations;
        if (first || a.mi > best.mi) {
          best = std::move(a);
          p = std::move(q);
          first = false;
        }
      }
    } else {
      best = ascend(lv, param, p, opt);
      result.iterations += best.iterations;
    }
    result.converged = result.converged && best.converged;
    result.trace.insert(result.trace.end(), best.trace.begin(), best.trace.end());
  }

  result.transform = param.make(p);
  result.mi_final = mutual_information(fixed, moving, result.transform, opt.bins);
  return result;
}

}  // namespace strokeseg
