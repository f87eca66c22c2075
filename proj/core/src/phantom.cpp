#include "strokeseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace strokeseg {

namespace {

constexpr double kMaxRaw = 4095.0;

struct Anatomy {
  const PhantomSpec& s;
  double cx;
  double cy;

  double rho(double x, double y) const {
    const double u = (x - cx) / s.brain_rx;
    const double v = (y - cy) / s.brain_ry;
    return std::sqrt(u * u + v * v);
  }
  bool in_brain(double x, double y) const { return rho(x, y) <= 1.0; }
  bool in_lesion(double x, double y) const {
    const double dx = x - s.lesion_cx;
    const double dy = y - s.lesion_cy;
    return dx * dx + dy * dy <= s.lesion_radius * s.lesion_radius;
  }
  bool in_csf(double x, double y) const {
    if (!s.csf) return false;
    const CsfStructures& v = *s.csf;
    const double r = rho(x, y);
    if (std::abs(x - cx) <= v.fissure_half_width && r >= v.fissure_rho && r < 1.0) return true;
    for (double side : {-1.0, 1.0}) {
      const double ang = side * v.tilt;
      const double dx = x - (cx + side * v.offset);
      const double dy = y - (cy - v.rise);
      const double u = (std::cos(ang) * dx + std::sin(ang) * dy) / v.rx;
      const double w = (-std::sin(ang) * dx + std::cos(ang) * dy) / v.ry;
      if (u * u + w * w <= 1.0) return true;
    }
    return false;
  }
  double dwi_level(double x, double y) const {
    if (in_lesion(x, y)) return s.lesion_level;
    if (in_csf(x, y)) return s.csf->dwi_level;
    const double r = rho(x, y);
    if (s.band && r >= s.band->rho0) {
      const double t = std::clamp((r - s.band->rho0) / (1.0 - s.band->rho0), 0.0, 1.0);
      return s.band->v0 + (s.band->v1 - s.band->v0) * std::pow(t, s.band->power);
    }
    return s.brain_level;
  }
  double flair_level(double x, double y) const {
    if (in_lesion(x, y)) return s.flair_lesion_level;
    if (in_csf(x, y)) return s.csf->flair_level;
    if (s.band && rho(x, y) >= s.band->rho0) return s.flair_band_level;
    return s.flair_brain_level;
  }
};

// Noise, clamp to [1/4095, 1], 12-bit quantization; brain pixels never reach
// zero so the brain mask survives.
std::uint16_t quantize_brain(double level, double noise) {
  const double v = std::clamp(level + noise, 1.0 / kMaxRaw, 1.0);
  return static_cast<std::uint16_t>(std::max(1L, std::lround(v * kMaxRaw)));
}

}  // namespace

Phantom make_phantom(const PhantomSpec& s) {
  if (s.width < 8 || s.height < 8) throw Error(ErrorCode::kInvalidArgument, "phantom grid too small");
  if (!(s.lesion_radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lesion radius must be positive");
  if (!(s.lesion_level > s.brain_level) || !(s.brain_level > 0.0) || s.lesion_level > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 < brain_level < lesion_level <= 1");
  }
  if (s.noise_sigma < 0.0) throw Error(ErrorCode::kInvalidArgument, "noise sigma must be non-negative");
  if (s.flair_scale < 1) throw Error(ErrorCode::kInvalidArgument, "flair scale must be >= 1");
  const Anatomy anat{s, (s.width - 1) / 2.0, (s.height - 1) / 2.0};
  if (2 * s.brain_rx > s.width || 2 * s.brain_ry > s.height) {
    throw Error(ErrorCode::kInvalidArgument, "brain ellipse exceeds the grid");
  }
  // The disk must sit inside the ellipse (and inside the band when present).
  const double limit = s.band ? s.band->rho0 : 1.0;
  for (int k = 0; k < 360; ++k) {
    const double th = k * M_PI / 180.0;
    const double x = s.lesion_cx + s.lesion_radius * std::cos(th);
    const double y = s.lesion_cy + s.lesion_radius * std::sin(th);
    if (anat.rho(x, y) >= limit) throw Error(ErrorCode::kInvalidArgument, "lesion disk leaves the brain region");
  }

  const auto& m = s.flair_transform;
  const double det = m[0] * m[4] - m[1] * m[3];
  if (!(det > 1e-9)) throw Error(ErrorCode::kInvalidArgument, "flair transform must preserve orientation");

  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto draw = [&] { return s.noise_sigma > 0.0 ? s.noise_sigma * noise(rng) : 0.0; };

  Phantom out;
  out.dwi_raw = RawImage(s.width, s.height);
  out.truth = BinaryMask(s.width, s.height);
  out.brain = BinaryMask(s.width, s.height);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      if (!anat.in_brain(x, y)) continue;
      out.brain(x, y) = 1;
      out.truth(x, y) = anat.in_lesion(x, y) ? 1 : 0;
      out.dwi_raw(x, y) = quantize_brain(anat.dwi_level(x, y), draw());
    }
  }
  out.dwi = normalize(out.dwi_raw);

  // FLAIR pixel X lies at resized coordinate u = (X - (k-1)/2) / k, which is
  // the anatomy point T^-1(u).
  const int k = s.flair_scale;
  const double inv_a = m[4] / det, inv_b = -m[1] / det, inv_c = -m[3] / det, inv_d = m[0] / det;
  const int fw = s.width * k;
  const int fh = s.height * k;
  const double half = (k - 1) / 2.0;
  out.flair_raw = RawImage(fw, fh);
  out.truth_flair = BinaryMask(fw, fh);
  for (int y = 0; y < fh; ++y) {
    for (int x = 0; x < fw; ++x) {
      const double ux = (x - half) / k - m[2];
      const double uy = (y - half) / k - m[5];
      const double ax = inv_a * ux + inv_b * uy;
      const double ay = inv_c * ux + inv_d * uy;
      if (!anat.in_brain(ax, ay)) continue;
      const bool lesion = anat.in_lesion(ax, ay);
      out.truth_flair(x, y) = lesion ? 1 : 0;
      out.flair_raw(x, y) = quantize_brain(anat.flair_level(ax, ay), draw());
    }
  }
  out.flair = normalize(out.flair_raw);
  return out;
}

std::vector<PhantomSpec> phantom_series(int count, std::uint64_t seed, bool planted_offsets) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "phantom count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::vector<PhantomSpec> out;
  for (int i = 0; i < count; ++i) {
    PhantomSpec s;
    s.band = CorticalBand{};
    s.csf = CsfStructures{};
    s.brain_level = 0.2181;
    s.lesion_level = 0.7233;
    s.csf->dwi_level = 0.1927;
    s.seed = seed * 1000003u + static_cast<std::uint64_t>(i) + 1;
    s.lesion_radius = 15.0 + (i % 4);
    const double cx = (s.width - 1) / 2.0;
    const double cy = (s.height - 1) / 2.0;
    // Keep the whole disk well inside the band's inner edge.
    const double reach = s.band->rho0 * std::min(s.brain_rx, s.brain_ry) - s.lesion_radius - 6.0;
    // Rejection-sample a centre clear of the CSF structures.
    for (bool clear = false; !clear;) {
      const double ang = uniform(0.0, 2.0 * M_PI);
      const double rad = reach * std::sqrt(uniform(0.0, 1.0));
      s.lesion_cx = cx + rad * std::cos(ang);
      s.lesion_cy = cy + rad * std::sin(ang);
      clear = std::abs(s.lesion_cx - cx) > s.lesion_radius + 3.0;
      for (double side : {-1.0, 1.0}) {
        const double dx = s.lesion_cx - (cx + side * s.csf->offset);
        const double dy = s.lesion_cy - (cy - s.csf->rise);
        if (std::hypot(dx, dy) < s.lesion_radius + s.csf->ry + 3.0) clear = false;
      }
    }
    if (planted_offsets) {
      const double th = uniform(-3.0, 3.0) * M_PI / 180.0;
      const double sc = uniform(0.97, 1.03);
      const double shear = uniform(-0.02, 0.02);
      const double a = sc * std::cos(th), b = -sc * std::sin(th) + shear;
      const double c = sc * std::sin(th), d = sc * std::cos(th);
      const double tx = uniform(-4.0, 4.0), ty = uniform(-4.0, 4.0);
      s.flair_transform = {a, b, cx - (a * cx + b * cy) + tx, c, d, cy - (c * cx + d * cy) + ty};
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace strokeseg
