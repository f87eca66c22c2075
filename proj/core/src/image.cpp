#include "strokeseg/image.hpp"

#include <algorithm>

namespace strokeseg {

std::size_t popcount(const BinaryMask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](std::uint8_t v) { return v != 0; }));
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op) {
  require_same_shape(a, b, "mask shapes differ");
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i] != 0, b[i] != 0) ? 1 : 0;
  return out;
}

template <typename T>
IntensityImage normalize_values(int width, int height, std::span<const T> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot normalize an empty image");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = static_cast<double>(*lo_it);
  const double hi = static_cast<double>(*hi_it);
  if (hi == lo) throw Error(ErrorCode::kConstantImage, "max == min, normalization undefined");
  const double range = hi - lo;
  IntensityImage out(width, height);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (static_cast<double>(values[i]) - lo) / range;
  }
  return out;
}

}  // namespace

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x && y; });
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; });
}

BinaryMask mask_not(const BinaryMask& a) {
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ? 0 : 1;
  return out;
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  require_same_shape(inner, outer, "mask shapes differ");
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i] && !outer[i]) return false;
  }
  return true;
}

double dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask shapes differ");
  std::size_t both = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] ? 1 : 0;
    nb += b[i] ? 1 : 0;
    both += (a[i] && b[i]) ? 1 : 0;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

IntensityImage normalize(const RawImage& raw) {
  return normalize_values<std::uint16_t>(raw.width(), raw.height(), raw.pixels());
}

IntensityImage normalize(const IntensityImage& img) {
  return normalize_values<double>(img.width(), img.height(), img.pixels());
}

BinaryMask brain_mask(const IntensityImage& img) {
  BinaryMask out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i] > 0.0 ? 1 : 0;
  return out;
}

double max_intensity(const IntensityImage& img) {
  if (img.empty()) return 0.0;
  return *std::max_element(img.pixels().begin(), img.pixels().end());
}

}  // namespace strokeseg
