#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "strokeseg/error.hpp"

namespace strokeseg {

// Row-major 2-D grid. The element type carries the meaning: double for
// normalized intensities, uint8_t for masks, uint16_t for raw scanner data.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(checked_dim(width)),
        height_(checked_dim(height)),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}
  Grid(int width, int height, std::vector<T> data)
      : width_(checked_dim(width)), height_(checked_dim(height)), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw Error(ErrorCode::kDimensionMismatch, "data length does not match width x height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static int checked_dim(int v) {
    if (v < 0) throw Error(ErrorCode::kInvalidArgument, "negative grid dimension");
    return v;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using IntensityImage = Grid<double>;
using BinaryMask = Grid<std::uint8_t>;  // 0 = background, 1 = foreground
using RawImage = Grid<std::uint16_t>;

// Growcut seed states; the enumerator values are the grey levels used in
// label-map files.
enum class SeedLabel : std::uint8_t { kBackground = 0, kNeutral = 128, kForeground = 255 };
using SeedLabels = Grid<SeedLabel>;

// Throws kDimensionMismatch naming `what` when the shapes differ.
template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kDimensionMismatch, what);
}

std::size_t popcount(const BinaryMask& mask);
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_not(const BinaryMask& a);
// True when every foreground pixel of `inner` is foreground in `outer`.
bool is_subset(const BinaryMask& inner, const BinaryMask& outer);
double dice(const BinaryMask& a, const BinaryMask& b);

// Min/max linear normalization to [0,1]. Throws kConstantImage when the
// image has a single value.
IntensityImage normalize(const RawImage& raw);
IntensityImage normalize(const IntensityImage& img);

// Background pixels are exact zeros after scanner-side removal.
BinaryMask brain_mask(const IntensityImage& img);

double max_intensity(const IntensityImage& img);

}  // namespace strokeseg
