#include "strokeseg/morphology.hpp"

#include <string>

namespace strokeseg {

BallElement::BallElement(int size) : size_(size) {
  if (size < 1) throw Error(ErrorCode::kInvalidArgument, "ball size must be >= 1, got " + std::to_string(size));
  const int lo = -((size - 1) / 2);
  const int hi = lo + size - 1;
  // Compare 4*(dx^2+dy^2) with (E-1)^2 to stay in integers.
  const long long limit = static_cast<long long>(size - 1) * (size - 1);
  for (int dy = lo; dy <= hi; ++dy) {
    int row_lo = hi + 1;
    int row_hi = lo - 1;
    for (int dx = lo; dx <= hi; ++dx) {
      if (4LL * (dx * dx + dy * dy) <= limit) {
        offsets_.push_back({dx, dy});
        if (dx < row_lo) row_lo = dx;
        row_hi = dx;
      }
    }
    if (row_lo <= row_hi) rows_.push_back({dy, row_lo, row_hi});
  }
}

int seed_size_from_counts(std::uint64_t lesion_pixels, std::uint64_t brain_pixels) {
  if (brain_pixels == 0) throw Error(ErrorCode::kEmptyBrain, "brain area is zero");
  if (lesion_pixels > brain_pixels) throw Error(ErrorCode::kInvalidArgument, "lesion larger than brain");
  // floor(1 + 40 L/B + 1/2) == floor((3B + 80L) / 2B)
  return static_cast<int>((3 * brain_pixels + 80 * lesion_pixels) / (2 * brain_pixels));
}

int seed_size(const BinaryMask& lesion, const BinaryMask& brain) {
  require_same_shape(lesion, brain, "lesion and brain masks differ in shape");
  return seed_size_from_counts(popcount(mask_and(lesion, brain)), popcount(brain));
}

BinaryMask erode(const BinaryMask& mask, const BallElement& element) {
  const int w = mask.width();
  const int h = mask.height();
  // run[y*w + x]: length of the foreground run starting at (x, y) going right.
  std::vector<int> run(mask.size(), 0);
  for (int y = 0; y < h; ++y) {
    int len = 0;
    for (int x = w - 1; x >= 0; --x) {
      len = mask(x, y) ? len + 1 : 0;
      run[static_cast<std::size_t>(y) * w + x] = len;
    }
  }
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      bool keep = true;
      for (const auto& r : element.rows()) {
        const int yy = y + r.dy;
        const int x0 = x + r.dx_lo;
        const int x1 = x + r.dx_hi;
        if (yy < 0 || yy >= h || x0 < 0 || x1 >= w ||
            run[static_cast<std::size_t>(yy) * w + x0] < x1 - x0 + 1) {
          keep = false;
          break;
        }
      }
      out(x, y) = keep ? 1 : 0;
    }
  }
  return out;
}

}  // namespace strokeseg
