#pragma once

#include <cstdint>
#include <vector>

#include "strokeseg/image.hpp"

namespace strokeseg {

struct Offset {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

// Discrete ball inside an E x E footprint. The origin is the centre pixel for
// odd E and the top-left pixel of the central 2 x 2 for even E; an offset is
// kept when dx^2 + dy^2 <= (E-1)^2 / 4.
class BallElement {
 public:
  explicit BallElement(int size);

  int size() const noexcept { return size_; }
  const std::vector<Offset>& offsets() const noexcept { return offsets_; }
  // Per row dy (lowest first), the inclusive dx interval covered.
  struct Row {
    int dy;
    int dx_lo;
    int dx_hi;
  };
  const std::vector<Row>& rows() const noexcept { return rows_; }

 private:
  int size_;
  std::vector<Offset> offsets_;
  std::vector<Row> rows_;
};

// round(1 + 40 * lesion / brain) with halves rounded up, computed exactly.
int seed_size_from_counts(std::uint64_t lesion_pixels, std::uint64_t brain_pixels);

// P_n uses the lesion restricted to the brain. Throws kEmptyBrain.
int seed_size(const BinaryMask& lesion, const BinaryMask& brain);

// Out-of-bounds pixels count as background.
BinaryMask erode(const BinaryMask& mask, const BallElement& element);

}  // namespace strokeseg
