#pragma once

#include <cstdint>
#include <vector>

#include "strokeseg/histogram.hpp"
#include "strokeseg/image.hpp"

namespace strokeseg {

struct PeakClustering {
  int bin_count = 0;
  std::vector<int> peak_bins;                // ascending
  std::vector<int> assignment;               // bin -> index into peak_bins
  std::vector<std::uint64_t> cluster_sizes;  // pixels per basin

  int peak_count() const noexcept { return static_cast<int>(peak_bins.size()); }
};

// Each bin climbs to the larger strictly greater neighbour (right on equal
// neighbours). A run of equal bins is climbed as a unit; when neither side
// of it is greater it is a peak represented by its rightmost bin.
PeakClustering climb(const Histogram& hist);

enum class SmallestPeakRule {
  kPopulation,  // fewest pixels in the basin
  kHeight,      // lowest peak bin count
};

// Brain pixels of the smallest basin of the brain-only histogram; ties go to
// the basin with the highest mean intensity. Throws kSingleCluster when the
// histogram has one peak and kEmptyBrain for an all-zero image.
BinaryMask hillclimb_mask(const IntensityImage& img, int bin_count,
                          SmallestPeakRule rule = SmallestPeakRule::kPopulation);

}  // namespace strokeseg
