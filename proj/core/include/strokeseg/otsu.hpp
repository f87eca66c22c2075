#pragma once

#include <span>
#include <vector>

#include "strokeseg/histogram.hpp"
#include "strokeseg/image.hpp"

namespace strokeseg {

struct ThresholdSet {
  // t_1 < ... < t_n, each the lower edge of the first bin of the class above.
  std::vector<double> thresholds;
  std::vector<int> cut_bins;
  int bin_count = 0;
  // Weighted within-class variance in intensity^2 units (bins represented by
  // their centers).
  double wcv = 0.0;

  int n() const noexcept { return static_cast<int>(thresholds.size()); }
};

// Exact minimizer of the within-class variance over all placements of
// n_thresholds cuts that leave every class non-empty. Among optimal
// placements the lexicographically smallest cut tuple is returned.
// Throws kInfeasible when the histogram has fewer than n_thresholds + 1
// non-zero bins.
ThresholdSet multilevel_otsu(const Histogram& hist, int n_thresholds);

// sigma_w^2 for an arbitrary strictly increasing cut tuple (cuts in
// 1..bin_count-1). Empty classes contribute nothing.
double within_class_variance(const Histogram& hist, std::span<const int> cut_bins);

// Pixels with intensity >= t_level; level is 1-based.
BinaryMask apply_threshold_level(const IntensityImage& img, const ThresholdSet& ts, int level);

}  // namespace strokeseg
