#include "strokeseg/hillclimb.hpp"

#include <algorithm>
#include <string>

namespace strokeseg {

PeakClustering climb(const Histogram& hist) {
  const int bins = hist.bin_count();
  const auto counts = hist.counts();
  // Plateau extents, then one climbing step per plateau.
  std::vector<int> plateau_lo(bins), plateau_hi(bins);
  for (int i = 0; i < bins;) {
    int j = i;
    while (j + 1 < bins && counts[j + 1] == counts[i]) ++j;
    for (int k = i; k <= j; ++k) {
      plateau_lo[k] = i;
      plateau_hi[k] = j;
    }
    i = j + 1;
  }
  // next[i] == i marks a peak.
  std::vector<int> next(bins);
  for (int i = 0; i < bins; ++i) {
    const int a = plateau_lo[i];
    const int b = plateau_hi[i];
    const std::uint64_t here = counts[i];
    const bool left_up = a > 0 && counts[a - 1] > here;
    const bool right_up = b + 1 < bins && counts[b + 1] > here;
    if (right_up && (!left_up || counts[b + 1] >= counts[a - 1])) {
      next[i] = b + 1;
    } else if (left_up) {
      next[i] = a - 1;
    } else {
      next[i] = b;
    }
  }

  PeakClustering out;
  out.bin_count = bins;
  std::vector<int> peak_of(bins, -1);
  for (int i = 0; i < bins; ++i) {
    int j = i;
    while (next[j] != j) j = next[j];
    peak_of[i] = j;
  }
  for (int i = 0; i < bins; ++i) {
    if (peak_of[i] == i) out.peak_bins.push_back(i);
  }
  out.assignment.resize(bins);
  out.cluster_sizes.assign(out.peak_bins.size(), 0);
  for (int i = 0; i < bins; ++i) {
    const auto it = std::lower_bound(out.peak_bins.begin(), out.peak_bins.end(), peak_of[i]);
    const int idx = static_cast<int>(it - out.peak_bins.begin());
    out.assignment[i] = idx;
    out.cluster_sizes[idx] += counts[i];
  }
  return out;
}

BinaryMask hillclimb_mask(const IntensityImage& img, int bin_count, SmallestPeakRule rule) {
  if (bin_count < 2) throw Error(ErrorCode::kInvalidArgument, "bin_count must be >= 2");
  Histogram hist = [&] {
    try {
      return histogram(img, bin_count, HistogramDomain::kBrainOnly);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kEmptyDomain) throw Error(ErrorCode::kEmptyBrain, "image has no brain pixels");
      throw;
    }
  }();
  const PeakClustering pc = climb(hist);
  if (pc.peak_count() < 2) {
    throw Error(ErrorCode::kSingleCluster, "histogram with " + std::to_string(bin_count) + " bins has a single peak");
  }

  const std::size_t peaks = pc.peak_bins.size();
  std::vector<double> sum(peaks, 0.0);
  for (double v : img.pixels()) {
    if (v > 0.0) sum[static_cast<std::size_t>(pc.assignment[Histogram::bin_of(v, bin_count)])] += v;
  }
  auto size_of = [&](std::size_t p) {
    return rule == SmallestPeakRule::kPopulation ? pc.cluster_sizes[p] : hist.count(pc.peak_bins[p]);
  };
  std::size_t chosen = 0;
  for (std::size_t p = 1; p < peaks; ++p) {
    const auto sp = size_of(p);
    const auto sc = size_of(chosen);
    if (sp < sc) {
      chosen = p;
    } else if (sp == sc) {
      // Equal sizes: compare means sum_p / n_p > sum_c / n_c without division.
      const double np = static_cast<double>(pc.cluster_sizes[p]);
      const double nc = static_cast<double>(pc.cluster_sizes[chosen]);
      if (sum[p] * nc > sum[chosen] * np) chosen = p;
    }
  }

  BinaryMask out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = img[i];
    out[i] = (v > 0.0 && static_cast<std::size_t>(pc.assignment[Histogram::bin_of(v, bin_count)]) == chosen) ? 1 : 0;
  }
  return out;
}

}  // namespace strokeseg
