#include "strokeseg/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace strokeseg {

Histogram::Histogram(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {
  const auto bins = counts_.size();
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  probabilities_.assign(bins, 0.0);
  if (total_ > 0) {
    for (std::size_t i = 0; i < bins; ++i) {
      probabilities_[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    }
  }
  edges_.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges_[i] = static_cast<double>(i) / static_cast<double>(bins);
  }
}

Histogram Histogram::from_counts(std::vector<std::uint64_t> counts) {
  if (counts.size() < 2) throw Error(ErrorCode::kInvalidArgument, "histogram needs at least 2 bins");
  return Histogram(std::move(counts));
}

int Histogram::nonzero_bins() const noexcept {
  return static_cast<int>(std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }));
}

int Histogram::bin_of(double value, int bin_count) noexcept {
  if (!(value > 0.0)) return 0;
  const double scaled = std::floor(value * bin_count);
  if (scaled >= bin_count) return bin_count - 1;
  return static_cast<int>(scaled);
}

Histogram histogram(const IntensityImage& img, int bin_count, HistogramDomain domain) {
  if (bin_count < 2) throw Error(ErrorCode::kInvalidArgument, "bin_count must be >= 2");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(bin_count), 0);
  const bool brain_only = domain == HistogramDomain::kBrainOnly;
  for (double v : img.pixels()) {
    if (brain_only && !(v > 0.0)) continue;
    ++counts[static_cast<std::size_t>(Histogram::bin_of(v, bin_count))];
  }
  Histogram h = Histogram::from_counts(std::move(counts));
  if (brain_only && h.total() == 0) {
    throw Error(ErrorCode::kEmptyDomain, "brain-only histogram has no pixels");
  }
  return h;
}

}  // namespace strokeseg
