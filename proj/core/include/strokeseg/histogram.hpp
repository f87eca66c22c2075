#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strokeseg/image.hpp"

namespace strokeseg {

enum class HistogramDomain { kAllPixels, kBrainOnly };

// Uniform-bin intensity histogram over [0,1]. The value 1.0 lands in the last
// bin.
class Histogram {
 public:
  // Throws kInvalidArgument for fewer than two bins.
  static Histogram from_counts(std::vector<std::uint64_t> counts);

  int bin_count() const noexcept { return static_cast<int>(counts_.size()); }
  std::uint64_t total() const noexcept { return total_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t count(int bin) const { return counts_.at(static_cast<std::size_t>(bin)); }
  // P(i); all zero when the histogram is empty.
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  // bin_count + 1 strictly increasing boundaries, edges()[0] == 0, back() == 1.
  std::span<const double> edges() const noexcept { return edges_; }
  int nonzero_bins() const noexcept;

  double lower_edge(int bin) const { return edges_.at(static_cast<std::size_t>(bin)); }
  double bin_center(int bin) const { return (static_cast<double>(bin) + 0.5) / bin_count(); }

  static int bin_of(double value, int bin_count) noexcept;

 private:
  explicit Histogram(std::vector<std::uint64_t> counts);

  std::vector<std::uint64_t> counts_;
  std::vector<double> probabilities_;
  std::vector<double> edges_;
  std::uint64_t total_ = 0;
};

// Throws kEmptyDomain when the brain-only domain holds no pixel.
Histogram histogram(const IntensityImage& img, int bin_count,
                    HistogramDomain domain = HistogramDomain::kAllPixels);

}  // namespace strokeseg
