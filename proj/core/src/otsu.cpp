#include "strokeseg/otsu.hpp"

#include <limits>
#include <string>

namespace strokeseg {

namespace {

__extension__ typedef unsigned __int128 u128;

// Prefix sums over bin indices: counts, first and second moments. Integer
// arithmetic keeps single-bin classes at exactly zero cost.
struct Moments {
  std::vector<std::uint64_t> c;
  std::vector<std::uint64_t> s;
  std::vector<u128> q;

  explicit Moments(std::span<const std::uint64_t> counts)
      : c(counts.size() + 1, 0), s(counts.size() + 1, 0), q(counts.size() + 1, 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      c[i + 1] = c[i] + counts[i];
      s[i + 1] = s[i] + counts[i] * i;
      q[i + 1] = q[i] + static_cast<u128>(counts[i]) * i * i;
    }
  }

  std::uint64_t count(int a, int b) const { return c[b] - c[a]; }

  // Sum of squared deviations (index units) of bins [a, b).
  double scatter(int a, int b) const {
    const std::uint64_t n = c[b] - c[a];
    if (n == 0) return 0.0;
    const u128 sum = s[b] - s[a];
    const u128 sq = q[b] - q[a];
    const u128 num = sq * n - sum * sum;
    return static_cast<double>(num) / static_cast<double>(n);
  }
};

bool within_tolerance(double candidate, double best) {
  return candidate <= best + 1e-10 * (best > 1.0 ? best : 1.0);
}

}  // namespace

double within_class_variance(const Histogram& hist, std::span<const int> cut_bins) {
  const int bins = hist.bin_count();
  int prev = 0;
  for (int cut : cut_bins) {
    if (cut <= prev || cut >= bins) throw Error(ErrorCode::kInvalidArgument, "cuts must be strictly increasing in 1..bins-1");
    prev = cut;
  }
  if (hist.total() == 0) return 0.0;
  const Moments m(hist.counts());
  double total = 0.0;
  int a = 0;
  for (std::size_t k = 0; k <= cut_bins.size(); ++k) {
    const int b = k < cut_bins.size() ? cut_bins[k] : bins;
    total += m.scatter(a, b);
    a = b;
  }
  return total / static_cast<double>(hist.total()) / (static_cast<double>(bins) * bins);
}

ThresholdSet multilevel_otsu(const Histogram& hist, int n_thresholds) {
  if (n_thresholds < 1) throw Error(ErrorCode::kInvalidArgument, "threshold count must be >= 1");
  const int bins = hist.bin_count();
  const int classes = n_thresholds + 1;
  if (hist.nonzero_bins() < classes) {
    throw Error(ErrorCode::kInfeasible, std::to_string(n_thresholds) + " thresholds need " +
                                            std::to_string(classes) + " non-empty bins, histogram has " +
                                            std::to_string(hist.nonzero_bins()));
  }
  const Moments m(hist.counts());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // tail[k][s]: best cost of splitting bins [s, bins) into k non-empty classes.
  std::vector<std::vector<double>> tail(classes + 1, std::vector<double>(bins + 1, kInf));
  tail[0][bins] = 0.0;
  for (int k = 1; k <= classes; ++k) {
    for (int s = bins - 1; s >= 0; --s) {
      double best = kInf;
      for (int e = s + 1; e <= bins; ++e) {
        if (tail[k - 1][e] == kInf || m.count(s, e) == 0) continue;
        const double v = m.scatter(s, e) + tail[k - 1][e];
        if (v < best) best = v;
      }
      tail[k][s] = best;
    }
  }

  ThresholdSet out;
  out.bin_count = bins;
  int s = 0;
  for (int k = classes; k > 1; --k) {
    int chosen = -1;
    for (int e = s + 1; e < bins; ++e) {
      if (tail[k - 1][e] == kInf || m.count(s, e) == 0) continue;
      if (within_tolerance(m.scatter(s, e) + tail[k - 1][e], tail[k][s])) {
        chosen = e;
        break;
      }
    }
    out.cut_bins.push_back(chosen);
    out.thresholds.push_back(hist.lower_edge(chosen));
    s = chosen;
  }
  out.wcv = within_class_variance(hist, out.cut_bins);
  return out;
}

BinaryMask apply_threshold_level(const IntensityImage& img, const ThresholdSet& ts, int level) {
  if (level < 1 || level > ts.n()) {
    throw Error(ErrorCode::kInvalidArgument, "threshold level " + std::to_string(level) + " outside 1.." +
                                                 std::to_string(ts.n()));
  }
  // Comparing bin indices rather than img >= t keeps the mask consistent with
  // the histogram the cuts were computed on.
  const int cut = ts.cut_bins[static_cast<std::size_t>(level - 1)];
  BinaryMask out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = Histogram::bin_of(img[i], ts.bin_count) >= cut ? 1 : 0;
  return out;
}

}  // namespace strokeseg
