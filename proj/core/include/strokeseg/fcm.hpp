#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strokeseg/image.hpp"

namespace strokeseg {

struct FcmOptions {
  int clusters = 2;
  double q = 2.0;
  double tol = 1e-6;
  int max_iter = 300;
  std::uint64_t seed = 0;
  // Jittered restarts allowed after a centroid collision.
  int max_restarts = 8;
  // Cluster every brain pixel separately instead of distinct intensities
  // weighted by their pixel counts. Both give the same fixed point.
  bool per_pixel = false;
};

struct FcmModel {
  int c = 0;
  double q = 2.0;
  std::vector<double> centroids;  // ascending
  // The clustered samples with their weights; memberships is row-major,
  // samples.size() x c, columns in centroid order.
  std::vector<double> samples;
  std::vector<double> weights;
  std::vector<double> memberships;
  int iterations = 0;
  double objective = 0.0;
  // J after initialization and after every iteration.
  std::vector<double> objective_history;
  bool converged = false;
  int restarts = 0;

  double membership(std::size_t sample, int cluster) const {
    return memberships[sample * static_cast<std::size_t>(c) + static_cast<std::size_t>(cluster)];
  }
};

// Memberships of a single value against the given centroids. A value that
// coincides with a centroid belongs to it crisply.
std::vector<double> fcm_membership_row(double x, std::span<const double> centroids, double q);

double fcm_objective(std::span<const double> samples, std::span<const double> weights,
                     std::span<const double> centroids, std::span<const double> memberships, double q);

// Weighted samples (weights > 0). Throws kDegenerateCluster when there are
// fewer distinct samples than clusters or when restarts are exhausted.
FcmModel fcm_fit_samples(std::span<const double> samples, std::span<const double> weights,
                         const FcmOptions& options);

// Clusters the brain pixels of img. Throws kEmptyBrain for an all-zero image.
FcmModel fcm_fit(const IntensityImage& img, const FcmOptions& options);

// 0-based rank of the cluster with the largest membership for x; ties go to
// the higher rank.
int fcm_hard_rank(const FcmModel& model, double x);

enum class FcmSelection {
  kAtLeast,  // clusters with rank >= selected
  kExact,    // only the selected cluster
};

// Brain pixels whose hardened 1-based rank matches `selected` under the mode.
BinaryMask fcm_mask(const FcmModel& model, const IntensityImage& img, int selected,
                    FcmSelection mode = FcmSelection::kAtLeast);

}  // namespace strokeseg
