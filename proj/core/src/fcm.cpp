#include "strokeseg/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

namespace strokeseg {

namespace {

void fill_row(double x, std::span<const double> centroids, double q, double* row) {
  const std::size_t c = centroids.size();
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < c; ++i) zeros += (x == centroids[i]) ? 1 : 0;
  if (zeros > 0) {
    for (std::size_t i = 0; i < c; ++i) row[i] = (x == centroids[i]) ? 1.0 / static_cast<double>(zeros) : 0.0;
    return;
  }
  const double exponent = 1.0 / (q - 1.0);  // applied to squared distances
  double sum = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double d2 = (x - centroids[i]) * (x - centroids[i]);
    row[i] = exponent == 1.0 ? 1.0 / d2 : std::pow(d2, -exponent);
    sum += row[i];
  }
  for (std::size_t i = 0; i < c; ++i) row[i] /= sum;
}

double powq(double u, double q) { return q == 2.0 ? u * u : std::pow(u, q); }

// Weighted lower quantiles at (i + 0.5) / c over sorted samples.
std::vector<double> quantile_init(std::span<const double> sorted, std::span<const double> weights, int c) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(c));
  double acc = 0.0;
  std::size_t k = 0;
  for (int i = 0; i < c; ++i) {
    const double target = (i + 0.5) / c * total;
    while (k + 1 < sorted.size() && acc + weights[k] <= target) acc += weights[k++];
    out.push_back(sorted[k]);
  }
  return out;
}

bool has_collision(const std::vector<double>& centroids) {
  std::vector<double> s = centroids;
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

struct Attempt {
  bool degenerate = false;
  FcmModel model;
};

Attempt run_once(std::span<const double> samples, std::span<const double> weights, std::vector<double> centroids,
                 const FcmOptions& opt) {
  Attempt out;
  FcmModel& m = out.model;
  const std::size_t n = samples.size();
  const std::size_t c = centroids.size();
  m.c = static_cast<int>(c);
  m.q = opt.q;
  m.memberships.assign(n * c, 0.0);

  auto update_memberships = [&] {
    for (std::size_t k = 0; k < n; ++k) fill_row(samples[k], centroids, opt.q, &m.memberships[k * c]);
  };
  auto objective = [&] { return fcm_objective(samples, weights, centroids, m.memberships, opt.q); };

  update_memberships();
  double prev = objective();
  m.objective_history.push_back(prev);
  std::vector<double> num(c), den(c);
  for (int it = 1; it <= opt.max_iter; ++it) {
    if (it > 1) update_memberships();
    std::fill(num.begin(), num.end(), 0.0);
    std::fill(den.begin(), den.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < c; ++i) {
        const double w = powq(m.memberships[k * c + i], opt.q) * weights[k];
        num[i] += w * samples[k];
        den[i] += w;
      }
    }
    for (std::size_t i = 0; i < c; ++i) {
      if (!(den[i] > 0.0)) {
        out.degenerate = true;
        return out;
      }
      centroids[i] = num[i] / den[i];
    }
    if (has_collision(centroids)) {
      out.degenerate = true;
      return out;
    }
    const double j = objective();
    m.objective_history.push_back(j);
    m.iterations = it;
    const bool done = std::abs(prev - j) < opt.tol;
    prev = j;
    if (done) {
      m.converged = true;
      break;
    }
  }
  // The last membership update preceded the last centroid update; the
  // recorded objective pairs exactly these memberships and centroids.
  m.objective = prev;
  m.centroids = std::move(centroids);
  return out;
}

void sort_clusters(FcmModel& m) {
  const std::size_t c = static_cast<std::size_t>(m.c);
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.centroids[a] < m.centroids[b]; });
  std::vector<double> centroids(c);
  std::vector<double> u(m.memberships.size());
  for (std::size_t j = 0; j < c; ++j) {
    centroids[j] = m.centroids[order[j]];
    for (std::size_t k = 0; k < m.samples.size(); ++k) u[k * c + j] = m.memberships[k * c + order[j]];
  }
  m.centroids = std::move(centroids);
  m.memberships = std::move(u);
}

}  // namespace

std::vector<double> fcm_membership_row(double x, std::span<const double> centroids, double q) {
  if (!(q > 1.0)) throw Error(ErrorCode::kInvalidArgument, "fuzzifier q must be > 1");
  std::vector<double> row(centroids.size());
  fill_row(x, centroids, q, row.data());
  return row;
}

double fcm_objective(std::span<const double> samples, std::span<const double> weights,
                     std::span<const double> centroids, std::span<const double> memberships, double q) {
  const std::size_t c = centroids.size();
  double j = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (std::size_t i = 0; i < c; ++i) {
      const double d = samples[k] - centroids[i];
      j += weights[k] * powq(memberships[k * c + i], q) * d * d;
    }
  }
  return j;
}

FcmModel fcm_fit_samples(std::span<const double> samples, std::span<const double> weights, const FcmOptions& opt) {
  if (opt.clusters < 1) throw Error(ErrorCode::kInvalidArgument, "cluster count must be >= 1");
  if (!(opt.q > 1.0)) throw Error(ErrorCode::kInvalidArgument, "fuzzifier q must be > 1");
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be positive");
  if (opt.max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "max_iter must be >= 1");
  if (samples.size() != weights.size()) throw Error(ErrorCode::kDimensionMismatch, "samples and weights differ in length");
  if (samples.empty()) throw Error(ErrorCode::kEmptyDomain, "no samples to cluster");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
  std::vector<double> sorted(samples.size()), sorted_w(samples.size());
  std::size_t distinct = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted[k] = samples[order[k]];
    sorted_w[k] = weights[order[k]];
    if (!(sorted_w[k] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sample weights must be positive");
    if (k == 0 || sorted[k] != sorted[k - 1]) ++distinct;
  }
  if (distinct < static_cast<std::size_t>(opt.clusters)) {
    throw Error(ErrorCode::kDegenerateCluster, std::to_string(opt.clusters) + " clusters requested for " +
                                                   std::to_string(distinct) + " distinct intensities");
  }

  const double lo = sorted.front();
  const double hi = sorted.back();
  std::vector<double> init = quantile_init(sorted, sorted_w, opt.clusters);
  for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
    if (attempt > 0 || has_collision(init)) {
      std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(attempt));
      std::uniform_real_distribution<double> jitter(lo, hi);
      // Spread colliding centroids: keep the first of each duplicate group,
      // redraw the rest anywhere in the data range.
      std::sort(init.begin(), init.end());
      for (std::size_t i = 1; i < init.size(); ++i) {
        if (init[i] == init[i - 1] || attempt > 0) init[i] = jitter(rng);
      }
      if (has_collision(init)) continue;
    }
    Attempt a = run_once(samples, weights, init, opt);
    if (a.degenerate) continue;
    FcmModel m = std::move(a.model);
    m.samples.assign(samples.begin(), samples.end());
    m.weights.assign(weights.begin(), weights.end());
    m.restarts = attempt;
    sort_clusters(m);
    return m;
  }
  throw Error(ErrorCode::kDegenerateCluster, "centroids kept colliding after " + std::to_string(opt.max_restarts) +
                                                 " jittered restarts");
}

FcmModel fcm_fit(const IntensityImage& img, const FcmOptions& opt) {
  std::vector<double> samples, weights;
  if (opt.per_pixel) {
    for (double v : img.pixels()) {
      if (v > 0.0) {
        samples.push_back(v);
        weights.push_back(1.0);
      }
    }
  } else {
    std::map<double, std::size_t> counts;
    for (double v : img.pixels()) {
      if (v > 0.0) ++counts[v];
    }
    for (const auto& [v, n] : counts) {
      samples.push_back(v);
      weights.push_back(static_cast<double>(n));
    }
  }
  if (samples.empty()) throw Error(ErrorCode::kEmptyBrain, "image has no brain pixels to cluster");
  return fcm_fit_samples(samples, weights, opt);
}

int fcm_hard_rank(const FcmModel& model, double x) {
  const auto row = fcm_membership_row(x, model.centroids, model.q);
  int best = 0;
  for (int i = 1; i < model.c; ++i) {
    if (row[static_cast<std::size_t>(i)] >= row[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

BinaryMask fcm_mask(const FcmModel& model, const IntensityImage& img, int selected, FcmSelection mode) {
  if (selected < 1 || selected > model.c) {
    throw Error(ErrorCode::kInvalidArgument, "selected cluster " + std::to_string(selected) + " outside 1.." +
                                                 std::to_string(model.c));
  }
  BinaryMask out(img.width(), img.height());
  // Hardening depends only on the value; cache per distinct intensity.
  std::map<double, int> rank_of;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = img[i];
    if (!(v > 0.0)) continue;
    auto it = rank_of.find(v);
    if (it == rank_of.end()) it = rank_of.emplace(v, fcm_hard_rank(model, v) + 1).first;
    const int r = it->second;
    out[i] = (mode == FcmSelection::kAtLeast ? r >= selected : r == selected) ? 1 : 0;
  }
  return out;
}

}  // namespace strokeseg
