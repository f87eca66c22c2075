#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strokeseg/image.hpp"

namespace strokeseg {

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Counts over roi pixels only; lesion is the positive class. Throws
// kDimensionMismatch and kEmptyRoi.
ConfusionCounts compare(const BinaryMask& pred, const BinaryMask& gold, const BinaryMask& roi);

enum class SpecificityMode {
  kStandard,  // TN / (TN + FP)
  kLiteral,   // FP / (FP + TN), the false-positive rate
};

// Parameters as written in result tables: integers joined by ',' and an
// optional Growcut strength threshold after '/', e.g. "16,14/0.9991".
struct ParameterTuple {
  std::vector<int> ints;
  std::optional<double> theta;

  std::string to_string() const;
  static ParameterTuple parse(std::string_view text);
  friend bool operator==(const ParameterTuple&, const ParameterTuple&) = default;
  friend std::partial_ordering operator<=>(const ParameterTuple& a, const ParameterTuple& b);
};

// Undefined ratios (zero denominators) are left empty.
struct MetricRecord {
  ConfusionCounts counts;
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::string method;
  ParameterTuple params;
  std::string image_id;
};

MetricRecord metrics(const ConfusionCounts& c, SpecificityMode mode = SpecificityMode::kStandard);

enum class Method { kOtsu, kFcm, kHillclimb, kOtsuGrowcut, kFcmGrowcut, kHillclimbGrowcut };

std::string_view to_string(Method m);
// "otsu", "fcm", "hillclimb", "otsu+gc", "fcm+gc", "hillclimb+gc".
Method parse_method(std::string_view name);
bool uses_growcut(Method m) noexcept;
Method base_method(Method m) noexcept;

// Growcut strength thresholds 0.9990, 0.9991, ..., 0.9999.
std::vector<double> growcut_thresholds();

// Base candidates: otsu (n, level) for n in 2..20, level in 1..n; fcm
// (c, selected) for c in 2..30; hillclimb (bins) for bins in 2..30.
std::vector<ParameterTuple> base_grid(Method base);
// Full grid; Growcut variants pair every base candidate with every threshold.
std::vector<ParameterTuple> sweep_grid(Method m);

// Mean metrics of one tuple across training images.
struct Aggregate {
  ParameterTuple params;
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  // False when the tuple produced no valid mask or an undefined
  // sensitivity/specificity on some image; such a tuple cannot be feasible.
  bool valid = true;
};

struct Selection {
  Aggregate chosen;
  bool feasible = false;
};

// Feasible: valid with mean sensitivity > 0.9 and mean specificity > 0.9.
// Picks the feasible accuracy maximum (then higher sensitivity, then the
// smaller tuple); without feasible tuples, the best valid tuple by the same
// order, flagged infeasible. Throws kInvalidArgument for an empty input.
Selection select_best(std::span<const Aggregate> candidates);

// A candidate that could not be produced (e.g. no seeds survived erosion)
// has no record and carries the error text instead.
struct MetricCell {
  std::optional<MetricRecord> record;
  std::string error;
};

struct MetricTable {
  std::string method;
  std::vector<std::string> images;
  std::vector<ParameterTuple> tuples;
  std::vector<MetricCell> cells;  // images.size() x tuples.size(), image-major

  const MetricCell& at(std::size_t image, std::size_t tuple) const { return cells[image * tuples.size() + tuple]; }
  MetricCell& at(std::size_t image, std::size_t tuple) { return cells[image * tuples.size() + tuple]; }
};

// Means over the listed images (indices into table.images).
std::vector<Aggregate> aggregate(const MetricTable& table, std::span<const std::size_t> images);

struct Fold {
  std::string held_out;
  Selection selection;
  std::optional<MetricRecord> held_out_metrics;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct LoocvResult {
  std::string method;
  std::vector<Fold> folds;
  bool any_infeasible = false;
  std::optional<MeanStd> accuracy, sensitivity, specificity;

  // "91.72±6.08" per metric in percent, or "-" when a fold was infeasible.
  std::string summary_cell(const std::optional<MeanStd>& m) const;
};

// Throws kInvalidArgument for fewer than two images.
LoocvResult loocv(const MetricTable& table);

MeanStd mean_std(std::span<const double> values);
// Percent with two decimals: 0.9172, 0.0608 -> "91.72±6.08".
std::string format_mean_std(const MeanStd& m);

// CSV with header method,params,image,tp,tn,fp,fn,accuracy,sensitivity,
// specificity,status. Invalid cells are written with status "invalid".
void write_metric_csv(std::ostream& out, const MetricTable& table);
void write_loocv_csv(std::ostream& out, const LoocvResult& result);

}  // namespace strokeseg
