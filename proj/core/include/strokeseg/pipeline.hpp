#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strokeseg/evaluation.hpp"
#include "strokeseg/fcm.hpp"
#include "strokeseg/growcut.hpp"
#include "strokeseg/hillclimb.hpp"
#include "strokeseg/histogram.hpp"
#include "strokeseg/image.hpp"
#include "strokeseg/registration.hpp"

namespace strokeseg {

inline constexpr int kDwiSize = 224;
inline constexpr int kFlairSize = 672;

struct CaseSpec {
  std::string id;
  std::string patient;
  int day = 7;
  std::filesystem::path dwi;
  std::filesystem::path flair;
  // Otsu parameters that isolate the lesion on this case's FLAIR, chosen by
  // an operator.
  int gold_otsu_n = 0;
  int gold_otsu_level = 0;
  std::optional<std::filesystem::path> truth;
};

struct Manifest {
  std::filesystem::path base_dir;  // relative case paths resolve against it
  std::vector<CaseSpec> cases;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  // Throws kConfig for an unknown id.
  const CaseSpec& find(std::string_view id) const;
};

// JSON: {"cases": [{"id", "patient", "day", "dwi", "flair",
//                   "gold": {"otsu_n", "otsu_level"}, "truth"?}]}
// Schema violations throw kConfig before any image is read.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct LoadedCase {
  CaseSpec spec;
  IntensityImage dwi;
  IntensityImage flair;  // empty unless requested
  BinaryMask brain;
  std::optional<BinaryMask> truth;
};

// Reads and normalizes the case images; DWI must be 224x224 and FLAIR
// 672x672 (kFormat otherwise).
LoadedCase load_case(const Manifest& manifest, const CaseSpec& spec, bool with_flair = true);

struct OtsuSettings {
  int bins = 256;
  HistogramDomain domain = HistogramDomain::kBrainOnly;
};

struct GoldOptions {
  OtsuSettings otsu;
  RegistrationOptions registration;
  // Refuse the case when registration gains less mutual information over
  // the identity than this.
  double min_mi_gain = 0.0;
};

struct GoldResult {
  BinaryMask gold;        // DWI grid
  BinaryMask flair_mask;  // FLAIR grid, before resizing
  RegistrationResult registration;
};

// Otsu on FLAIR, nearest-neighbour resize of image and mask to the DWI grid,
// registration of the resized FLAIR onto the DWI, mask pulled into DWI space.
GoldResult build_gold(const LoadedCase& c, const GoldOptions& options = {});

struct MethodConfig {
  Method method = Method::kOtsu;
  ParameterTuple params;
  OtsuSettings otsu;
  FcmOptions fcm;  // clusters comes from params
  FcmSelection fcm_selection = FcmSelection::kAtLeast;
  SmallestPeakRule hc_rule = SmallestPeakRule::kPopulation;
  int gc_max_iter = 500;
};

// Checks the tuple shape and ranges against the method; throws kConfig.
void validate(const MethodConfig& config);

struct Preset {
  std::string_view name;
  Method method;
  std::string_view params;
};
std::span<const Preset> presets();
// Throws kConfig for an unknown preset name.
MethodConfig preset_config(std::string_view name);

struct SegmentResult {
  BinaryMask base;
  std::optional<SeedLabels> seeds;
  std::optional<AutomatonState> growcut;
  BinaryMask mask;
  double base_seconds = 0.0;
  double growcut_seconds = 0.0;
};

SegmentResult segment(const IntensityImage& dwi, const MethodConfig& config);
// Base-method mask for a (base) parameter tuple.
BinaryMask base_segment(const IntensityImage& dwi, const MethodConfig& config, const ParameterTuple& base_params);

enum class RoiMode { kBrain, kBoundingBox };
struct RoiOptions {
  RoiMode mode = RoiMode::kBrain;
  int margin = 10;  // pixels around the gold lesion's bounding box
};
// Brain mask, or the brain within the gold lesion's box grown by margin.
BinaryMask make_roi(const IntensityImage& dwi, const BinaryMask& gold, const RoiOptions& options);

struct EvalCase {
  std::string id;
  IntensityImage dwi;
  BinaryMask gold;
  BinaryMask roi;
};

struct SweepOptions {
  MethodConfig config;  // method-independent settings; method/params ignored
  SpecificityMode specificity = SpecificityMode::kStandard;
  int jobs = 1;
  // Evaluate base candidates whose grid index is a multiple of this.
  int sample_every = 1;
};

// Every tuple of the method's grid on every case. Candidates that cannot be
// produced (infeasible Otsu, degenerate FCM, single hill-climbing cluster,
// empty seeds) become invalid cells. Output is independent of jobs.
MetricTable sweep(std::span<const EvalCase> cases, Method method, const SweepOptions& options);

struct StageTiming {
  std::string stage;
  double median_seconds = 0.0;
  std::vector<double> runs;
};

struct BenchResult {
  std::string config;
  std::vector<StageTiming> stages;
  bool deterministic = true;  // all timed runs produced identical masks
  std::string machine;
};

// One untimed warm-up, then `runs` timed runs; I/O is not timed.
BenchResult bench(const IntensityImage& dwi, const MethodConfig& config, int runs = 5);
std::string machine_descriptor();

// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace strokeseg
