#include "strokeseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "strokeseg/otsu.hpp"
#include "strokeseg/pgm.hpp"

namespace strokeseg {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

Error config_error(const std::string& msg) { return Error(ErrorCode::kConfig, msg); }

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw config_error(where + ": missing \"" + key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(where + ": \"" + key + "\" has the wrong type");
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

IntensityImage read_image(const fs::path& p) {
  const PgmImage pgm = read_pgm(p);
  try {
    return normalize(pgm.pixels);
  } catch (const Error& e) {
    throw Error(e.code(), p.string() + ": " + e.what());
  }
}

}  // namespace

fs::path Manifest::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

const CaseSpec& Manifest::find(std::string_view id) const {
  for (const auto& c : cases) {
    if (c.id == id) return c;
  }
  throw config_error("manifest has no case '" + std::string(id) + "'");
}

Manifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("cases") || !doc["cases"].is_array()) {
    throw config_error("manifest needs a \"cases\" array");
  }
  Manifest m;
  m.base_dir = base_dir;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc["cases"].size(); ++i) {
    const json& jc = doc["cases"][i];
    const std::string where = "case #" + std::to_string(i);
    if (!jc.is_object()) throw config_error(where + " is not an object");
    CaseSpec c;
    c.id = required<std::string>(jc, "id", where);
    const std::string w = "case '" + c.id + "'";
    c.patient = required<std::string>(jc, "patient", w);
    c.day = required<int>(jc, "day", w);
    if (c.day != 7 && c.day != 30) throw config_error(w + ": day must be 7 or 30");
    c.dwi = required<std::string>(jc, "dwi", w);
    c.flair = required<std::string>(jc, "flair", w);
    if (!jc.contains("gold") || !jc["gold"].is_object()) throw config_error(w + ": missing \"gold\" parameters");
    c.gold_otsu_n = required<int>(jc["gold"], "otsu_n", w + " gold");
    c.gold_otsu_level = required<int>(jc["gold"], "otsu_level", w + " gold");
    if (c.gold_otsu_n < 1 || c.gold_otsu_level < 1 || c.gold_otsu_level > c.gold_otsu_n) {
      throw config_error(w + ": gold needs 1 <= otsu_level <= otsu_n");
    }
    if (jc.contains("truth")) c.truth = fs::path(required<std::string>(jc, "truth", w));
    if (!seen.insert(c.id).second) throw config_error("duplicate case id '" + c.id + "'");
    m.cases.push_back(std::move(c));
  }
  if (m.cases.empty()) throw config_error("manifest lists no cases");
  return m;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

void save_manifest(const Manifest& m, const fs::path& path) {
  json doc;
  doc["cases"] = json::array();
  for (const auto& c : m.cases) {
    json jc = {{"id", c.id},
               {"patient", c.patient},
               {"day", c.day},
               {"dwi", c.dwi.generic_string()},
               {"flair", c.flair.generic_string()},
               {"gold", {{"otsu_n", c.gold_otsu_n}, {"otsu_level", c.gold_otsu_level}}}};
    if (c.truth) jc["truth"] = c.truth->generic_string();
    doc["cases"].push_back(std::move(jc));
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

LoadedCase load_case(const Manifest& manifest, const CaseSpec& spec, bool with_flair) {
  LoadedCase c;
  c.spec = spec;
  c.dwi = read_image(manifest.resolve(spec.dwi));
  if (c.dwi.width() != kDwiSize || c.dwi.height() != kDwiSize) {
    throw Error(ErrorCode::kFormat, spec.id + ": DWI must be 224x224");
  }
  c.brain = brain_mask(c.dwi);
  if (with_flair) {
    c.flair = read_image(manifest.resolve(spec.flair));
    if (c.flair.width() != kFlairSize || c.flair.height() != kFlairSize) {
      throw Error(ErrorCode::kFormat, spec.id + ": FLAIR must be 672x672");
    }
  }
  if (spec.truth) {
    c.truth = read_mask(manifest.resolve(*spec.truth));
    require_same_shape(*c.truth, c.dwi, "truth mask does not match the DWI grid");
  }
  return c;
}

GoldResult build_gold(const LoadedCase& c, const GoldOptions& opt) {
  if (c.flair.empty()) throw Error(ErrorCode::kInvalidArgument, c.spec.id + ": FLAIR not loaded");
  if (c.spec.gold_otsu_n < 1 || c.spec.gold_otsu_level < 1 || c.spec.gold_otsu_level > c.spec.gold_otsu_n) {
    throw config_error(c.spec.id + ": gold Otsu parameters missing or out of range");
  }
  GoldResult r;
  const ThresholdSet ts = multilevel_otsu(histogram(c.flair, opt.otsu.bins, opt.otsu.domain), c.spec.gold_otsu_n);
  r.flair_mask = apply_threshold_level(c.flair, ts, c.spec.gold_otsu_level);
  const IntensityImage flair_small = resize_nn(c.flair, c.dwi.width(), c.dwi.height());
  const BinaryMask mask_small = resize_nn(r.flair_mask, c.dwi.width(), c.dwi.height());
  r.registration = register_images(c.dwi, flair_small, opt.registration);
  const double gain = r.registration.mi_final - r.registration.mi_identity;
  if (gain < opt.min_mi_gain) {
    throw Error(ErrorCode::kUnregisteredCase, c.spec.id + ": registration gained " + std::to_string(gain) +
                                                  " nats of mutual information, floor is " +
                                                  std::to_string(opt.min_mi_gain));
  }
  r.gold = warp_mask(mask_small, r.registration.transform, c.dwi.width(), c.dwi.height());
  return r;
}

void validate(const MethodConfig& cfg) {
  const auto& p = cfg.params;
  const std::string name(to_string(cfg.method));
  const Method base = base_method(cfg.method);
  const std::size_t arity = base == Method::kHillclimb ? 1 : 2;
  if (p.ints.size() != arity) {
    throw config_error(name + " takes " + std::to_string(arity) + " integer parameter(s), got '" + p.to_string() + "'");
  }
  if (uses_growcut(cfg.method) != p.theta.has_value()) {
    throw config_error(uses_growcut(cfg.method) ? name + " needs a strength threshold (e.g. '/0.9995')"
                                                : name + " takes no strength threshold");
  }
  switch (base) {
    case Method::kOtsu:
      if (p.ints[0] < 1 || p.ints[1] < 1 || p.ints[1] > p.ints[0]) throw config_error("otsu needs 1 <= level <= n");
      break;
    case Method::kFcm:
      if (p.ints[0] < 1 || p.ints[1] < 1 || p.ints[1] > p.ints[0]) throw config_error("fcm needs 1 <= selected <= c");
      break;
    default:
      if (p.ints[0] < 2) throw config_error("hillclimb needs at least 2 bins");
      break;
  }
  if (p.theta && !(*p.theta >= 0.0 && *p.theta <= 1.0)) throw config_error("strength threshold must lie in [0,1]");
  if (cfg.otsu.bins < 2) throw config_error("otsu bins must be >= 2");
  if (cfg.gc_max_iter < 1) throw config_error("growcut max_iter must be >= 1");
  if (!(cfg.fcm.tol > 0.0) || cfg.fcm.max_iter < 1) throw config_error("fcm tol and max_iter must be positive");
}

std::span<const Preset> presets() {
  static constexpr Preset kPresets[] = {
      {"table2-otsu", Method::kOtsu, "17,10"},
      {"table2-fcm", Method::kFcm, "29,28"},
      {"table2-otsu-gc", Method::kOtsuGrowcut, "16,14/0.9991"},
      {"table2-fcm-gc", Method::kFcmGrowcut, "28,28/0.9999"},
      {"table2-hillclimb-gc", Method::kHillclimbGrowcut, "22/0.9995"},
  };
  return kPresets;
}

MethodConfig preset_config(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) {
      MethodConfig cfg;
      cfg.method = p.method;
      cfg.params = ParameterTuple::parse(p.params);
      return cfg;
    }
  }
  throw config_error("unknown preset '" + std::string(name) + "'");
}

BinaryMask base_segment(const IntensityImage& dwi, const MethodConfig& cfg, const ParameterTuple& bp) {
  switch (base_method(cfg.method)) {
    case Method::kOtsu: {
      const ThresholdSet ts = multilevel_otsu(histogram(dwi, cfg.otsu.bins, cfg.otsu.domain), bp.ints[0]);
      return apply_threshold_level(dwi, ts, bp.ints[1]);
    }
    case Method::kFcm: {
      FcmOptions fo = cfg.fcm;
      fo.clusters = bp.ints[0];
      return fcm_mask(fcm_fit(dwi, fo), dwi, bp.ints[1], cfg.fcm_selection);
    }
    default:
      return hillclimb_mask(dwi, bp.ints[0], cfg.hc_rule);
  }
}

SegmentResult segment(const IntensityImage& dwi, const MethodConfig& cfg) {
  validate(cfg);
  SegmentResult r;
  auto t0 = std::chrono::steady_clock::now();
  r.base = base_segment(dwi, cfg, {cfg.params.ints, std::nullopt});
  r.base_seconds = seconds_since(t0);
  if (!uses_growcut(cfg.method)) {
    r.mask = r.base;
    return r;
  }
  t0 = std::chrono::steady_clock::now();
  r.seeds = make_seeds(r.base, dwi);
  r.growcut = growcut_run(dwi, *r.seeds, cfg.gc_max_iter);
  r.mask = strength_mask(*r.growcut, *cfg.params.theta);
  r.growcut_seconds = seconds_since(t0);
  return r;
}

BinaryMask make_roi(const IntensityImage& dwi, const BinaryMask& gold, const RoiOptions& opt) {
  require_same_shape(dwi, gold, "gold mask does not match the image");
  BinaryMask roi = brain_mask(dwi);
  if (opt.mode == RoiMode::kBrain) return roi;
  if (opt.margin < 0) throw config_error("roi margin must be non-negative");
  int x0 = gold.width(), y0 = gold.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < gold.height(); ++y) {
    for (int x = 0; x < gold.width(); ++x) {
      if (!gold(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw Error(ErrorCode::kEmptyRoi, "gold mask is empty, no bounding box");
  for (int y = 0; y < roi.height(); ++y) {
    for (int x = 0; x < roi.width(); ++x) {
      const bool inside = x >= x0 - opt.margin && x <= x1 + opt.margin && y >= y0 - opt.margin && y <= y1 + opt.margin;
      if (!inside) roi(x, y) = 0;
    }
  }
  return roi;
}

namespace {

// One unit of sweep work: a case and a group of base candidates sharing the
// expensive step (one Otsu threshold set, one FCM fit, one histogram).
struct SweepTask {
  std::size_t case_index;
  int group;                             // n, c or bin count
  std::vector<std::size_t> base_tuples;  // indices into the base grid
};

}  // namespace

MetricTable sweep(std::span<const EvalCase> cases, Method method, const SweepOptions& opt) {
  if (cases.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one case");
  if (opt.sample_every < 1) throw config_error("sample stride must be >= 1");
  const std::vector<ParameterTuple> base = base_grid(method);
  const std::vector<double> thetas = growcut_thresholds();
  const bool gc = uses_growcut(method);
  const std::size_t per_base = gc ? thetas.size() : 1;

  std::vector<std::size_t> sampled;
  for (std::size_t i = 0; i < base.size(); i += static_cast<std::size_t>(opt.sample_every)) sampled.push_back(i);
  // slot[i]: position of base tuple i among the sampled ones.
  std::vector<std::ptrdiff_t> slot(base.size(), -1);
  for (std::size_t k = 0; k < sampled.size(); ++k) slot[sampled[k]] = static_cast<std::ptrdiff_t>(k);

  MetricTable table;
  table.method = std::string(to_string(method));
  for (const auto& c : cases) table.images.push_back(c.id);
  for (std::size_t b : sampled) {
    if (!gc) {
      table.tuples.push_back(base[b]);
    } else {
      for (double t : thetas) table.tuples.push_back({base[b].ints, t});
    }
  }
  table.cells.resize(cases.size() * table.tuples.size());

  std::vector<SweepTask> tasks;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    for (std::size_t b : sampled) {
      const int group = base[b].ints[0];
      if (tasks.empty() || tasks.back().case_index != ci || tasks.back().group != group) {
        tasks.push_back({ci, group, {}});
      }
      tasks.back().base_tuples.push_back(b);
    }
  }

  MethodConfig cfg = opt.config;
  cfg.method = method;
  parallel_for(tasks.size(), opt.jobs, [&](std::size_t ti) {
    const SweepTask& task = tasks[ti];
    const EvalCase& ec = cases[task.case_index];
    auto cell = [&](std::size_t b, std::size_t k) -> MetricCell& {
      return table.at(task.case_index, static_cast<std::size_t>(slot[b]) * per_base + k);
    };
    auto invalidate = [&](std::size_t b, const std::string& why) {
      for (std::size_t k = 0; k < per_base; ++k) cell(b, k).error = why;
    };
    auto record = [&](std::size_t b, std::size_t k, const BinaryMask& mask) {
      MetricRecord r = metrics(compare(mask, ec.gold, ec.roi), opt.specificity);
      r.method = table.method;
      r.params = table.tuples[static_cast<std::size_t>(slot[b]) * per_base + k];
      r.image_id = ec.id;
      cell(b, k).record = std::move(r);
    };
    auto finish = [&](std::size_t b, const BinaryMask& candidate) {
      if (!gc) {
        record(b, 0, candidate);
        return;
      }
      try {
        const SeedLabels seeds = make_seeds(candidate, ec.dwi);
        const AutomatonState st = growcut_run(ec.dwi, seeds, cfg.gc_max_iter);
        for (std::size_t k = 0; k < thetas.size(); ++k) record(b, k, strength_mask(st, thetas[k]));
      } catch (const Error& e) {
        invalidate(b, e.what());
      }
    };

    switch (base_method(method)) {
      case Method::kOtsu: {
        std::optional<ThresholdSet> ts;
        try {
          ts = multilevel_otsu(histogram(ec.dwi, cfg.otsu.bins, cfg.otsu.domain), task.group);
        } catch (const Error& e) {
          for (std::size_t b : task.base_tuples) invalidate(b, e.what());
          return;
        }
        for (std::size_t b : task.base_tuples) finish(b, apply_threshold_level(ec.dwi, *ts, base[b].ints[1]));
        break;
      }
      case Method::kFcm: {
        std::optional<FcmModel> model;
        try {
          FcmOptions fo = cfg.fcm;
          fo.clusters = task.group;
          model = fcm_fit(ec.dwi, fo);
        } catch (const Error& e) {
          for (std::size_t b : task.base_tuples) invalidate(b, e.what());
          return;
        }
        for (std::size_t b : task.base_tuples) {
          finish(b, fcm_mask(*model, ec.dwi, base[b].ints[1], cfg.fcm_selection));
        }
        break;
      }
      default: {
        for (std::size_t b : task.base_tuples) {
          try {
            finish(b, hillclimb_mask(ec.dwi, base[b].ints[0], cfg.hc_rule));
          } catch (const Error& e) {
            invalidate(b, e.what());
          }
        }
        break;
      }
    }
  });
  return table;
}

BenchResult bench(const IntensityImage& dwi, const MethodConfig& cfg, int runs) {
  if (runs < 1) throw config_error("bench needs at least one run");
  BenchResult out;
  out.config = std::string(to_string(cfg.method)) + " " + cfg.params.to_string();
  out.machine = machine_descriptor();
  const SegmentResult reference = segment(dwi, cfg);  // warm-up
  StageTiming base{"segmentation", 0.0, {}};
  StageTiming gc{"growcut", 0.0, {}};
  for (int i = 0; i < runs; ++i) {
    const SegmentResult r = segment(dwi, cfg);
    base.runs.push_back(r.base_seconds);
    gc.runs.push_back(r.growcut_seconds);
    if (!(r.mask == reference.mask)) out.deterministic = false;
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  base.median_seconds = median(base.runs);
  out.stages.push_back(base);
  if (uses_growcut(cfg.method)) {
    gc.median_seconds = median(gc.runs);
    out.stages.push_back(gc);
  }
  return out;
}

std::string machine_descriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  std::string compiler = "unknown compiler";
#if defined(__clang__)
  compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  compiler = "gcc " __VERSION__;
#endif
  return cpu + "; " + std::to_string(std::thread::hardware_concurrency()) + " hardware threads; " + compiler;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace strokeseg
