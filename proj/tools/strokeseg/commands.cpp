#include "strokeseg/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "strokeseg/evaluation.hpp"
#include "strokeseg/pgm.hpp"
#include "strokeseg/phantom.hpp"
#include "strokeseg/pipeline.hpp"

namespace strokeseg::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
      return kExitConfig;
    case ErrorCode::kInfeasible:
      return kExitInfeasible;
    default:
      return kExitData;
  }
}

namespace {

struct CommonFlags {
  std::string manifest = "manifest.json";
  std::string out;
  std::string case_id;
  std::string gold_dir;
  int jobs = 1;
  std::uint64_t seed = 0;
};

struct MethodFlags {
  std::string preset;
  std::string method;
  std::string params;
  int otsu_n = 0, otsu_level = 0, otsu_bins = 256;
  std::string otsu_domain = "brain";
  int fcm_c = 0, fcm_selected = 0, fcm_max_iter = 300;
  double fcm_tol = 1e-6;
  bool fcm_per_pixel = false;
  std::string fcm_mode = "atleast";
  int hc_bins = 0;
  std::string hc_rule = "population";
  double gc_theta = -1.0;
  int gc_max_iter = 500;
};

struct EvalFlags {
  std::string roi = "brain";
  int roi_margin = 10;
  std::string specificity = "standard";
  bool score_truth = false;
};

struct GoldFlags {
  std::string family = "affine";
  double min_mi_gain = 0.0;
};

std::uint64_t effective_seed(std::uint64_t flag) {
  if (const char* env = std::getenv("STROKESEG_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*env == '\0' || *end != '\0') throw Error(ErrorCode::kConfig, "STROKESEG_SEED must be an unsigned integer");
    return v;
  }
  return flag;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_out) {
  cmd->add_option("--manifest", f.manifest, "Dataset manifest (JSON)");
  if (with_out) cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--case", f.case_id, "Restrict to one case id");
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Seed for FCM restart jitter (STROKESEG_SEED overrides)");
}

void add_gold_source(CLI::App* cmd, CommonFlags& f, GoldFlags& g) {
  cmd->add_option("--gold-dir", f.gold_dir, "Read <case>_gold.pgm from here instead of rebuilding");
  cmd->add_option("--family", g.family, "Registration family for gold construction")
      ->check(CLI::IsMember({"translation", "rigid", "similarity", "affine"}));
  cmd->add_option("--min-mi-gain", g.min_mi_gain, "Refuse cases whose registration gains less mutual information");
}

void add_method(CLI::App* cmd, MethodFlags& m, bool with_params) {
  if (with_params) {
    cmd->add_option("--preset", m.preset, "Named configuration, e.g. table2-otsu");
    cmd->add_option("--params", m.params, "Parameter tuple, e.g. 17,10 or 16,14/0.9991");
    cmd->add_option("--otsu-n", m.otsu_n, "Otsu threshold count");
    cmd->add_option("--otsu-level", m.otsu_level, "Otsu threshold used for binarization (1-based)");
    cmd->add_option("--fcm-c", m.fcm_c, "FCM cluster count");
    cmd->add_option("--fcm-selected", m.fcm_selected, "FCM selected cluster rank (1-based)");
    cmd->add_option("--hc-bins", m.hc_bins, "Hill-climbing histogram bins");
    cmd->add_option("--gc-theta", m.gc_theta, "Growcut strength threshold");
  }
  cmd->add_option("--method", m.method, "otsu, fcm, hillclimb, otsu+gc, fcm+gc or hillclimb+gc");
  cmd->add_option("--otsu-bins", m.otsu_bins, "Otsu histogram bins");
  cmd->add_option("--otsu-domain", m.otsu_domain, "Otsu histogram domain")->check(CLI::IsMember({"brain", "all"}));
  cmd->add_option("--fcm-tol", m.fcm_tol, "FCM stopping tolerance on the objective");
  cmd->add_option("--fcm-max-iter", m.fcm_max_iter, "FCM iteration cap");
  cmd->add_flag("--fcm-per-pixel", m.fcm_per_pixel, "Cluster every brain pixel instead of distinct intensities");
  cmd->add_option("--fcm-mode", m.fcm_mode, "Selected-cluster reading")->check(CLI::IsMember({"atleast", "exact"}));
  cmd->add_option("--hc-rule", m.hc_rule, "Smallest-peak reading")->check(CLI::IsMember({"population", "height"}));
  cmd->add_option("--gc-max-iter", m.gc_max_iter, "Growcut iteration cap");
}

void add_eval(CLI::App* cmd, EvalFlags& e) {
  cmd->add_option("--roi", e.roi, "Comparison region")->check(CLI::IsMember({"brain", "bbox"}));
  cmd->add_option("--roi-margin", e.roi_margin, "Margin around the gold bounding box (bbox roi)");
  cmd->add_option("--specificity", e.specificity, "standard: TN/(TN+FP); literal: FP/(FP+TN)")
      ->check(CLI::IsMember({"standard", "literal"}));
}

MethodConfig method_settings(const MethodFlags& f, std::uint64_t seed) {
  MethodConfig cfg;
  cfg.otsu.bins = f.otsu_bins;
  cfg.otsu.domain = f.otsu_domain == "all" ? HistogramDomain::kAllPixels : HistogramDomain::kBrainOnly;
  cfg.fcm.tol = f.fcm_tol;
  cfg.fcm.max_iter = f.fcm_max_iter;
  cfg.fcm.per_pixel = f.fcm_per_pixel;
  cfg.fcm.seed = seed;
  cfg.fcm_selection = f.fcm_mode == "exact" ? FcmSelection::kExact : FcmSelection::kAtLeast;
  cfg.hc_rule = f.hc_rule == "height" ? SmallestPeakRule::kHeight : SmallestPeakRule::kPopulation;
  cfg.gc_max_iter = f.gc_max_iter;
  if (!f.method.empty()) cfg.method = parse_method(f.method);
  return cfg;
}

// Preset first, then --params, then the individual flags on top.
MethodConfig full_config(const MethodFlags& f, std::uint64_t seed) {
  MethodConfig cfg = method_settings(f, seed);
  if (!f.preset.empty()) {
    const MethodConfig p = preset_config(f.preset);
    if (!f.method.empty() && cfg.method != p.method) {
      throw Error(ErrorCode::kConfig, "--method contradicts preset " + f.preset);
    }
    cfg.method = p.method;
    cfg.params = p.params;
  } else if (f.method.empty()) {
    throw Error(ErrorCode::kConfig, "either --preset or --method is required");
  }
  if (!f.params.empty()) cfg.params = ParameterTuple::parse(f.params);
  const Method base = base_method(cfg.method);
  const std::size_t arity = base == Method::kHillclimb ? 1 : 2;
  if (cfg.params.ints.size() != arity) cfg.params.ints.assign(arity, 0);
  auto set = [&](std::size_t i, int v) {
    if (v != 0) cfg.params.ints[i] = v;
  };
  if (base == Method::kOtsu) {
    set(0, f.otsu_n);
    set(1, f.otsu_level);
  } else if (base == Method::kFcm) {
    set(0, f.fcm_c);
    set(1, f.fcm_selected);
  } else {
    set(0, f.hc_bins);
  }
  if (f.gc_theta >= 0.0) cfg.params.theta = f.gc_theta;
  validate(cfg);
  return cfg;
}

std::vector<CaseSpec> selected_cases(const Manifest& m, const std::string& id) {
  if (id.empty()) return m.cases;
  return {m.find(id)};
}

std::string file_safe(std::string_view method) {
  std::string s(method);
  std::replace(s.begin(), s.end(), '+', '-');
  return s;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + p.string());
  out << text;
}

GoldOptions gold_options(const GoldFlags& g) {
  GoldOptions o;
  o.registration.family = parse_transform_family(g.family);
  o.min_mi_gain = g.min_mi_gain;
  return o;
}

json transform_json(const AffineTransform2D& t) {
  json arr = json::array();
  for (double v : t.row_major()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    arr.push_back(json::parse(buf));
  }
  return arr;
}

// Gold masks and ROIs for every selected case, in manifest order.
std::vector<EvalCase> evaluation_cases(const Manifest& m, const CommonFlags& c, const GoldFlags& g, const EvalFlags& e) {
  const auto specs = selected_cases(m, c.case_id);
  std::vector<EvalCase> out(specs.size());
  const RoiOptions roi{e.roi == "bbox" ? RoiMode::kBoundingBox : RoiMode::kBrain, e.roi_margin};
  const GoldOptions go = gold_options(g);
  parallel_for(specs.size(), c.jobs, [&](std::size_t i) {
    const bool need_flair = c.gold_dir.empty() && !e.score_truth;
    LoadedCase lc = load_case(m, specs[i], need_flair);
    EvalCase ec;
    ec.id = specs[i].id;
    if (e.score_truth) {
      if (!lc.truth) throw Error(ErrorCode::kConfig, specs[i].id + ": manifest has no truth mask");
      ec.gold = *lc.truth;
    } else if (!c.gold_dir.empty()) {
      ec.gold = read_mask(fs::path(c.gold_dir) / (specs[i].id + "_gold.pgm"));
      require_same_shape(ec.gold, lc.dwi, "gold mask does not match the DWI grid");
    } else {
      ec.gold = build_gold(lc, go).gold;
    }
    ec.roi = make_roi(lc.dwi, ec.gold, roi);
    ec.dwi = std::move(lc.dwi);
    out[i] = std::move(ec);
  });
  return out;
}

SpecificityMode specificity_mode(const EvalFlags& e) {
  return e.specificity == "literal" ? SpecificityMode::kLiteral : SpecificityMode::kStandard;
}

// Tuples like "16,14" need quoting inside a CSV row.
std::string csv_params(const ParameterTuple& t) { return '"' + t.to_string() + '"'; }

std::string fmt(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

// ---- phantom ----

struct PhantomFlags {
  std::string out;
  int count = 10;
  std::uint64_t seed = 1;
  bool identity = false;
  double noise = 0.02;
};

int cmd_phantom(const PhantomFlags& f) {
  ensure_dir(f.out);
  auto specs = phantom_series(f.count, f.seed, !f.identity);
  Manifest m;
  m.base_dir = f.out;
  json planted;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].noise_sigma = f.noise;
    const Phantom ph = make_phantom(specs[i]);
    char id[16];
    std::snprintf(id, sizeof id, "ph%02zu", i + 1);
    CaseSpec c;
    c.id = id;
    c.patient = "P" + std::to_string(i / 2 + 1);
    c.day = i % 2 ? 30 : 7;
    c.dwi = c.id + "_dwi.pgm";
    c.flair = c.id + "_flair.pgm";
    c.truth = c.id + "_truth.pgm";
    c.gold_otsu_n = 1;
    c.gold_otsu_level = 1;
    write_pgm(fs::path(f.out) / c.dwi, ph.dwi_raw, 4095);
    write_pgm(fs::path(f.out) / c.flair, ph.flair_raw, 4095);
    write_mask(fs::path(f.out) / *c.truth, ph.truth);
    AffineTransform2D t;
    const auto& a = specs[i].flair_transform;
    t.a = a[0], t.b = a[1], t.tx = a[2], t.c = a[3], t.d = a[4], t.ty = a[5];
    planted[c.id] = transform_json(t);
    m.cases.push_back(std::move(c));
  }
  save_manifest(m, fs::path(f.out) / "manifest.json");
  write_text(fs::path(f.out) / "planted.json", planted.dump(2) + "\n");
  std::cout << "wrote " << specs.size() << " phantom cases to " << f.out << "\n";
  return kExitOk;
}

// ---- goldstd ----

int cmd_goldstd(const CommonFlags& c, const GoldFlags& g, bool keep) {
  const Manifest m = load_manifest(c.manifest);
  ensure_dir(c.out);
  const auto specs = selected_cases(m, c.case_id);
  const GoldOptions go = gold_options(g);
  std::vector<json> rows(specs.size());
  std::vector<std::string> failures(specs.size());
  std::vector<int> codes(specs.size(), kExitOk);
  parallel_for(specs.size(), c.jobs, [&](std::size_t i) {
    try {
      const LoadedCase lc = load_case(m, specs[i], true);
      const GoldResult r = build_gold(lc, go);
      write_mask(fs::path(c.out) / (specs[i].id + "_gold.pgm"), r.gold);
      if (keep) write_mask(fs::path(c.out) / (specs[i].id + "_flair_mask.pgm"), r.flair_mask);
      json row = {{"id", specs[i].id},
                  {"transform", transform_json(r.registration.transform)},
                  {"mi_identity", r.registration.mi_identity},
                  {"mi_final", r.registration.mi_final},
                  {"converged", r.registration.converged},
                  {"gold_pixels", popcount(r.gold)}};
      if (lc.truth) row["dice_vs_truth"] = dice(r.gold, *lc.truth);
      rows[i] = std::move(row);
    } catch (const Error& e) {
      failures[i] = e.what();
      codes[i] = exit_code_for(e.code());
      rows[i] = {{"id", specs[i].id}, {"error", e.what()}};
    }
  });
  json report = json::array();
  int code = kExitOk;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    report.push_back(rows[i]);
    if (!failures[i].empty()) {
      std::cerr << specs[i].id << ": " << failures[i] << "\n";
      code = std::max(code, codes[i]);
    } else {
      std::cout << specs[i].id << ": gold " << rows[i]["gold_pixels"].get<std::size_t>() << " px";
      if (rows[i].contains("dice_vs_truth")) std::cout << ", dice vs truth " << fmt(rows[i]["dice_vs_truth"].get<double>());
      std::cout << "\n";
    }
  }
  write_text(fs::path(c.out) / "goldstd.json", report.dump(2) + "\n");
  return code;
}

// ---- segment ----

int cmd_segment(const CommonFlags& c, const MethodFlags& mf, const GoldFlags& g, const EvalFlags& e, bool keep,
                bool score) {
  const MethodConfig cfg = full_config(mf, effective_seed(c.seed));
  const Manifest m = load_manifest(c.manifest);
  ensure_dir(c.out);
  const auto specs = selected_cases(m, c.case_id);
  const std::string tag = file_safe(to_string(cfg.method));
  std::vector<std::string> lines(specs.size());
  std::vector<std::string> errors(specs.size());
  std::vector<int> codes(specs.size(), kExitOk);
  parallel_for(specs.size(), c.jobs, [&](std::size_t i) {
    const fs::path stem = fs::path(c.out) / (specs[i].id + "_" + tag);
    try {
      const LoadedCase lc = load_case(m, specs[i], false);
      const SegmentResult r = segment(lc.dwi, cfg);
      write_mask(stem.string() + ".pgm", r.mask);
      if (keep && r.seeds) {
        write_mask(stem.string() + "_base.pgm", r.base);
        write_labels(stem.string() + "_seeds.pgm", *r.seeds);
        write_pgm(stem.string() + "_strength.pgm", quantize(r.growcut->strength, 65535), 65535);
      }
      std::ostringstream line;
      line << specs[i].id << ',' << to_string(cfg.method) << ',' << csv_params(cfg.params) << ',' << popcount(r.mask);
      lines[i] = line.str();
    } catch (const Error& e) {
      errors[i] = e.what();
      codes[i] = exit_code_for(e.code());
    }
  });

  std::vector<EvalCase> eval;
  if (score) {
    CommonFlags cc = c;
    eval = evaluation_cases(m, cc, g, e);
  }
  std::ostringstream csv;
  csv << "image,method,params,mask_pixels" << (score ? ",tp,tn,fp,fn,accuracy,sensitivity,specificity" : "") << "\n";
  int code = kExitOk;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!errors[i].empty()) {
      // An invalid candidate is recorded, the batch goes on.
      std::cerr << specs[i].id << ": " << errors[i] << "\n";
      csv << specs[i].id << ',' << to_string(cfg.method) << ',' << csv_params(cfg.params) << ",invalid\n";
      code = std::max(code, codes[i]);
      continue;
    }
    csv << lines[i];
    if (score) {
      const BinaryMask pred = read_mask(fs::path(c.out) / (specs[i].id + "_" + tag + ".pgm"));
      const MetricRecord r = metrics(compare(pred, eval[i].gold, eval[i].roi), specificity_mode(e));
      csv << ',' << r.counts.tp << ',' << r.counts.tn << ',' << r.counts.fp << ',' << r.counts.fn << ','
          << fmt(r.accuracy) << ',' << fmt(r.sensitivity) << ',' << fmt(r.specificity);
      std::cout << specs[i].id << ": acc " << fmt(r.accuracy) << " sens " << fmt(r.sensitivity) << " spec "
                << fmt(r.specificity) << "\n";
    }
    csv << "\n";
  }
  write_text(fs::path(c.out) / ("segment_" + tag + ".csv"), csv.str());
  return code;
}

// ---- sweep / loocv ----

MetricTable run_sweep(const CommonFlags& c, const MethodFlags& mf, const GoldFlags& g, const EvalFlags& e,
                      int sample_every) {
  if (mf.method.empty()) throw Error(ErrorCode::kConfig, "--method is required");
  SweepOptions so;
  so.config = method_settings(mf, effective_seed(c.seed));
  so.specificity = specificity_mode(e);
  so.jobs = c.jobs;
  so.sample_every = sample_every;
  const Manifest m = load_manifest(c.manifest);
  const auto cases = evaluation_cases(m, c, g, e);
  return sweep(cases, parse_method(mf.method), so);
}

void write_summary(const fs::path& p, const MetricTable& t) {
  std::vector<std::size_t> all(t.images.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto agg = aggregate(t, all);
  std::ostringstream out;
  out << "method,params,valid,accuracy,sensitivity,specificity,feasible\n";
  for (const auto& a : agg) {
    const bool feasible = a.valid && a.sensitivity > 0.9 && a.specificity > 0.9;
    out << t.method << ',' << csv_params(a.params) << ',' << (a.valid ? "yes" : "no") << ',' << fmt(a.accuracy) << ','
        << fmt(a.sensitivity) << ',' << fmt(a.specificity) << ',' << (feasible ? "yes" : "no") << "\n";
  }
  write_text(p, out.str());
}

int cmd_sweep(const CommonFlags& c, const MethodFlags& mf, const GoldFlags& g, const EvalFlags& e, int sample_every) {
  ensure_dir(c.out);
  const MetricTable t = run_sweep(c, mf, g, e, sample_every);
  const std::string tag = file_safe(t.method);
  {
    std::ofstream out(fs::path(c.out) / ("sweep_" + tag + ".csv"));
    if (!out) throw Error(ErrorCode::kIo, "cannot write sweep CSV");
    write_metric_csv(out, t);
  }
  write_summary(fs::path(c.out) / ("sweep_" + tag + "_summary.csv"), t);
  std::size_t invalid = 0;
  for (const auto& cell : t.cells) invalid += cell.record ? 0 : 1;
  const Method method = parse_method(t.method);
  std::cout << t.method << ": " << t.tuples.size() << " of " << sweep_grid(method).size() << " tuples per image ("
            << base_grid(method).size() << " base candidates), " << t.images.size() << " images, " << t.cells.size()
            << " results, " << invalid << " invalid\n";
  return kExitOk;
}

int cmd_loocv(const CommonFlags& c, const MethodFlags& mf, const GoldFlags& g, const EvalFlags& e, int sample_every) {
  ensure_dir(c.out);
  const MetricTable t = run_sweep(c, mf, g, e, sample_every);
  const LoocvResult r = loocv(t);
  const std::string tag = file_safe(t.method);
  {
    std::ofstream out(fs::path(c.out) / ("loocv_" + tag + ".csv"));
    if (!out) throw Error(ErrorCode::kIo, "cannot write LOOCV CSV");
    write_loocv_csv(out, r);
  }
  std::ostringstream row;
  row << "method,accuracy,sensitivity,specificity\n"
      << t.method << ',' << r.summary_cell(r.accuracy) << ',' << r.summary_cell(r.sensitivity) << ','
      << r.summary_cell(r.specificity) << "\n";
  write_text(fs::path(c.out) / ("loocv_" + tag + "_summary.csv"), row.str());
  for (const auto& f : r.folds) {
    std::cout << f.held_out << ": " << f.selection.chosen.params.to_string()
              << (f.selection.feasible ? "" : " (infeasible)") << "\n";
  }
  std::cout << t.method << "  " << r.summary_cell(r.accuracy) << "  " << r.summary_cell(r.sensitivity) << "  "
            << r.summary_cell(r.specificity) << "\n";
  return r.any_infeasible ? kExitInfeasible : kExitOk;
}

// ---- bench ----

int cmd_bench(const CommonFlags& c, const MethodFlags& mf, int runs) {
  const MethodConfig cfg = full_config(mf, effective_seed(c.seed));
  const Manifest m = load_manifest(c.manifest);
  const CaseSpec& spec = c.case_id.empty() ? m.cases.front() : m.find(c.case_id);
  const LoadedCase lc = load_case(m, spec, false);
  const BenchResult b = bench(lc.dwi, cfg, runs);
  json report = {{"case", spec.id}, {"config", b.config}, {"runs", runs}, {"machine", b.machine},
                 {"deterministic", b.deterministic}};
  for (const auto& s : b.stages) {
    report["stages"][s.stage] = {{"median_seconds", s.median_seconds}, {"runs_seconds", s.runs}};
    std::cout << s.stage << ": median " << s.median_seconds << " s over " << s.runs.size() << " runs\n";
  }
  std::cout << "machine: " << b.machine << "\n";
  if (!c.out.empty()) {
    ensure_dir(c.out);
    write_text(fs::path(c.out) / "bench.json", report.dump(2) + "\n");
  }
  return kExitOk;
}

// ---- report ----

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + p.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kFormat, p.string() + " is empty");
  const auto header = split_csv_line(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cols.size(); ++i) row[header[i]] = cols[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

// Per-tuple mean±std over images for the requested tuples
// (default: the method's preset tuples).
int cmd_report(const std::vector<std::string>& sweeps, const std::vector<std::string>& loocvs,
               const std::vector<std::string>& tuples) {
  if (sweeps.empty() && loocvs.empty()) throw Error(ErrorCode::kConfig, "give --sweep and/or --loocv files");
  for (const auto& file : sweeps) {
    const auto rows = read_csv(file);
    if (rows.empty()) continue;
    const std::string method = rows.front().at("method");
    std::vector<std::string> wanted = tuples;
    if (wanted.empty()) {
      for (const auto& p : presets()) {
        if (to_string(p.method) == method) wanted.emplace_back(p.params);
      }
    }
    std::cout << "method,params,accuracy,sensitivity,specificity,images\n";
    for (const auto& w : wanted) {
      const std::string key = ParameterTuple::parse(w).to_string();
      std::vector<double> acc, sens, spec;
      std::size_t invalid = 0;
      for (const auto& r : rows) {
        if (r.at("params") != key) continue;
        if (r.at("status") != "ok" || r.at("accuracy") == "NA" || r.at("sensitivity") == "NA" ||
            r.at("specificity") == "NA") {
          ++invalid;
          continue;
        }
        acc.push_back(std::stod(r.at("accuracy")));
        sens.push_back(std::stod(r.at("sensitivity")));
        spec.push_back(std::stod(r.at("specificity")));
      }
      if (acc.empty() || invalid > 0) {
        std::cout << method << ',' << key << ",-,-,-," << acc.size() << "\n";
        continue;
      }
      std::cout << method << ',' << key << ',' << format_mean_std(mean_std(acc)) << ','
                << format_mean_std(mean_std(sens)) << ',' << format_mean_std(mean_std(spec)) << ',' << acc.size()
                << "\n";
    }
  }
  for (const auto& file : loocvs) {
    const auto rows = read_csv(file);
    if (rows.empty()) continue;
    std::vector<double> acc, sens, spec;
    bool infeasible = false;
    for (const auto& r : rows) {
      if (r.at("feasible") != "yes") infeasible = true;
      if (r.at("accuracy") != "NA") acc.push_back(std::stod(r.at("accuracy")));
      if (r.at("sensitivity") != "NA") sens.push_back(std::stod(r.at("sensitivity")));
      if (r.at("specificity") != "NA") spec.push_back(std::stod(r.at("specificity")));
    }
    auto cell = [&](const std::vector<double>& v) {
      return infeasible || v.empty() ? std::string("-") : format_mean_std(mean_std(v));
    };
    std::cout << rows.front().at("method") << "  " << cell(acc) << "  " << cell(sens) << "  " << cell(spec) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Stroke lesion segmentation on diffusion-weighted MRI"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "strokeseg 0.1.0");

  CommonFlags common;
  MethodFlags method;
  EvalFlags eval;
  GoldFlags gold;
  bool keep = false;
  bool score = false;
  int sample_every = 1;
  int runs = 5;

  PhantomFlags ph;
  auto* phantom = app.add_subcommand("phantom", "Write a synthetic study (PGM images + manifest)");
  phantom->add_option("--out", ph.out, "Output directory")->required();
  phantom->add_option("--count", ph.count, "Number of cases")->check(CLI::PositiveNumber);
  phantom->add_option("--seed", ph.seed, "Generator seed");
  phantom->add_option("--noise", ph.noise, "Noise sigma in normalized units");
  phantom->add_flag("--identity", ph.identity, "Keep FLAIR aligned with DWI (no planted affine)");

  auto* goldstd = app.add_subcommand("goldstd", "Build gold-standard masks from FLAIR");
  add_common(goldstd, common, true);
  goldstd->add_option("--family", gold.family, "Registration family")
      ->check(CLI::IsMember({"translation", "rigid", "similarity", "affine"}));
  goldstd->add_option("--min-mi-gain", gold.min_mi_gain, "Refuse cases gaining less mutual information");
  goldstd->add_flag("--keep-intermediates", keep, "Also write the FLAIR-space Otsu mask");

  auto* seg = app.add_subcommand("segment", "Segment cases with one configuration");
  add_common(seg, common, true);
  add_method(seg, method, true);
  add_eval(seg, eval);
  add_gold_source(seg, common, gold);
  seg->add_flag("--keep-intermediates", keep, "Write base mask, seed labels and strength field");
  seg->add_flag("--score", score, "Score masks against the gold standard");
  seg->add_flag("--score-truth", eval.score_truth, "Score against the manifest truth masks instead");

  auto* sw = app.add_subcommand("sweep", "Evaluate every parameter tuple of a method");
  add_common(sw, common, true);
  add_method(sw, method, false);
  add_eval(sw, eval);
  add_gold_source(sw, common, gold);
  sw->add_flag("--score-truth", eval.score_truth, "Score against the manifest truth masks");
  sw->add_option("--sample-every", sample_every, "Evaluate every k-th base candidate")->check(CLI::PositiveNumber);

  auto* lo = app.add_subcommand("loocv", "Leave-one-out parameter selection under the sensitivity/specificity constraint");
  add_common(lo, common, true);
  add_method(lo, method, false);
  add_eval(lo, eval);
  add_gold_source(lo, common, gold);
  lo->add_flag("--score-truth", eval.score_truth, "Score against the manifest truth masks");
  lo->add_option("--sample-every", sample_every, "Evaluate every k-th base candidate")->check(CLI::PositiveNumber);

  auto* be = app.add_subcommand("bench", "Time the stages of one configuration");
  be->add_option("--manifest", common.manifest, "Dataset manifest (JSON)");
  be->add_option("--case", common.case_id, "Case id (default: first case)");
  be->add_option("--out", common.out, "Write bench.json here");
  be->add_option("--runs", runs, "Timed runs")->check(CLI::PositiveNumber);
  be->add_option("--seed", common.seed, "FCM jitter seed");
  add_method(be, method, true);

  std::vector<std::string> rep_sweeps, rep_loocv, rep_tuples;
  auto* rep = app.add_subcommand("report", "Summarize sweep and LOOCV CSVs as result tables");
  rep->add_option("--sweep", rep_sweeps, "Per-image sweep CSV(s)");
  rep->add_option("--loocv", rep_loocv, "LOOCV fold CSV(s)");
  rep->add_option("--params", rep_tuples, "Tuples to tabulate (default: presets)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*phantom) return cmd_phantom(ph);
    if (*goldstd) return cmd_goldstd(common, gold, keep);
    if (*seg) return cmd_segment(common, method, gold, eval, keep, score || eval.score_truth);
    if (*sw) return cmd_sweep(common, method, gold, eval, sample_every);
    if (*lo) return cmd_loocv(common, method, gold, eval, sample_every);
    if (*be) return cmd_bench(common, method, runs);
    if (*rep) return cmd_report(rep_sweeps, rep_loocv, rep_tuples);
  } catch (const Error& e) {
    std::cerr << "strokeseg: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "strokeseg: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace strokeseg::cli
