#include "strokeseg/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace strokeseg {

ConfusionCounts compare(const BinaryMask& pred, const BinaryMask& gold, const BinaryMask& roi) {
  require_same_shape(pred, gold, "prediction and gold masks differ in shape");
  require_same_shape(pred, roi, "prediction and roi masks differ in shape");
  ConfusionCounts c;
  for (std::size_t i = 0; i < roi.size(); ++i) {
    if (!roi[i]) continue;
    const bool p = pred[i] != 0;
    const bool g = gold[i] != 0;
    if (p && g) ++c.tp;
    else if (!p && !g) ++c.tn;
    else if (p) ++c.fp;
    else ++c.fn;
  }
  if (c.total() == 0) throw Error(ErrorCode::kEmptyRoi, "region of interest is empty");
  return c;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v, 6) : std::string("NA");
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

MetricRecord metrics(const ConfusionCounts& c, SpecificityMode mode) {
  MetricRecord r;
  r.counts = c;
  r.accuracy = ratio(c.tp + c.tn, c.total());
  r.sensitivity = ratio(c.tp, c.tp + c.fn);
  r.specificity = mode == SpecificityMode::kStandard ? ratio(c.tn, c.tn + c.fp) : ratio(c.fp, c.fp + c.tn);
  return r;
}

std::string ParameterTuple::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < ints.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ints[i]);
  }
  if (theta) out += "/" + format_double(*theta, 4);
  return out;
}

ParameterTuple ParameterTuple::parse(std::string_view text) {
  ParameterTuple t;
  const auto slash = text.find('/');
  std::string_view ints = text.substr(0, slash);
  auto bad = [&] { return Error(ErrorCode::kConfig, "malformed parameter tuple '" + std::string(text) + "'"); };
  while (!ints.empty()) {
    const auto comma = ints.find(',');
    const std::string_view part = ints.substr(0, comma);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) throw bad();
    t.ints.push_back(v);
    if (comma == std::string_view::npos) break;
    ints.remove_prefix(comma + 1);
    if (ints.empty()) throw bad();
  }
  if (t.ints.empty()) throw bad();
  if (slash != std::string_view::npos) {
    const std::string th(text.substr(slash + 1));
    char* end = nullptr;
    const double v = std::strtod(th.c_str(), &end);
    if (th.empty() || end != th.c_str() + th.size() || !(v >= 0.0 && v <= 1.0)) throw bad();
    t.theta = v;
  }
  return t;
}

std::partial_ordering operator<=>(const ParameterTuple& a, const ParameterTuple& b) {
  if (auto c = std::lexicographical_compare_three_way(a.ints.begin(), a.ints.end(), b.ints.begin(), b.ints.end());
      c != 0) {
    return c;
  }
  if (a.theta.has_value() != b.theta.has_value()) return a.theta.has_value() ? std::partial_ordering::greater : std::partial_ordering::less;
  if (!a.theta) return std::partial_ordering::equivalent;
  return *a.theta <=> *b.theta;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kOtsu: return "otsu";
    case Method::kFcm: return "fcm";
    case Method::kHillclimb: return "hillclimb";
    case Method::kOtsuGrowcut: return "otsu+gc";
    case Method::kFcmGrowcut: return "fcm+gc";
    case Method::kHillclimbGrowcut: return "hillclimb+gc";
  }
  return "otsu";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::kOtsu, Method::kFcm, Method::kHillclimb, Method::kOtsuGrowcut, Method::kFcmGrowcut,
                 Method::kHillclimbGrowcut}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::kConfig, "unknown method '" + std::string(name) + "'");
}

bool uses_growcut(Method m) noexcept {
  return m == Method::kOtsuGrowcut || m == Method::kFcmGrowcut || m == Method::kHillclimbGrowcut;
}

Method base_method(Method m) noexcept {
  switch (m) {
    case Method::kOtsuGrowcut: return Method::kOtsu;
    case Method::kFcmGrowcut: return Method::kFcm;
    case Method::kHillclimbGrowcut: return Method::kHillclimb;
    default: return m;
  }
}

std::vector<double> growcut_thresholds() {
  std::vector<double> out;
  for (int k = 0; k < 10; ++k) out.push_back((9990 + k) / 10000.0);
  return out;
}

std::vector<ParameterTuple> base_grid(Method base) {
  std::vector<ParameterTuple> out;
  switch (base_method(base)) {
    case Method::kOtsu:
      for (int n = 2; n <= 20; ++n)
        for (int level = 1; level <= n; ++level) out.push_back({{n, level}, std::nullopt});
      break;
    case Method::kFcm:
      for (int c = 2; c <= 30; ++c)
        for (int sel = 1; sel <= c; ++sel) out.push_back({{c, sel}, std::nullopt});
      break;
    default:
      for (int bins = 2; bins <= 30; ++bins) out.push_back({{bins}, std::nullopt});
      break;
  }
  return out;
}

std::vector<ParameterTuple> sweep_grid(Method m) {
  std::vector<ParameterTuple> base = base_grid(m);
  if (!uses_growcut(m)) return base;
  std::vector<ParameterTuple> out;
  out.reserve(base.size() * 10);
  for (const auto& b : base) {
    for (double theta : growcut_thresholds()) out.push_back({b.ints, theta});
  }
  return out;
}

Selection select_best(std::span<const Aggregate> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates to select from");
  auto better = [](const Aggregate& a, const Aggregate& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.sensitivity != b.sensitivity) return a.sensitivity > b.sensitivity;
    return a.params < b.params;
  };
  auto feasible = [](const Aggregate& a) { return a.valid && a.sensitivity > 0.9 && a.specificity > 0.9; };
  const Aggregate* best = nullptr;
  for (const auto& a : candidates) {
    if (feasible(a) && (!best || better(a, *best))) best = &a;
  }
  if (best) return {*best, true};
  for (const auto& a : candidates) {
    if (a.valid && (!best || better(a, *best))) best = &a;
  }
  // Every tuple invalid somewhere: fall back to the overall order.
  if (!best) {
    for (const auto& a : candidates) {
      if (!best || better(a, *best)) best = &a;
    }
  }
  return {*best, false};
}

std::vector<Aggregate> aggregate(const MetricTable& table, std::span<const std::size_t> images) {
  std::vector<Aggregate> out;
  out.reserve(table.tuples.size());
  for (std::size_t t = 0; t < table.tuples.size(); ++t) {
    Aggregate a;
    a.params = table.tuples[t];
    double acc = 0, sens = 0, spec = 0;
    std::size_t n = 0;
    for (std::size_t img : images) {
      const auto& cell = table.at(img, t);
      if (!cell.record || !cell.record->accuracy || !cell.record->sensitivity || !cell.record->specificity) {
        a.valid = false;
        if (!cell.record || !cell.record->accuracy) continue;
      }
      acc += cell.record->accuracy.value_or(0.0);
      sens += cell.record->sensitivity.value_or(0.0);
      spec += cell.record->specificity.value_or(0.0);
      ++n;
    }
    if (n > 0) {
      a.accuracy = acc / n;
      a.sensitivity = sens / n;
      a.specificity = spec / n;
    } else {
      a.valid = false;
    }
    out.push_back(std::move(a));
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd m;
  if (values.empty()) return m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / values.size());
  return m;
}

std::string format_mean_std(const MeanStd& m) {
  return format_double(100.0 * m.mean, 2) + "±" + format_double(100.0 * m.std, 2);
}

std::string LoocvResult::summary_cell(const std::optional<MeanStd>& m) const {
  if (any_infeasible || !m) return "-";
  return format_mean_std(*m);
}

LoocvResult loocv(const MetricTable& table) {
  const std::size_t n = table.images.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "leave-one-out needs at least two images");
  if (table.tuples.empty()) throw Error(ErrorCode::kInvalidArgument, "no parameter tuples");
  LoocvResult res;
  res.method = table.method;
  std::vector<double> acc, sens, spec;
  for (std::size_t held = 0; held < n; ++held) {
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != held) train.push_back(i);
    }
    const auto aggregates = aggregate(table, train);
    Fold fold;
    fold.held_out = table.images[held];
    fold.selection = select_best(aggregates);
    const auto it = std::find(table.tuples.begin(), table.tuples.end(), fold.selection.chosen.params);
    const auto& cell = table.at(held, static_cast<std::size_t>(it - table.tuples.begin()));
    fold.held_out_metrics = cell.record;
    if (!fold.selection.feasible) res.any_infeasible = true;
    if (cell.record) {
      if (cell.record->accuracy) acc.push_back(*cell.record->accuracy);
      if (cell.record->sensitivity) sens.push_back(*cell.record->sensitivity);
      if (cell.record->specificity) spec.push_back(*cell.record->specificity);
    }
    res.folds.push_back(std::move(fold));
  }
  if (!acc.empty()) res.accuracy = mean_std(acc);
  if (!sens.empty()) res.sensitivity = mean_std(sens);
  if (!spec.empty()) res.specificity = mean_std(spec);
  return res;
}

void write_metric_csv(std::ostream& out, const MetricTable& table) {
  out << "method,params,image,tp,tn,fp,fn,accuracy,sensitivity,specificity,status\n";
  for (std::size_t i = 0; i < table.images.size(); ++i) {
    for (std::size_t t = 0; t < table.tuples.size(); ++t) {
      const auto& cell = table.at(i, t);
      out << csv_quote(table.method) << ',' << csv_quote(table.tuples[t].to_string()) << ',' << csv_quote(table.images[i]) << ',';
      if (cell.record) {
        const auto& r = *cell.record;
        out << r.counts.tp << ',' << r.counts.tn << ',' << r.counts.fp << ',' << r.counts.fn << ','
            << format_optional(r.accuracy) << ',' << format_optional(r.sensitivity) << ','
            << format_optional(r.specificity) << ",ok\n";
      } else {
        out << ",,,,,,," << csv_quote("invalid: " + cell.error) << '\n';
      }
    }
  }
}

void write_loocv_csv(std::ostream& out, const LoocvResult& result) {
  out << "method,held_out,params,feasible,accuracy,sensitivity,specificity\n";
  for (const auto& f : result.folds) {
    out << csv_quote(result.method) << ',' << csv_quote(f.held_out) << ',' << csv_quote(f.selection.chosen.params.to_string()) << ','
        << (f.selection.feasible ? "yes" : "no") << ',';
    if (f.held_out_metrics) {
      out << format_optional(f.held_out_metrics->accuracy) << ',' << format_optional(f.held_out_metrics->sensitivity)
          << ',' << format_optional(f.held_out_metrics->specificity) << '\n';
    } else {
      out << "NA,NA,NA\n";
    }
  }
}

}  // namespace strokeseg
