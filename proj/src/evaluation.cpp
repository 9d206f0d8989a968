#include "hdp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "hdp/error.hpp"

namespace hdp {

double ErrorCounts::percent() const {
  if (evaluable == 0) throw DataError("no evaluable pixels");
  return 100.0 * static_cast<double>(erroneous) / static_cast<double>(evaluable);
}

ErrorCounts count_errors(const DisparityMap& pred, const DisparityMap& gt, const OcclusionMask* occlusion,
                         double threshold) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw DataError(fmt::format("prediction is {}x{}, ground truth {}x{}", pred.width, pred.height, gt.width,
                                gt.height));
  if (occlusion && (occlusion->width != gt.width || occlusion->height != gt.height))
    throw DataError("occlusion mask does not match the ground truth size");
  ErrorCounts counts;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (!gt.valid[i] || (occlusion && occlusion->occluded[i])) continue;
    ++counts.evaluable;
    if (!pred.valid[i] || std::abs(pred.values[i] - gt.values[i]) >= threshold) ++counts.erroneous;
  }
  return counts;
}

double error_rate(const DisparityMap& pred, const DisparityMap& gt, const OcclusionMask* occlusion,
                  double threshold) {
  return count_errors(pred, gt, occlusion, threshold).percent();
}

double search_ratio(const DisparityForest& forest) {
  const double space = static_cast<double>(forest.forest.node_count()) * (forest.d_max + 1);
  return 100.0 * static_cast<double>(forest.total_candidates()) / space;
}

std::vector<double> search_ratios(const std::vector<LayerReport>& layers) {
  int top = 0;
  for (const auto& l : layers) top = std::max(top, l.level);
  std::vector<double> r(static_cast<std::size_t>(top) + 1, 100.0);
  for (const auto& l : layers) r[l.level] = 100.0 * l.search_ratio;
  return r;
}

OcclusionMask occlusion_from_gt(const DisparityMap& gt_left, const DisparityMap& gt_right) {
  if (gt_left.width != gt_right.width || gt_left.height != gt_right.height)
    throw DataError("left and right ground truths differ in size");
  OcclusionMask mask{gt_left.width, gt_left.height, std::vector<std::uint8_t>(gt_left.pixel_count(), 0)};
  for (int y = 0; y < gt_left.height; ++y) {
    for (int x = 0; x < gt_left.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * gt_left.width + x;
      if (!gt_left.valid[i]) {
        mask.occluded[i] = 1;
        continue;
      }
      const int xr = x - gt_left.values[i];
      if (xr < 0 || xr >= gt_right.width) {
        mask.occluded[i] = 1;
        continue;
      }
      const std::size_t j = static_cast<std::size_t>(y) * gt_right.width + xr;
      if (!gt_right.valid[j] || std::abs(gt_left.values[i] - gt_right.values[j]) > 1) mask.occluded[i] = 1;
    }
  }
  return mask;
}

StageSeconds stage_seconds(const MatchResult& result) {
  StageSeconds s;
  for (const auto& l : result.layers) {
    s.prior += l.prior_seconds;
    s.prediction += l.prediction_seconds;
    s.forest += l.forest_seconds;
    s.cost += l.cost_seconds;
    s.aggregation += l.aggregation_seconds;
    s.wta += l.wta_seconds;
  }
  s.total = result.seconds;
  return s;
}

ErrorReport evaluate_prediction(const std::string& pair, const std::string& method, const DisparityMap& pred,
                                const DisparityMap& gt, const OcclusionMask* occlusion) {
  const ErrorCounts e1 = count_errors(pred, gt, occlusion, 1.0);
  const ErrorCounts e2 = count_errors(pred, gt, occlusion, 2.0);
  ErrorReport r;
  r.pair = pair;
  r.method = method;
  r.evaluable = e1.evaluable;
  r.erroneous_1 = e1.erroneous;
  r.erroneous_2 = e2.erroneous;
  r.err_ge_1 = e1.percent();
  r.err_ge_2 = e2.percent();
  return r;
}

std::string Method::name() const { return (hdp ? "hdp+" : "") + to_string(kind); }

Method parse_method(const std::string& name) {
  std::string rest = name;
  Method m;
  if (rest.rfind("hdp+", 0) == 0) {
    m.hdp = true;
    rest = rest.substr(4);
  }
  m.kind = parse_tree_kind(rest);
  return m;
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> methods;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) methods.push_back(parse_method(item));
  if (methods.empty()) throw ConfigError("no methods given");
  return methods;
}

MatchResult run_method(const StereoPair& pair, const Method& method, const GmmModel& model, MatchParams params) {
  params.ordering.kind = method.kind;
  return method.hdp ? run_hdp_pipeline(pair, model, params) : run_baseline_pipeline(pair, params);
}

EvalPair load_eval_pair(const DatasetEntry& entry, int gt_scale, int d_max) {
  if (!entry.gt_left) throw DataError("pair '" + entry.name + "' has no left ground truth");
  EvalPair p;
  GroundTruthOptions options{gt_scale, true, d_max > 0 ? d_max : -1};
  p.gt = load_ground_truth(*entry.gt_left, options);
  const int range = d_max > 0 ? d_max : std::max(1, p.gt.d_max);
  p.gt.d_max = range;
  p.stereo = load_stereo_pair(entry.left, entry.right, range, entry.name);
  if (p.gt.width != p.stereo.left.width || p.gt.height != p.stereo.left.height)
    throw DataError("pair '" + entry.name + "': ground truth size differs from the images");
  if (entry.occlusion) {
    p.occlusion = load_occlusion_mask(*entry.occlusion);
  } else if (entry.gt_right) {
    options.d_max = range;
    p.occlusion = occlusion_from_gt(p.gt, load_ground_truth(*entry.gt_right, options));
  } else {
    p.occlusion = {p.gt.width, p.gt.height, std::vector<std::uint8_t>(p.gt.pixel_count(), 0)};
  }
  return p;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<ErrorReport> bench(const std::vector<EvalPair>& pairs, const std::vector<Method>& methods,
                               const GmmModel& model, const MatchParams& params, const BenchOptions& options) {
  if (options.runs < 1) throw ConfigError("bench needs at least one run");
  std::vector<const EvalPair*> sorted;
  for (const auto& p : pairs) sorted.push_back(&p);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const EvalPair* a, const EvalPair* b) { return a->stereo.name < b->stereo.name; });

  std::vector<ErrorReport> rows;
  for (const EvalPair* p : sorted) {
    const std::size_t first = rows.size();
    for (const Method& m : methods) {
      std::vector<double> totals;
      MatchResult last;
      for (int run = 0; run < options.runs; ++run) {
        last = run_method(p->stereo, m, model, params);
        totals.push_back(last.seconds);
      }
      ErrorReport r = evaluate_prediction(p->stereo.name, m.name(), last.disparity, p->gt, &p->occlusion);
      r.seconds = stage_seconds(last);
      r.seconds.total = median(totals);
      r.search_ratios = search_ratios(last.layers);
      if (options.output_dir) {
        std::filesystem::create_directories(*options.output_dir);
        save_disparity_artifacts(last.disparity, *options.output_dir / (p->stereo.name + "_" + m.name()),
                                 {&p->gt, &p->occlusion, 1});
      }
      rows.push_back(std::move(r));
    }
    for (std::size_t i = first; i < rows.size(); ++i) {
      const Method m = methods[i - first];
      if (!m.hdp) continue;
      for (std::size_t j = first; j < rows.size(); ++j) {
        if (methods[j - first] == m.baseline()) {
          rows[i].baseline = rows[j].method;
          rows[i].speedup = rows[j].seconds.total / std::max(rows[i].seconds.total, 1e-12);
        }
      }
    }
  }
  return rows;
}

std::vector<ErrorReport> average_by_method(const std::vector<ErrorReport>& reports) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ErrorReport*>> groups;
  for (const auto& r : reports) {
    if (!groups.count(r.method)) order.push_back(r.method);
    groups[r.method].push_back(&r);
  }
  std::vector<ErrorReport> out;
  for (const auto& name : order) {
    const auto& g = groups[name];
    const double n = static_cast<double>(g.size());
    ErrorReport avg;
    avg.pair = "average";
    avg.method = name;
    avg.baseline = g.front()->baseline;
    double speedup = 0.0;
    bool has_speedup = true;
    for (const ErrorReport* r : g) {
      avg.err_ge_1 += r->err_ge_1 / n;
      avg.err_ge_2 += r->err_ge_2 / n;
      avg.evaluable += r->evaluable;
      avg.erroneous_1 += r->erroneous_1;
      avg.erroneous_2 += r->erroneous_2;
      avg.seconds.prior += r->seconds.prior / n;
      avg.seconds.prediction += r->seconds.prediction / n;
      avg.seconds.forest += r->seconds.forest / n;
      avg.seconds.cost += r->seconds.cost / n;
      avg.seconds.aggregation += r->seconds.aggregation / n;
      avg.seconds.wta += r->seconds.wta / n;
      avg.seconds.total += r->seconds.total / n;
      if (avg.search_ratios.size() < r->search_ratios.size()) avg.search_ratios.resize(r->search_ratios.size());
      for (std::size_t l = 0; l < r->search_ratios.size(); ++l) avg.search_ratios[l] += r->search_ratios[l] / n;
      if (r->speedup) speedup += *r->speedup / n;
      else has_speedup = false;
    }
    if (has_speedup) avg.speedup = speedup;
    out.push_back(std::move(avg));
  }
  return out;
}

void write_reports_csv(const std::vector<ErrorReport>& reports, std::ostream& out) {
  std::size_t levels = 0;
  for (const auto& r : reports) levels = std::max(levels, r.search_ratios.size());
  out << "pair,method,err_ge_1,err_ge_2,evaluable,erroneous_1,erroneous_2,"
         "prior_s,prediction_s,forest_s,cost_s,aggregation_s,wta_s,total_s,baseline,speedup";
  for (std::size_t l = 0; l < levels; ++l) out << ",R_" << l;
  out << '\n';
  for (const auto& r : reports) {
    out << fmt::format("{},{},{:.4f},{:.4f},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},", r.pair,
                       r.method, r.err_ge_1, r.err_ge_2, r.evaluable, r.erroneous_1, r.erroneous_2, r.seconds.prior,
                       r.seconds.prediction, r.seconds.forest, r.seconds.cost, r.seconds.aggregation, r.seconds.wta,
                       r.seconds.total, r.baseline);
    if (r.speedup) out << fmt::format("{:.4f}", *r.speedup);
    for (std::size_t l = 0; l < levels; ++l) {
      out << ',';
      if (l < r.search_ratios.size()) out << fmt::format("{:.4f}", r.search_ratios[l]);
    }
    out << '\n';
  }
}

void write_reports_csv(const std::vector<ErrorReport>& reports, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_reports_csv(reports, out);
}

std::string report_json(const ErrorReport& r) {
  nlohmann::json j = {
      {"pair", r.pair},
      {"method", r.method},
      {"err_ge_1", r.err_ge_1},
      {"err_ge_2", r.err_ge_2},
      {"evaluable", r.evaluable},
      {"erroneous_1", r.erroneous_1},
      {"erroneous_2", r.erroneous_2},
      {"seconds",
       {{"prior", r.seconds.prior},
        {"prediction", r.seconds.prediction},
        {"forest", r.seconds.forest},
        {"cost", r.seconds.cost},
        {"aggregation", r.seconds.aggregation},
        {"wta", r.seconds.wta},
        {"total", r.seconds.total}}},
      {"search_ratios", r.search_ratios},
  };
  if (!r.baseline.empty()) j["baseline"] = r.baseline;
  if (r.speedup) j["speedup"] = *r.speedup;
  return j.dump();
}

void write_reports_jsonl(const std::vector<ErrorReport>& reports, std::ostream& out) {
  for (const auto& r : reports) out << report_json(r) << '\n';
}

}  // namespace hdp
