#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hdp/hdp_forest.hpp"
#include "hdp/hdp_model.hpp"
#include "hdp/pipeline.hpp"
#include "hdp/raster_io.hpp"

namespace hdp {

struct ErrorCounts {
  std::size_t evaluable = 0;
  std::size_t erroneous = 0;

  double percent() const;
};

/// Counts non-occluded, GT-valid pixels with |pred - gt| >= threshold.
/// `occlusion` may be null. Throws DataError on a shape mismatch.
ErrorCounts count_errors(const DisparityMap& pred, const DisparityMap& gt, const OcclusionMask* occlusion,
                         double threshold);

/// Error rate in percent. Throws DataError when no pixel is evaluable.
double error_rate(const DisparityMap& pred, const DisparityMap& gt, const OcclusionMask* occlusion,
                  double threshold);

/// Percentage of the full search space kept by a disparity forest.
double search_ratio(const DisparityForest& forest);

/// Per-level R_l in percent, indexed by level.
std::vector<double> search_ratios(const std::vector<LayerReport>& layers);

/// Occluded iff the left pixel's match falls off-image or the two ground
/// truths disagree there by more than one pixel. Invalid GT counts as occluded.
OcclusionMask occlusion_from_gt(const DisparityMap& gt_left, const DisparityMap& gt_right);

struct StageSeconds {
  double prior = 0.0;
  double prediction = 0.0;
  double forest = 0.0;
  double cost = 0.0;
  double aggregation = 0.0;
  double wta = 0.0;
  double total = 0.0;
};

StageSeconds stage_seconds(const MatchResult& result);

struct ErrorReport {
  std::string pair;
  std::string method;
  double err_ge_1 = 0.0;
  double err_ge_2 = 0.0;
  std::size_t evaluable = 0;
  std::size_t erroneous_1 = 0;
  std::size_t erroneous_2 = 0;
  StageSeconds seconds;
  std::vector<double> search_ratios;  // percent, by level
  std::string baseline;               // empty when no baseline was run
  std::optional<double> speedup;
};

ErrorReport evaluate_prediction(const std::string& pair, const std::string& method, const DisparityMap& pred,
                                const DisparityMap& gt, const OcclusionMask* occlusion);

/// A matcher as named on the command line: "mst", "rt", "hdp+mst", "hdp+rt".
struct Method {
  TreeKind kind = TreeKind::Mst;
  bool hdp = false;

  std::string name() const;
  Method baseline() const { return {kind, false}; }
  friend bool operator==(const Method&, const Method&) = default;
};

Method parse_method(const std::string& name);
std::vector<Method> parse_methods(const std::string& list);

MatchResult run_method(const StereoPair& pair, const Method& method, const GmmModel& model, MatchParams params);

/// A loaded dataset pair with everything evaluation needs.
struct EvalPair {
  StereoPair stereo;
  DisparityMap gt;
  OcclusionMask occlusion;
};

/// Loads one dataset entry; the mask comes from the dataset when present and
/// from the GT cross-check otherwise. `d_max` <= 0 derives it from the GT.
EvalPair load_eval_pair(const DatasetEntry& entry, int gt_scale, int d_max);

struct BenchOptions {
  int runs = 3;
  /// Optional directory for per-method disparity maps.
  std::optional<std::filesystem::path> output_dir;
};

/// Runs every method on every pair; wall time is the median of `runs`
/// repetitions and excludes file I/O. HDP methods get a speedup against their
/// plain counterpart when that is also in `methods`. Rows are ordered by pair
/// name, then by the order of `methods`.
std::vector<ErrorReport> bench(const std::vector<EvalPair>& pairs, const std::vector<Method>& methods,
                               const GmmModel& model, const MatchParams& params, const BenchOptions& options = {});

/// Per-method averages over pairs, in first-appearance order.
std::vector<ErrorReport> average_by_method(const std::vector<ErrorReport>& reports);

void write_reports_csv(const std::vector<ErrorReport>& reports, std::ostream& out);
void write_reports_csv(const std::vector<ErrorReport>& reports, const std::filesystem::path& path);
std::string report_json(const ErrorReport& report);
void write_reports_jsonl(const std::vector<ErrorReport>& reports, std::ostream& out);

}  // namespace hdp
