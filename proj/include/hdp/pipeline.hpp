#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hdp/aggregation.hpp"
#include "hdp/cost_volume.hpp"
#include "hdp/hdp_forest.hpp"
#include "hdp/hdp_model.hpp"
#include "hdp/raster_io.hpp"
#include "hdp/spanning_forest.hpp"

namespace hdp {

/// Threshold presets by input size: large (full-size class) inputs use
/// delta_0 = 0.004, beta = 0.95; small (half-size class) inputs use
/// delta_0 = 0.064, beta = 0.6.
enum class SizeClass { Half, Full };

struct SizePreset {
  double delta0;
  double beta;
};

SizePreset size_preset(SizeClass size_class);
std::string to_string(SizeClass size_class);
SizeClass parse_size_class(const std::string& name);

struct MatchParams {
  int factor = 2;        // S
  int levels = 3;        // L
  double delta0 = 0.064;
  double beta = 0.6;
  double gamma = 0.1;    // on edge weights normalized to [0,1]
  CostParams cost;
  EdgeOrdering ordering;
  bool median_prefilter = false;
  int prior_stride = 5;
  int prior_radius = 3;  // 7x7 window

  /// delta_l = delta_0 * S^l
  double delta_at(int level) const;
  /// Throws ConfigError for out-of-range values.
  void validate() const;
};

struct LayerReport {
  int level = 0;
  int width = 0;
  int height = 0;
  int d_max = 0;
  double search_ratio = 1.0;     // R_l as a fraction
  std::size_t stored_entries = 0;
  std::size_t tree_count = 0;
  std::size_t stable_samples = 0;
  double prior_seconds = 0.0;
  double prediction_seconds = 0.0;
  double forest_seconds = 0.0;
  double cost_seconds = 0.0;
  double aggregation_seconds = 0.0;
  double wta_seconds = 0.0;

  double total_seconds() const {
    return prior_seconds + prediction_seconds + forest_seconds + cost_seconds + aggregation_seconds + wta_seconds;
  }
};

struct MatchResult {
  DisparityMap disparity;
  std::vector<LayerReport> layers;           // top level first
  std::vector<DisparityMap> level_disparities;  // indexed by level
  std::vector<ProbabilityMatrix> posteriors;    // indexed by level, empty for the baseline
  WorkCounter work;
  double seconds = 0.0;
};

/// Coarse-to-fine matching: full-range matching at the top level, then for
/// each lower level prior sampling, interval prediction from the parent
/// disparities, disparity-forest construction, masked cost, aggregation and
/// winner-takes-all. No refinement is applied. When `forests` is given it
/// receives the disparity forest of every level, indexed by level.
MatchResult run_hdp_pipeline(const StereoPair& pair, const GmmModel& model, const MatchParams& params,
                             std::vector<DisparityForest>* forests = nullptr);

/// Single-level full-range matching over one spanning tree.
MatchResult run_baseline_pipeline(const StereoPair& pair, const MatchParams& params);

}  // namespace hdp
