#include "hdp/pipeline.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "hdp/error.hpp"
#include "hdp/pyramid.hpp"
#include "hdp/sparse_cost_volume.hpp"

namespace hdp {

SizePreset size_preset(SizeClass size_class) {
  return size_class == SizeClass::Full ? SizePreset{0.004, 0.95} : SizePreset{0.064, 0.6};
}

std::string to_string(SizeClass size_class) { return size_class == SizeClass::Full ? "full" : "half"; }

SizeClass parse_size_class(const std::string& name) {
  if (name == "half") return SizeClass::Half;
  if (name == "full") return SizeClass::Full;
  throw ConfigError("unknown size class '" + name + "' (expected half or full)");
}

double MatchParams::delta_at(int level) const { return delta0 * std::pow(static_cast<double>(factor), level); }

void MatchParams::validate() const {
  if (factor < 2) throw ConfigError("S must be >= 2");
  if (levels < 0) throw ConfigError("L must be >= 0");
  if (!(delta0 > 0.0 && delta0 < 1.0)) throw ConfigError("delta_0 must lie in (0,1)");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0,1]");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (prior_stride < 1 || prior_radius < 0) throw ConfigError("invalid prior sampling geometry");
  cost.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

EdgeOrdering level_ordering(const EdgeOrdering& base, int level) {
  return {base.kind, base.seed + static_cast<std::uint64_t>(level)};
}

// Aggregates over `forest` and selects disparities; fills the common report fields.
DisparityMap match_level(const MatchingCost& cost, const DisparityForest& forest, const MatchParams& params,
                         LayerReport& report, WorkCounter& work) {
  auto start = Clock::now();
  const SparseCostVolume volume = masked_cost_volume(cost, forest);
  report.cost_seconds = seconds_since(start);

  start = Clock::now();
  const SparseCostVolume aggregated = aggregate_tree(volume, forest, params.gamma, &work);
  report.aggregation_seconds = seconds_since(start);

  start = Clock::now();
  WtaResult wta = winner_takes_all(aggregated, forest);
  report.wta_seconds = seconds_since(start);

  report.stored_entries = volume.entry_count();
  report.tree_count = forest.tree_count();
  report.search_ratio = static_cast<double>(forest.total_candidates()) /
                        (static_cast<double>(forest.forest.node_count()) * (forest.d_max + 1));
  return std::move(wta.disparity);
}

}  // namespace

MatchResult run_hdp_pipeline(const StereoPair& pair, const GmmModel& model, const MatchParams& params,
                             std::vector<DisparityForest>* forests) {
  params.validate();
  if (model.factor != params.factor)
    throw ConfigError(fmt::format("model was trained for S={}, run uses S={}", model.factor, params.factor));
  if (model.level_count() < params.levels)
    throw ConfigError(fmt::format("model covers {} levels, run needs {}", model.level_count(), params.levels));

  const auto total_start = Clock::now();
  const PyramidPair pyramid = build_pyramid_pair(pair, params.factor, params.levels);
  std::vector<PyramidLayer> tree_pyramid;
  if (params.median_prefilter)
    tree_pyramid = build_pyramid(median_filter_3x3(pair.left), params.factor, params.levels, pair.d_max);
  const auto& tree_layers = params.median_prefilter ? tree_pyramid : pyramid.left;

  MatchResult result;
  result.level_disparities.resize(static_cast<std::size_t>(params.levels) + 1);
  result.posteriors.resize(static_cast<std::size_t>(params.levels));
  if (forests) forests->assign(static_cast<std::size_t>(params.levels) + 1, {});

  for (int level = params.levels; level >= 0; --level) {
    const PyramidLayer& left = pyramid.left[level];
    const MatchingCost cost(left, pyramid.right[level], params.cost);
    LayerReport report;
    report.level = level;
    report.width = left.width;
    report.height = left.height;
    report.d_max = left.d_max;

    PixelIntervalMap intervals;
    if (level == params.levels) {
      intervals = PixelIntervalMap::full_range(left.width, left.height, left.d_max);
    } else {
      auto start = Clock::now();
      const PriorEstimate prior = estimate_prior(cost, params.prior_stride, params.prior_radius);
      report.prior_seconds = seconds_since(start);
      report.stable_samples = prior.stable.size();

      start = Clock::now();
      const ProbabilityMatrix likelihood = conditional_parent_given_child(
          model.levels[level], left.d_max, pyramid.left[level + 1].d_max, params.factor);
      ProbabilityMatrix posterior = bayes_child_given_parent(likelihood, prior.prior);
      const DisparityIntervalTable table = predict_intervals(posterior, params.delta_at(level));
      intervals = assign_pixel_intervals(result.level_disparities[level + 1], table, left.width, left.height,
                                         params.factor);
      result.posteriors[level] = std::move(posterior);
      report.prediction_seconds = seconds_since(start);
    }

    auto start = Clock::now();
    const EdgeList edges = grid_edges(tree_layers[level]);
    DisparityForest forest = build_hdpf(edges, intervals, level_ordering(params.ordering, level), params.beta);
    report.forest_seconds = seconds_since(start);

    result.level_disparities[level] = match_level(cost, forest, params, report, result.work);
    result.layers.push_back(report);
    if (forests) (*forests)[level] = std::move(forest);
  }

  result.disparity = result.level_disparities[0];
  result.seconds = seconds_since(total_start);
  return result;
}

MatchResult run_baseline_pipeline(const StereoPair& pair, const MatchParams& params) {
  params.validate();
  const auto total_start = Clock::now();
  const PyramidLayer left = layer_from_image(pair.left, pair.d_max);
  const PyramidLayer right = layer_from_image(pair.right, pair.d_max);
  const MatchingCost cost(left, right, params.cost);

  LayerReport report;
  report.width = left.width;
  report.height = left.height;
  report.d_max = left.d_max;

  auto start = Clock::now();
  const PyramidLayer tree_layer =
      params.median_prefilter ? layer_from_image(median_filter_3x3(pair.left), pair.d_max) : left;
  const RootedForest forest = build_forest(grid_edges(tree_layer), level_ordering(params.ordering, 0));
  report.forest_seconds = seconds_since(start);

  MatchResult result;
  start = Clock::now();
  WtaResult wta = aggregate_dense_streaming(cost, forest, params.gamma, &result.work);
  report.aggregation_seconds = seconds_since(start);
  report.tree_count = forest.tree_count();
  report.stored_entries = 0;
  report.search_ratio = 1.0;

  result.disparity = std::move(wta.disparity);
  result.level_disparities = {result.disparity};
  result.layers.push_back(report);
  result.seconds = seconds_since(total_start);
  return result;
}

}  // namespace hdp
