#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hdp/cost_volume.hpp"
#include "hdp/hdp_forest.hpp"
#include "hdp/sparse_cost_volume.hpp"

namespace hdp {

/// Similarity of two tree neighbors: exp(-w / (gamma * 255)), w in [0,255].
inline double edge_similarity(double weight, double gamma) { return std::exp(-weight / (gamma * 255.0)); }

/// Per-node recurrence coefficients laid out in the forest's breadth-first
/// order. `parent[i]` is the order position of the parent of order[i] relative
/// to the start of its tree; roots point at themselves with similarity 0.
struct TreeRecurrence {
  std::vector<std::uint32_t> parent;
  std::vector<double> similarity;
  std::vector<double> damping;  // 1 - similarity^2
};

TreeRecurrence tree_recurrence(const RootedForest& forest, double gamma);

/// Exact non-local aggregation of one disparity slice of one tree, in place:
///   up:   A(v) = E(v) + sum_c s(v,c) A(c)           (leaves to root)
///   down: A(v) = s(p,v) A(p) + (1 - s(p,v)^2) A(v)   (root to leaves)
/// which equals sum_q S(v,q) E(q) with S the product of edge similarities
/// along the tree path.
inline void aggregate_slice(std::span<double> values, std::span<const std::uint32_t> parent,
                            std::span<const double> similarity, std::span<const double> damping) {
  const std::size_t n = values.size();
  for (std::size_t i = n; i-- > 1;) values[parent[i]] += similarity[i] * values[i];
  for (std::size_t i = 1; i < n; ++i) values[i] = similarity[i] * values[parent[i]] + damping[i] * values[i];
}

/// Counts cost entries touched by aggregation (one per node per slice).
struct WorkCounter {
  std::uint64_t entries = 0;
};

/// Aggregates every tree independently; nothing crosses tree boundaries.
/// Throws InvariantError when the volume is not shaped after `forest`.
SparseCostVolume aggregate_tree(const SparseCostVolume& costs, const DisparityForest& forest, double gamma,
                                WorkCounter* work = nullptr);

struct WtaResult {
  DisparityMap disparity;
  std::vector<double> min_cost;
};

/// Per pixel, the candidate of minimal aggregated cost; ties go to the smaller disparity.
WtaResult winner_takes_all(const SparseCostVolume& aggregated, const DisparityForest& forest);

/// Full-range aggregation over `forest` one disparity slice at a time, keeping
/// only the running minimum. Memory stays O(pixels) for any d_max.
WtaResult aggregate_dense_streaming(const MatchingCost& cost, const RootedForest& forest, double gamma,
                                    WorkCounter* work = nullptr);

}  // namespace hdp
