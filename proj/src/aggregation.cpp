#include "hdp/aggregation.hpp"

#include <limits>

#include "hdp/error.hpp"

namespace hdp {

TreeRecurrence tree_recurrence(const RootedForest& forest, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  const std::size_t n = forest.node_count();
  std::vector<std::uint32_t> position(n);
  for (std::size_t t = 0; t < forest.tree_count(); ++t) {
    const auto nodes = forest.tree_nodes(t);
    for (std::size_t i = 0; i < nodes.size(); ++i) position[nodes[i]] = static_cast<std::uint32_t>(i);
  }
  TreeRecurrence r;
  r.parent.resize(n);
  r.similarity.resize(n);
  r.damping.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId v = forest.order[i];
    if (forest.is_root(v)) {
      r.parent[i] = position[v];
      r.similarity[i] = 0.0;
      r.damping[i] = 1.0;
      continue;
    }
    const double s = edge_similarity(forest.parent_weight[v], gamma);
    r.parent[i] = position[forest.parent[v]];
    r.similarity[i] = s;
    r.damping[i] = 1.0 - s * s;
  }
  return r;
}

SparseCostVolume aggregate_tree(const SparseCostVolume& costs, const DisparityForest& forest, double gamma,
                                WorkCounter* work) {
  const RootedForest& f = forest.forest;
  if (costs.node_count() != f.node_count() || costs.tree_count() != f.tree_count())
    throw InvariantError("cost volume is not shaped after the forest");
  for (std::size_t t = 0; t < f.tree_count(); ++t)
    if (costs.candidates_of_tree(t).size() != static_cast<std::size_t>(forest.tree_intervals[t].size()) ||
        costs.tree_node_count(t) != f.tree_size(t))
      throw InvariantError("cost volume candidates disagree with the tree sets");

  const TreeRecurrence rec = tree_recurrence(f, gamma);
  SparseCostVolume out = costs;
  for (std::size_t t = 0; t < f.tree_count(); ++t) {
    const std::size_t begin = f.tree_begin[t];
    const std::size_t size = f.tree_size(t);
    const auto parent = std::span<const std::uint32_t>(rec.parent).subspan(begin, size);
    const auto sim = std::span<const double>(rec.similarity).subspan(begin, size);
    const auto damp = std::span<const double>(rec.damping).subspan(begin, size);
    const std::size_t slices = out.candidates_of_tree(t).size();
    for (std::size_t k = 0; k < slices; ++k) aggregate_slice(out.slice(t, k), parent, sim, damp);
    if (work) work->entries += slices * size;
  }
  return out;
}

WtaResult winner_takes_all(const SparseCostVolume& aggregated, const DisparityForest& forest) {
  const RootedForest& f = forest.forest;
  WtaResult r{DisparityMap(forest.width, forest.height, forest.d_max),
              std::vector<double>(f.node_count(), std::numeric_limits<double>::infinity())};
  for (std::size_t t = 0; t < f.tree_count(); ++t) {
    const auto nodes = f.tree_nodes(t);
    const auto cands = aggregated.candidates_of_tree(t);
    if (cands.empty()) throw InvariantError("disparity tree with an empty candidate set");
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const auto slice = aggregated.slice(t, k);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (slice[i] < r.min_cost[nodes[i]]) {
          r.min_cost[nodes[i]] = slice[i];
          r.disparity.values[nodes[i]] = cands[k];
        }
      }
    }
  }
  return r;
}

WtaResult aggregate_dense_streaming(const MatchingCost& cost, const RootedForest& forest, double gamma,
                                    WorkCounter* work) {
  const std::size_t n = forest.node_count();
  if (n != static_cast<std::size_t>(cost.width()) * cost.height())
    throw DataError("forest does not cover the cost layer");
  const TreeRecurrence rec = tree_recurrence(forest, gamma);
  WtaResult r{DisparityMap(cost.width(), cost.height(), cost.d_max()),
              std::vector<double>(n, std::numeric_limits<double>::infinity())};
  std::vector<double> slice(n);
  for (int x = 0; x <= cost.d_max(); ++x) {
    for (std::size_t i = 0; i < n; ++i) slice[i] = cost(forest.order[i], x);
    for (std::size_t t = 0; t < forest.tree_count(); ++t) {
      const std::size_t begin = forest.tree_begin[t];
      const std::size_t size = forest.tree_size(t);
      aggregate_slice(std::span<double>(slice).subspan(begin, size),
                      std::span<const std::uint32_t>(rec.parent).subspan(begin, size),
                      std::span<const double>(rec.similarity).subspan(begin, size),
                      std::span<const double>(rec.damping).subspan(begin, size));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const NodeId v = forest.order[i];
      if (slice[i] < r.min_cost[v]) {
        r.min_cost[v] = slice[i];
        r.disparity.values[v] = x;
      }
    }
    if (work) work->entries += n;
  }
  return r;
}

}  // namespace hdp
