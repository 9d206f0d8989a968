#include "hdp/sparse_cost_volume.hpp"

#include <algorithm>

#include "hdp/error.hpp"

namespace hdp {

SparseCostVolume::SparseCostVolume(const DisparityForest& forest) {
  const RootedForest& f = forest.forest;
  const std::size_t trees = f.tree_count();
  tree_candidates_.resize(trees);
  tree_offset_.resize(trees + 1, 0);
  tree_nodes_.resize(trees);
  node_tree_.resize(f.node_count());
  node_local_.resize(f.node_count());
  for (std::size_t t = 0; t < trees; ++t) {
    tree_candidates_[t] = forest.tree_intervals[t].values();
    tree_nodes_[t] = f.tree_size(t);
    tree_offset_[t + 1] = tree_offset_[t] + tree_candidates_[t].size() * tree_nodes_[t];
    const auto nodes = f.tree_nodes(t);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      node_tree_[nodes[i]] = static_cast<std::uint32_t>(t);
      node_local_[nodes[i]] = static_cast<std::uint32_t>(i);
    }
  }
  costs_.assign(tree_offset_[trees], 0.0);
}

std::optional<double> SparseCostVolume::cost(NodeId p, int x) const {
  const auto cands = candidates(p);
  const auto it = std::lower_bound(cands.begin(), cands.end(), x);
  if (it == cands.end() || *it != x) return std::nullopt;
  return at(p, static_cast<std::size_t>(it - cands.begin()));
}

SparseCostVolume masked_cost_volume(const MatchingCost& cost, const DisparityForest& forest) {
  if (forest.forest.node_count() != static_cast<std::size_t>(cost.width()) * cost.height())
    throw DataError("forest does not cover the cost layer");
  SparseCostVolume volume(forest);
  for (std::size_t t = 0; t < volume.tree_count(); ++t) {
    const auto cands = volume.candidates_of_tree(t);
    if (cands.empty()) throw InvariantError("disparity tree with an empty candidate set");
    if (cands.back() > cost.d_max()) throw InvariantError("tree candidate above the level's d_max");
    const auto nodes = forest.forest.tree_nodes(t);
    for (std::size_t k = 0; k < cands.size(); ++k) {
      auto slice = volume.slice(t, k);
      for (std::size_t i = 0; i < nodes.size(); ++i) slice[i] = cost(nodes[i], cands[k]);
    }
  }
  return volume;
}

}  // namespace hdp
