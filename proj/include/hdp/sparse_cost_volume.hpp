#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hdp/cost_volume.hpp"
#include "hdp/hdp_forest.hpp"

namespace hdp {

/// Costs stored only on each pixel's tree-wise candidate set.
///
/// Storage is per tree and slice-major: the block of tree t holds, for each
/// candidate k of the tree (ascending disparity), one value per tree node in
/// the tree's breadth-first order. A slice is therefore contiguous and is
/// exactly what the two-pass aggregation walks.
class SparseCostVolume {
 public:
  SparseCostVolume() = default;
  /// Zero-filled volume shaped after `forest`.
  explicit SparseCostVolume(const DisparityForest& forest);

  std::size_t node_count() const { return node_tree_.size(); }
  std::size_t tree_count() const { return tree_candidates_.size(); }
  std::size_t entry_count() const { return costs_.size(); }

  std::span<const int> candidates_of_tree(std::size_t t) const { return tree_candidates_[t]; }
  std::span<const int> candidates(NodeId p) const { return tree_candidates_[node_tree_[p]]; }
  std::uint32_t tree_of(NodeId p) const { return node_tree_[p]; }
  std::size_t tree_node_count(std::size_t t) const { return tree_nodes_[t]; }

  std::span<double> slice(std::size_t t, std::size_t k) {
    return std::span<double>(costs_).subspan(tree_offset_[t] + k * tree_nodes_[t], tree_nodes_[t]);
  }
  std::span<const double> slice(std::size_t t, std::size_t k) const {
    return std::span<const double>(costs_).subspan(tree_offset_[t] + k * tree_nodes_[t], tree_nodes_[t]);
  }

  /// Cost of p at its k-th candidate.
  double at(NodeId p, std::size_t k) const { return costs_[index(p, k)]; }
  double& at(NodeId p, std::size_t k) { return costs_[index(p, k)]; }
  /// Cost of p at disparity x, or nullopt when x is not a candidate of p.
  std::optional<double> cost(NodeId p, int x) const;

  std::span<const double> raw() const { return costs_; }

 private:
  std::size_t index(NodeId p, std::size_t k) const {
    const std::uint32_t t = node_tree_[p];
    return tree_offset_[t] + k * tree_nodes_[t] + node_local_[p];
  }

  std::vector<std::vector<int>> tree_candidates_;
  std::vector<std::size_t> tree_offset_;
  std::vector<std::size_t> tree_nodes_;
  std::vector<std::uint32_t> node_tree_;
  std::vector<std::uint32_t> node_local_;  // position in the tree's breadth-first order
  std::vector<double> costs_;
};

/// E(p, x) = M(p, x) for x in the tree set of p, undefined elsewhere.
/// Throws InvariantError for a tree with an empty set.
SparseCostVolume masked_cost_volume(const MatchingCost& cost, const DisparityForest& forest);

}  // namespace hdp
