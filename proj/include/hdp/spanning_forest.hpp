#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hdp/pyramid.hpp"
#include "hdp/raster_io.hpp"

namespace hdp {

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double w = 0.0;  // [0,255]
};

/// Edges of the 4-connected grid in scan order: for each node in row-major
/// order, its right edge then its down edge. 2WH - W - H edges in total.
struct EdgeList {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
};

EdgeList grid_edges(const PyramidLayer& layer);

/// Rule 1 of the spanning-tree framework: the order in which edges are offered.
///
/// Mst sorts by weight (ties keep scan order). Random shuffles with `seed`.
/// A segment-tree construction would plug in here as a third ordering plus a
/// merge policy (see ForestPolicy); it is not provided.
enum class TreeKind { Mst, Random };

struct EdgeOrdering {
  TreeKind kind = TreeKind::Mst;
  std::uint64_t seed = 0;
};

std::string to_string(TreeKind kind);
TreeKind parse_tree_kind(const std::string& name);

/// Stable sort of edge indices by weight. A counting pass over the 256 integer
/// weight buckets gives linear time for integral weights; buckets holding
/// fractional weights are then stably sorted in place.
std::vector<std::uint32_t> sort_edges_by_weight(const EdgeList& edges);

std::vector<std::uint32_t> order_edges(const EdgeList& edges, const EdgeOrdering& ordering);

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), NodeId{0});
  }

  NodeId find(NodeId x) {
    NodeId root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const NodeId next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  /// Unites two distinct roots by size; returns the surviving root.
  NodeId unite_roots(NodeId a, NodeId b) {
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  std::uint32_t component_size(NodeId root) const { return size_[root]; }

 private:
  std::vector<NodeId> parent_;
  std::vector<std::uint32_t> size_;
};

/// Rule 2 hooks. The builder always enforces "endpoints lie in different
/// trees"; a policy may additionally veto an edge or a merge.
struct ForestPolicy {
  bool admit_edge(const Edge&) { return true; }
  bool admit_merge(NodeId /*root_u*/, NodeId /*root_v*/) { return true; }
  void merged(NodeId /*survivor*/, NodeId /*absorbed*/) {}
};

/// Offers edges in `order`, returning the indices of accepted edges.
template <class Policy>
std::vector<std::uint32_t> select_edges(const EdgeList& edges, std::span<const std::uint32_t> order,
                                        Policy& policy) {
  UnionFind sets(edges.node_count);
  std::vector<std::uint32_t> accepted;
  accepted.reserve(edges.node_count > 0 ? edges.node_count - 1 : 0);
  for (std::uint32_t idx : order) {
    const Edge& e = edges.edges[idx];
    if (!policy.admit_edge(e)) continue;
    const NodeId ru = sets.find(e.u);
    const NodeId rv = sets.find(e.v);
    if (ru == rv) continue;
    if (!policy.admit_merge(ru, rv)) continue;
    const NodeId survivor = sets.unite_roots(ru, rv);
    policy.merged(survivor, survivor == ru ? rv : ru);
    accepted.push_back(idx);
  }
  return accepted;
}

/// A forest rooted at the lowest node id of each component.
///
/// `order` lists nodes tree by tree (trees ascending by root id), each tree in
/// breadth-first order from its root, so a parent always precedes its children.
struct RootedForest {
  std::vector<NodeId> parent;          // self for roots
  std::vector<double> parent_weight;   // edge weight to parent, 0 for roots
  std::vector<NodeId> order;
  std::vector<std::uint32_t> tree_id;  // per node
  std::vector<std::size_t> tree_begin; // tree t occupies order[tree_begin[t], tree_begin[t+1])
  std::vector<std::size_t> child_begin;
  std::vector<NodeId> children;        // CSR: children of v are children[child_begin[v], child_begin[v+1])

  std::size_t node_count() const { return parent.size(); }
  std::size_t tree_count() const { return tree_begin.empty() ? 0 : tree_begin.size() - 1; }
  std::size_t edge_count() const { return node_count() - tree_count(); }
  NodeId root_of_tree(std::size_t t) const { return order[tree_begin[t]]; }
  std::size_t tree_size(std::size_t t) const { return tree_begin[t + 1] - tree_begin[t]; }
  std::span<const NodeId> tree_nodes(std::size_t t) const {
    return std::span<const NodeId>(order).subspan(tree_begin[t], tree_size(t));
  }
  std::span<const NodeId> children_of(NodeId v) const {
    return std::span<const NodeId>(children).subspan(child_begin[v], child_begin[v + 1] - child_begin[v]);
  }
  bool is_root(NodeId v) const { return parent[v] == v; }
};

RootedForest root_and_order(const EdgeList& edges, std::span<const std::uint32_t> accepted);

/// Plain MST / random spanning tree: all of Rule 2 is "different trees".
RootedForest build_forest(const EdgeList& edges, const EdgeOrdering& ordering);

template <class Policy>
RootedForest build_forest(const EdgeList& edges, const EdgeOrdering& ordering, Policy& policy) {
  const auto order = order_edges(edges, ordering);
  const auto accepted = select_edges(edges, order, policy);
  return root_and_order(edges, accepted);
}

/// 3x3 per-channel median; the window is clipped at the border and the upper
/// median taken for even sample counts.
RasterImage median_filter_3x3(const RasterImage& image);

}  // namespace hdp
