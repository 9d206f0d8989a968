#include "hdp/hdp_forest.hpp"

#include <fmt/format.h>

#include "hdp/error.hpp"

namespace hdp {

PixelIntervalMap PixelIntervalMap::full_range(int width, int height, int d_max) {
  PixelIntervalMap map;
  map.width = width;
  map.height = height;
  map.d_max = d_max;
  map.sets.push_back(DisparitySet::full(d_max));
  map.set_of_pixel.assign(static_cast<std::size_t>(width) * height, 0);
  return map;
}

PixelIntervalMap assign_pixel_intervals(const DisparityMap& parent_disparity, const DisparityIntervalTable& table,
                                        int width, int height, int factor) {
  if ((width + factor - 1) / factor != parent_disparity.width ||
      (height + factor - 1) / factor != parent_disparity.height)
    throw DataError("parent disparity map does not cover the child level");
  PixelIntervalMap map;
  map.width = width;
  map.height = height;
  map.d_max = table.d_child;
  map.sets = table.rows;
  map.set_of_pixel.resize(static_cast<std::size_t>(width) * height);
  const int rows = static_cast<int>(table.rows.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int px = x / factor, py = y / factor;
      const int d = parent_disparity.at(px, py);
      if (!parent_disparity.is_valid(px, py) || d < 0 || d >= rows)
        throw DataError(fmt::format("parent disparity {} at ({},{}) has no interval row", d, px, py));
      map.set_of_pixel[static_cast<std::size_t>(y) * width + x] = static_cast<std::uint32_t>(d);
    }
  }
  return map;
}

std::size_t DisparityForest::total_candidates() const {
  std::size_t total = 0;
  for (std::size_t t = 0; t < tree_count(); ++t)
    total += tree_pixel_count(t) * static_cast<std::size_t>(tree_intervals[t].size());
  return total;
}

DisparityForest full_range_forest(RootedForest forest, int width, int height, int d_max) {
  DisparityForest out;
  out.width = width;
  out.height = height;
  out.d_max = d_max;
  out.tree_intervals.assign(forest.tree_count(), DisparitySet::full(d_max));
  out.forest = std::move(forest);
  return out;
}

namespace {

// Tree sets live in one flat word array indexed by union-find root.
class DisparityTreePolicy {
 public:
  DisparityTreePolicy(const PixelIntervalMap& intervals, double beta)
      : intervals_(intervals), beta_(beta), stride_(DisparitySet::words_for(intervals.d_max)) {
    words_.resize(intervals.pixel_count() * stride_);
    for (NodeId p = 0; p < intervals.pixel_count(); ++p) {
      const auto src = intervals.at(p).words();
      std::copy(src.begin(), src.end(), words_.begin() + static_cast<std::ptrdiff_t>(p * stride_));
    }
  }

  bool admit_edge(const Edge& e) const {
    return DisparitySet::intersects(intervals_.at(e.u).words(), intervals_.at(e.v).words());
  }

  bool admit_merge(NodeId ru, NodeId rv) const {
    const auto a = tree_words(ru);
    const auto b = tree_words(rv);
    const int inter = DisparitySet::intersection_size(a, b);
    const int uni = DisparitySet::union_size(a, b);
    return static_cast<double>(inter) >= beta_ * static_cast<double>(uni);
  }

  void merged(NodeId survivor, NodeId absorbed) {
    DisparitySet::unite(tree_words(survivor), tree_words(absorbed));
  }

  DisparitySet tree_set(NodeId root) const {
    DisparitySet s(intervals_.d_max);
    const auto src = tree_words(root);
    std::copy(src.begin(), src.end(), s.words().begin());
    return s;
  }

 private:
  std::span<DisparitySet::Word> tree_words(NodeId root) {
    return std::span<DisparitySet::Word>(words_).subspan(root * stride_, stride_);
  }
  std::span<const DisparitySet::Word> tree_words(NodeId root) const {
    return std::span<const DisparitySet::Word>(words_).subspan(root * stride_, stride_);
  }

  const PixelIntervalMap& intervals_;
  double beta_;
  std::size_t stride_;
  std::vector<DisparitySet::Word> words_;
};

}  // namespace

DisparityForest build_hdpf(const EdgeList& edges, const PixelIntervalMap& intervals, const EdgeOrdering& ordering,
                           double beta) {
  if (edges.node_count != intervals.pixel_count())
    throw DataError("edge list and pixel intervals cover different levels");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0,1]");

  DisparityTreePolicy policy(intervals, beta);
  const auto order = order_edges(edges, ordering);
  const auto accepted = select_edges(edges, order, policy);

  DisparityForest out;
  out.width = intervals.width;
  out.height = intervals.height;
  out.d_max = intervals.d_max;
  out.forest = root_and_order(edges, accepted);

  // Replaying the accepted unions in order reproduces the union-find roots the
  // policy saw, which key its incrementally merged tree sets.
  UnionFind sets(edges.node_count);
  for (std::uint32_t idx : accepted) {
    const NodeId a = sets.find(edges.edges[idx].u);
    const NodeId b = sets.find(edges.edges[idx].v);
    if (a == b) throw InvariantError("accepted edge closes a cycle");
    sets.unite_roots(a, b);
  }
  out.tree_intervals.reserve(out.forest.tree_count());
  for (std::size_t t = 0; t < out.forest.tree_count(); ++t)
    out.tree_intervals.push_back(policy.tree_set(sets.find(out.forest.root_of_tree(t))));
  return out;
}

RasterImage render_forest(const DisparityForest& forest) {
  RasterImage image(forest.width, forest.height, 3);
  for (NodeId p = 0; p < forest.forest.node_count(); ++p) {
    // splitmix-style hash of the tree id
    std::uint64_t h = forest.forest.tree_id[p] + 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    h ^= h >> 31;
    image.data[p * 3 + 0] = static_cast<std::uint8_t>(64 + (h & 0xbf));
    image.data[p * 3 + 1] = static_cast<std::uint8_t>(64 + ((h >> 8) & 0xbf));
    image.data[p * 3 + 2] = static_cast<std::uint8_t>(64 + ((h >> 16) & 0xbf));
  }
  return image;
}

}  // namespace hdp
