#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hdp/disparity_set.hpp"
#include "hdp/hdp_model.hpp"
#include "hdp/raster_io.hpp"
#include "hdp/spanning_forest.hpp"

namespace hdp {

/// Candidate disparities of every pixel of one level. Pixels sharing a parent
/// disparity share a set, so sets are stored once and referenced by index.
struct PixelIntervalMap {
  int width = 0;
  int height = 0;
  int d_max = 0;
  std::vector<DisparitySet> sets;
  std::vector<std::uint32_t> set_of_pixel;

  std::size_t pixel_count() const { return set_of_pixel.size(); }
  const DisparitySet& at(NodeId p) const { return sets[set_of_pixel[p]]; }

  /// Every pixel gets [0, d_max]; used at the top level.
  static PixelIntervalMap full_range(int width, int height, int d_max);
};

/// Each child pixel receives the table row of its parent's disparity.
/// Throws DataError when a parent disparity has no row or is invalid.
PixelIntervalMap assign_pixel_intervals(const DisparityMap& parent_disparity, const DisparityIntervalTable& table,
                                        int width, int height, int factor);

/// Forest of disparity trees with their tree-wise candidate sets.
struct DisparityForest {
  int width = 0;
  int height = 0;
  int d_max = 0;
  RootedForest forest;
  std::vector<DisparitySet> tree_intervals;  // indexed by tree id

  std::size_t tree_count() const { return tree_intervals.size(); }
  const DisparitySet& interval_of(NodeId p) const { return tree_intervals[forest.tree_id[p]]; }
  std::size_t tree_pixel_count(std::size_t t) const { return forest.tree_size(t); }
  /// Sum over pixels of |TreeIntv| of the pixel's tree.
  std::size_t total_candidates() const;
};

/// Wraps a plain spanning forest with one full-range interval per tree.
DisparityForest full_range_forest(RootedForest forest, int width, int height, int d_max);

/// Spanning-forest construction with the disparity rules stacked on top:
/// an edge whose endpoints have disjoint pixel sets is dropped, and two trees
/// merge only when |A n B| / |A u B| >= beta for their current tree sets,
/// which are then replaced by A u B.
DisparityForest build_hdpf(const EdgeList& edges, const PixelIntervalMap& intervals, const EdgeOrdering& ordering,
                           double beta);

/// One color per tree, for inspection.
RasterImage render_forest(const DisparityForest& forest);

}  // namespace hdp
