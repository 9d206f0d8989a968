#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hdp/raster_io.hpp"

namespace hdp {

using NodeId = std::uint32_t;

/// One level of the graph pyramid. Nodes are pixels (level 0) or S x S
/// superpixels; edges are the implicit 4-neighborhood of the grid.
///
/// Intensities stay in floating point on the [0,255] scale; they are never
/// re-quantized between levels.
struct PyramidLayer {
  int level = 0;
  int width = 0;
  int height = 0;
  int channels = 1;
  int d_max = 0;
  std::vector<double> intensities;  // row-major, channels interleaved

  std::size_t node_count() const { return static_cast<std::size_t>(width) * height; }
  NodeId node(int x, int y) const { return static_cast<NodeId>(y) * static_cast<NodeId>(width) + static_cast<NodeId>(x); }
  double at(int x, int y, int c = 0) const {
    return intensities[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  const double* pixel(NodeId id) const { return &intensities[static_cast<std::size_t>(id) * channels]; }
  /// Luma 0.299 R + 0.587 G + 0.114 B; identity for gray layers.
  double gray(NodeId id) const;
};

struct PyramidPair {
  std::vector<PyramidLayer> left;
  std::vector<PyramidLayer> right;
  int factor = 2;

  int top_level() const { return static_cast<int>(left.size()) - 1; }
};

PyramidLayer layer_from_image(const RasterImage& image, int d_max);

/// Builds levels 0..levels by S x S block averaging. Border blocks average
/// over the pixels they actually cover. d_{l+1} = floor(d_l / S).
///
/// Throws ConfigError when the top level would end with d_L == 0.
std::vector<PyramidLayer> build_pyramid(const RasterImage& image, int factor, int levels, int d0);

PyramidPair build_pyramid_pair(const StereoPair& pair, int factor, int levels);

/// Next level from `layer` without the disparity check.
PyramidLayer downsample_layer(const PyramidLayer& layer, int factor);

/// |I(p) - I(q)| for 4-neighbors; maximum over channels for color.
/// Throws std::invalid_argument for non-adjacent nodes.
double edge_weight(const PyramidLayer& layer, NodeId p, NodeId q);

/// Same as edge_weight() without the adjacency check.
inline double edge_weight_unchecked(const PyramidLayer& layer, NodeId p, NodeId q) {
  const double* a = layer.pixel(p);
  const double* b = layer.pixel(q);
  double w = 0.0;
  for (int c = 0; c < layer.channels; ++c) {
    const double d = a[c] > b[c] ? a[c] - b[c] : b[c] - a[c];
    if (d > w) w = d;
  }
  return w;
}

/// Rounds intensities back to 8 bits, for inspection dumps.
RasterImage layer_to_image(const PyramidLayer& layer);

}  // namespace hdp
