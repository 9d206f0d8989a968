#include "hdp/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hdp/error.hpp"

namespace hdp {

double PyramidLayer::gray(NodeId id) const {
  const double* p = pixel(id);
  if (channels == 1) return p[0];
  return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

PyramidLayer layer_from_image(const RasterImage& image, int d_max) {
  if (image.width < 1 || image.height < 1) throw DataError("empty image");
  PyramidLayer layer;
  layer.level = 0;
  layer.width = image.width;
  layer.height = image.height;
  layer.channels = image.channels;
  layer.d_max = d_max;
  layer.intensities.assign(image.data.begin(), image.data.end());
  return layer;
}

PyramidLayer downsample_layer(const PyramidLayer& layer, int factor) {
  PyramidLayer next;
  next.level = layer.level + 1;
  next.width = (layer.width + factor - 1) / factor;
  next.height = (layer.height + factor - 1) / factor;
  next.channels = layer.channels;
  next.d_max = layer.d_max / factor;
  next.intensities.assign(next.node_count() * next.channels, 0.0);

  for (int by = 0; by < next.height; ++by) {
    const int y0 = by * factor;
    const int y1 = std::min(y0 + factor, layer.height);
    for (int bx = 0; bx < next.width; ++bx) {
      const int x0 = bx * factor;
      const int x1 = std::min(x0 + factor, layer.width);
      const double covered = static_cast<double>((y1 - y0) * (x1 - x0));
      double* out = &next.intensities[(static_cast<std::size_t>(by) * next.width + bx) * next.channels];
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < layer.channels; ++c) out[c] += layer.at(x, y, c);
      for (int c = 0; c < layer.channels; ++c) out[c] /= covered;
    }
  }
  return next;
}

std::vector<PyramidLayer> build_pyramid(const RasterImage& image, int factor, int levels, int d0) {
  if (factor < 2) throw ConfigError("pyramid factor S must be >= 2");
  if (levels < 0) throw ConfigError("pyramid level count L must be >= 0");
  int d_top = d0;
  for (int l = 0; l < levels; ++l) d_top /= factor;
  if (d_top < 1)
    throw ConfigError("maximum disparity " + std::to_string(d0) + " vanishes at level " +
                      std::to_string(levels) + " (d_L = 0); use a smaller L or a larger d_max");

  std::vector<PyramidLayer> layers;
  layers.reserve(static_cast<std::size_t>(levels) + 1);
  layers.push_back(layer_from_image(image, d0));
  for (int l = 0; l < levels; ++l) layers.push_back(downsample_layer(layers.back(), factor));
  return layers;
}

PyramidPair build_pyramid_pair(const StereoPair& pair, int factor, int levels) {
  PyramidPair out;
  out.factor = factor;
  out.left = build_pyramid(pair.left, factor, levels, pair.d_max);
  out.right = build_pyramid(pair.right, factor, levels, pair.d_max);
  return out;
}

double edge_weight(const PyramidLayer& layer, NodeId p, NodeId q) {
  const auto n = static_cast<NodeId>(layer.node_count());
  if (p >= n || q >= n) throw std::invalid_argument("node out of range");
  const auto w = static_cast<NodeId>(layer.width);
  const NodeId lo = std::min(p, q);
  const NodeId hi = std::max(p, q);
  const bool horizontal = hi == lo + 1 && lo % w != w - 1;
  const bool vertical = hi == lo + w;
  if (!horizontal && !vertical) throw std::invalid_argument("nodes are not 4-neighbors");
  return edge_weight_unchecked(layer, p, q);
}

RasterImage layer_to_image(const PyramidLayer& layer) {
  RasterImage image(layer.width, layer.height, layer.channels);
  for (std::size_t i = 0; i < image.data.size(); ++i)
    image.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(layer.intensities[i]), 0L, 255L));
  return image;
}

}  // namespace hdp
