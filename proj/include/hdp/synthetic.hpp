#pragma once

#include <cstdint>
#include <vector>

#include "hdp/raster_io.hpp"

namespace hdp {

/// Fronto-parallel rectangle at constant disparity, in left-image coordinates
/// [x0,x1) x [y0,y1). A background plane covers everything.
struct ScenePlane {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int disparity = 0;
  bool background = false;

  bool covers(int x, int y) const { return background || (x >= x0 && x < x1 && y >= y0 && y < y1); }
};

struct SceneSpec {
  int width = 320;
  int height = 240;
  int d_max = 24;
  int dot_size = 1;   // finest dot edge length
  int octaves = 8;    // dot sizes dot_size * 2^k for k < octaves
  double octave_gain = 2.0;
  std::uint64_t seed = 1;
  std::vector<ScenePlane> planes;
};

/// Random-dot stereogram with exact ground truth. Nearer planes (larger
/// disparity) hide farther ones; each plane carries its own dot texture, so a
/// surface point has the same color in both views. Dots come in several
/// octaves so every pyramid level still sees texture.
struct SyntheticScene {
  StereoPair pair;
  DisparityMap gt_left;
  DisparityMap gt_right;
  OcclusionMask occlusion;  // left pixels hidden or off-image in the right view
};

SyntheticScene render_scene(const SceneSpec& spec);

/// Background plus `planes - 1` rectangles with distinct disparities in
/// [1, d_max], drawn from `seed`.
SceneSpec random_scene_spec(std::uint64_t seed, int width = 320, int height = 240, int planes = 3, int d_max = 24);

/// Piecewise-planar disparity map: a slanted background and `regions` slanted
/// rectangles in front of it, rounded to integers in [0, d_max]. Used as
/// ground truth for model training.
DisparityMap random_planar_disparity(std::uint64_t seed, int width, int height, int d_max, int regions = 6);

}  // namespace hdp
