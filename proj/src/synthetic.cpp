#include "hdp/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "hdp/error.hpp"

namespace hdp {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_hash(const SceneSpec& spec, std::size_t k, int octave, int u, int v) {
  const int size = spec.dot_size << octave;
  const auto cell = [size](int a) { return static_cast<std::int64_t>(std::floor(static_cast<double>(a) / size)); };
  std::uint64_t h = splitmix(spec.seed ^ (0x51ed27ULL * (k + 1)) ^ (static_cast<std::uint64_t>(octave) << 56));
  h = splitmix(h ^ static_cast<std::uint64_t>(cell(u) + (1LL << 20)));
  return splitmix(h ^ (static_cast<std::uint64_t>(cell(v) + (1LL << 20)) << 21));
}

// Color of plane `k` at left-image texture coordinate (u, v): per channel a
// weighted mean of one random dot value per octave, coarser octaves weighing
// `octave_gain` times more than the next finer one.
std::array<std::uint8_t, 3> texel(const SceneSpec& spec, std::size_t k, int u, int v) {
  std::array<double, 3> sum{};
  double total = 0.0, weight = 1.0;
  for (int o = 0; o < spec.octaves; ++o, weight *= spec.octave_gain) {
    const std::uint64_t h = cell_hash(spec, k, o, u, v);
    for (int c = 0; c < 3; ++c) sum[c] += weight * static_cast<double>((h >> (8 * c)) & 0xff);
    total += weight;
  }
  std::array<std::uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<std::uint8_t>(std::lround(sum[c] / total));
  return rgb;
}

// Index of the nearest plane covering left coordinate (x, y), or -1.
int front_plane(const SceneSpec& spec, int x, int y) {
  int best = -1;
  for (std::size_t k = 0; k < spec.planes.size(); ++k) {
    const ScenePlane& p = spec.planes[k];
    if (p.covers(x, y) && (best < 0 || p.disparity > spec.planes[best].disparity)) best = static_cast<int>(k);
  }
  return best;
}

// Index of the nearest plane seen at right coordinate (xr, y), or -1.
int front_plane_right(const SceneSpec& spec, int xr, int y) {
  int best = -1;
  for (std::size_t k = 0; k < spec.planes.size(); ++k) {
    const ScenePlane& p = spec.planes[k];
    if (p.covers(xr + p.disparity, y) && (best < 0 || p.disparity > spec.planes[best].disparity))
      best = static_cast<int>(k);
  }
  return best;
}

void paint(RasterImage& image, int x, int y, const std::array<std::uint8_t, 3>& color) {
  for (int c = 0; c < 3; ++c) image.at(x, y, c) = color[c];
}

}  // namespace

SyntheticScene render_scene(const SceneSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw ConfigError("scene needs a positive size");
  if (spec.d_max < 1) throw ConfigError("scene d_max must be >= 1");
  if (spec.dot_size < 1) throw ConfigError("dot size must be >= 1");
  if (spec.octaves < 1 || spec.octaves > 16) throw ConfigError("octave count must lie in [1,16]");
  if (!(spec.octave_gain > 0.0)) throw ConfigError("octave gain must be > 0");
  if (spec.planes.empty() || !spec.planes.front().background)
    throw ConfigError("scene must start with a background plane");
  for (const auto& p : spec.planes)
    if (p.disparity < 0 || p.disparity > spec.d_max) throw ConfigError("plane disparity outside [0, d_max]");

  const int w = spec.width, h = spec.height;
  SyntheticScene s;
  s.pair.left = RasterImage(w, h, 3);
  s.pair.right = RasterImage(w, h, 3);
  s.pair.d_max = spec.d_max;
  s.pair.name = "synthetic";
  s.gt_left = DisparityMap(w, h, spec.d_max);
  s.gt_right = DisparityMap(w, h, spec.d_max);
  s.occlusion = {w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const int k = front_plane(spec, x, y);
      const int d = spec.planes[k].disparity;
      paint(s.pair.left, x, y, texel(spec, k, x, y));
      s.gt_left.values[i] = d;
      s.gt_left.valid[i] = 1;
      const int xr = x - d;
      s.occlusion.occluded[i] = xr < 0 || front_plane_right(spec, xr, y) != k;

      const int kr = front_plane_right(spec, x, y);
      const int dr = spec.planes[kr].disparity;
      paint(s.pair.right, x, y, texel(spec, kr, x + dr, y));
      s.gt_right.values[i] = dr;
      s.gt_right.valid[i] = 1;
    }
  }
  return s;
}

SceneSpec random_scene_spec(std::uint64_t seed, int width, int height, int planes, int d_max) {
  if (planes < 1) throw ConfigError("scene needs at least one plane");
  if (d_max < planes) throw ConfigError("d_max too small for distinct plane disparities");
  std::mt19937_64 rng(seed);
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.d_max = d_max;
  spec.seed = seed;

  // Distinct disparities, background farthest.
  std::vector<int> pool(static_cast<std::size_t>(d_max));
  for (int d = 1; d <= d_max; ++d) pool[d - 1] = d;
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<int> ds(pool.begin(), pool.begin() + planes);
  std::sort(ds.begin(), ds.end());

  ScenePlane bg;
  bg.background = true;
  bg.disparity = ds[0];
  spec.planes.push_back(bg);
  for (int k = 1; k < planes; ++k) {
    std::uniform_int_distribution<int> rw(width / 5, width / 2), rh(height / 5, height / 2);
    ScenePlane p;
    const int pw = rw(rng), ph = rh(rng);
    p.x0 = std::uniform_int_distribution<int>(0, width - pw)(rng);
    p.y0 = std::uniform_int_distribution<int>(0, height - ph)(rng);
    p.x1 = p.x0 + pw;
    p.y1 = p.y0 + ph;
    p.disparity = ds[k];
    spec.planes.push_back(p);
  }
  return spec;
}

DisparityMap random_planar_disparity(std::uint64_t seed, int width, int height, int d_max, int regions) {
  if (width < 1 || height < 1 || d_max < 1) throw ConfigError("invalid planar map geometry");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DisparityMap map(width, height, d_max);
  std::vector<double> depth(map.pixel_count());

  const auto slope = [&](double span) { return (unit(rng) - 0.5) * span; };
  const double base = unit(rng) * 0.3 * d_max;
  const double bx = slope(0.2 * d_max / width), by = slope(0.2 * d_max / height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) depth[static_cast<std::size_t>(y) * width + x] = base + bx * x + by * y;

  for (int r = 0; r < regions; ++r) {
    const int rw = std::max(2, static_cast<int>(width * (0.1 + 0.4 * unit(rng))));
    const int rh = std::max(2, static_cast<int>(height * (0.1 + 0.4 * unit(rng))));
    const int x0 = static_cast<int>(unit(rng) * (width - rw));
    const int y0 = static_cast<int>(unit(rng) * (height - rh));
    const double d0 = unit(rng) * d_max;
    const double sx = slope(0.5 * d_max / width), sy = slope(0.5 * d_max / height);
    for (int y = y0; y < y0 + rh; ++y)
      for (int x = x0; x < x0 + rw; ++x) {
        const double d = d0 + sx * (x - x0) + sy * (y - y0);
        double& cur = depth[static_cast<std::size_t>(y) * width + x];
        cur = std::max(cur, d);
      }
  }
  for (std::size_t i = 0; i < depth.size(); ++i) {
    map.values[i] = std::clamp(static_cast<int>(std::lround(depth[i])), 0, d_max);
    map.valid[i] = 1;
  }
  return map;
}

}  // namespace hdp
