#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "hdp/pyramid.hpp"
#include "hdp/raster_io.hpp"

namespace hdp::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hdp_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline RasterImage random_image(std::mt19937_64& rng, int w, int h, int channels) {
  RasterImage img(w, h, channels);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(byte(rng));
  return img;
}

/// Right view of `left` for a constant disparity: right(u) = left(u + d),
/// with the last d columns filled from random noise.
inline RasterImage shifted_view(const RasterImage& left, int d, std::mt19937_64& rng) {
  RasterImage right(left.width, left.height, left.channels);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int y = 0; y < left.height; ++y)
    for (int x = 0; x < left.width; ++x)
      for (int c = 0; c < left.channels; ++c)
        right.at(x, y, c) = x + d < left.width ? left.at(x + d, y, c) : static_cast<std::uint8_t>(byte(rng));
  return right;
}

}  // namespace hdp::test
