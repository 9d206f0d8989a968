#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hdp {

/// Row-major 8-bit image with 1 (gray) or 3 (RGB) interleaved channels.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  RasterImage() = default;
  RasterImage(int w, int h, int c, std::uint8_t fill = 0);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

/// Integer disparity map with a per-pixel validity flag.
///
/// `scale` is the factor between stored raster values and disparities
/// (stored = disparity * scale). It is carried along so that a map written
/// with save_disparity_pgm() decodes to the same values.
struct DisparityMap {
  int width = 0;
  int height = 0;
  int d_max = 0;
  int scale = 1;
  std::vector<int> values;
  std::vector<std::uint8_t> valid;

  DisparityMap() = default;
  DisparityMap(int w, int h, int dmax, int scale_ = 1);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  int& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  int at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  bool is_valid(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }

  friend bool operator==(const DisparityMap&, const DisparityMap&) = default;
};

/// Per-pixel boolean mask; a nonzero entry marks an occluded pixel.
struct OcclusionMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> occluded;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool at(int x, int y) const { return occluded[static_cast<std::size_t>(y) * width + x] != 0; }
};

struct StereoPair {
  RasterImage left;
  RasterImage right;
  int d_max = 1;
  std::string name;
};

/// Raw PNM/PNG samples before any interpretation; maxval may exceed 255.
struct RawRaster {
  int width = 0;
  int height = 0;
  int channels = 1;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

/// Whether PNG decoding was compiled in.
bool png_supported();

RawRaster read_raster(const std::filesystem::path& path);
void write_pnm(const RawRaster& raster, const std::filesystem::path& path);

/// Loads an 8-bit PGM/PPM (or PNG, when supported) as-is.
RasterImage load_image(const std::filesystem::path& path);
/// Writes P5 for one channel, P6 for three.
void save_image(const RasterImage& image, const std::filesystem::path& path);

StereoPair load_stereo_pair(const std::filesystem::path& left_path,
                            const std::filesystem::path& right_path, int d_max,
                            std::string name = {});

struct GroundTruthOptions {
  int scale = 1;
  /// Middlebury convention: a stored 0 means unknown.
  bool zero_is_invalid = true;
  /// Values decoding above this are marked invalid. Negative disables the check.
  int d_max = -1;
};

/// Decodes stored samples as value = stored / scale (integer division).
/// `clamped` receives the number of pixels invalidated for exceeding d_max.
DisparityMap decode_disparity(const RawRaster& raster, const GroundTruthOptions& options,
                              std::size_t* clamped = nullptr);

DisparityMap load_ground_truth(const std::filesystem::path& path, const GroundTruthOptions& options);
inline DisparityMap load_ground_truth(const std::filesystem::path& path, int scale) {
  return load_ground_truth(path, GroundTruthOptions{scale, true, -1});
}

/// Mask file convention: 255 = evaluable, anything else = occluded.
OcclusionMask load_occlusion_mask(const std::filesystem::path& path);

/// Writes value * scale; 16-bit samples when the largest stored value exceeds 255.
/// Invalid pixels are written as 0.
void save_disparity_pgm(const DisparityMap& map, const std::filesystem::path& path);

/// Error overlay: occluded or GT-invalid pixels black, pixels with
/// |pred - gt| >= threshold red, all others the gray-coded disparity.
RasterImage render_error_overlay(const DisparityMap& pred, const DisparityMap& gt,
                                 const OcclusionMask* occlusion, int threshold);

struct OverlayInputs {
  const DisparityMap* ground_truth = nullptr;
  const OcclusionMask* occlusion = nullptr;
  int threshold = 1;
};

struct ArtifactPaths {
  std::filesystem::path disparity;
  std::optional<std::filesystem::path> overlay;
};

/// Writes `<base>.pgm` and, when ground truth is supplied, `<base>_errors.ppm`.
ArtifactPaths save_disparity_artifacts(const DisparityMap& map, const std::filesystem::path& base_path,
                                       const OverlayInputs& overlay = {});

/// One entry of a `<name>/{view1,view5,disp1,disp5}` dataset directory.
struct DatasetEntry {
  std::string name;
  std::filesystem::path left;
  std::filesystem::path right;
  std::optional<std::filesystem::path> gt_left;
  std::optional<std::filesystem::path> gt_right;
  std::optional<std::filesystem::path> occlusion;
};

/// Scans `root` for pair directories, sorted by name. Each stem is probed
/// with .pgm, .ppm and .png; `occ1` is picked up as an occlusion mask.
std::vector<DatasetEntry> list_dataset(const std::filesystem::path& root);

}  // namespace hdp
