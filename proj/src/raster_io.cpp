#include "hdp/raster_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

#include <spdlog/spdlog.h>

#include "hdp/error.hpp"

#ifdef HDP_HAVE_PNG
#include <png.h>
#endif

namespace hdp {

namespace fs = std::filesystem;

RasterImage::RasterImage(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

DisparityMap::DisparityMap(int w, int h, int dmax, int scale_)
    : width(w),
      height(h),
      d_max(dmax),
      scale(scale_),
      values(static_cast<std::size_t>(w) * h, 0),
      valid(static_cast<std::size_t>(w) * h, 1) {}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
int read_header_int(std::istream& in, const fs::path& path) {
  int ch = in.peek();
  while (ch != EOF) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
    ch = in.peek();
  }
  int value = 0;
  if (!(in >> value) || value < 0) throw DataError("malformed PNM header in " + path.string());
  return value;
}

RawRaster read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw DataError("unsupported format (expected binary P5/P6): " + path.string());

  RawRaster r;
  r.channels = magic[1] == '5' ? 1 : 3;
  r.width = read_header_int(in, path);
  r.height = read_header_int(in, path);
  r.maxval = read_header_int(in, path);
  if (r.width < 1 || r.height < 1 || r.maxval < 1 || r.maxval > 65535)
    throw DataError("invalid PNM dimensions or maxval in " + path.string());
  in.get();  // single whitespace before the raster

  const std::size_t count = static_cast<std::size_t>(r.width) * r.height * r.channels;
  const std::size_t bytes_per_sample = r.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buffer(count * bytes_per_sample);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (static_cast<std::size_t>(in.gcount()) != buffer.size())
    throw DataError("truncated PNM raster in " + path.string());

  r.samples.resize(count);
  if (bytes_per_sample == 1) {
    std::copy(buffer.begin(), buffer.end(), r.samples.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i)
      r.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
  }
  return r;
}

#ifdef HDP_HAVE_PNG
RawRaster read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  RawRaster r;
  r.width = static_cast<int>(image.width);
  r.height = static_cast<int>(image.height);
  r.channels = color ? 3 : 1;
  r.maxval = 255;
  r.samples.assign(buffer.begin(), buffer.end());
  return r;
}
#endif

bool has_extension(const fs::path& path, std::string_view ext) {
  std::string e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

}  // namespace

bool png_supported() {
#ifdef HDP_HAVE_PNG
  return true;
#else
  return false;
#endif
}

RawRaster read_raster(const fs::path& path) {
  if (has_extension(path, ".png")) {
#ifdef HDP_HAVE_PNG
    return read_png(path);
#else
    throw DataError("PNG support not compiled in: " + path.string());
#endif
  }
  return read_pnm(path);
}

void write_pnm(const RawRaster& raster, const fs::path& path) {
  if (raster.channels != 1 && raster.channels != 3)
    throw DataError("PNM output supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << (raster.channels == 1 ? "P5" : "P6") << '\n'
      << raster.width << ' ' << raster.height << '\n'
      << raster.maxval << '\n';
  if (raster.maxval > 255) {
    std::vector<char> buffer(raster.samples.size() * 2);
    for (std::size_t i = 0; i < raster.samples.size(); ++i) {
      buffer[2 * i] = static_cast<char>(raster.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<char>(raster.samples[i] & 0xff);
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  } else {
    std::vector<char> buffer(raster.samples.begin(), raster.samples.end());
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw DataError("failed writing " + path.string());
}

RasterImage load_image(const fs::path& path) {
  RawRaster raw = read_raster(path);
  if (raw.maxval > 255) throw DataError("expected 8-bit samples in " + path.string());
  RasterImage image;
  image.width = raw.width;
  image.height = raw.height;
  image.channels = raw.channels;
  image.data.assign(raw.samples.begin(), raw.samples.end());
  return image;
}

void save_image(const RasterImage& image, const fs::path& path) {
  RawRaster raw;
  raw.width = image.width;
  raw.height = image.height;
  raw.channels = image.channels;
  raw.maxval = 255;
  raw.samples.assign(image.data.begin(), image.data.end());
  write_pnm(raw, path);
}

StereoPair load_stereo_pair(const fs::path& left_path, const fs::path& right_path, int d_max,
                            std::string name) {
  if (d_max < 1) throw ConfigError("d_max must be >= 1");
  StereoPair pair;
  pair.left = load_image(left_path);
  pair.right = load_image(right_path);
  if (pair.left.width != pair.right.width || pair.left.height != pair.right.height ||
      pair.left.channels != pair.right.channels)
    throw DataError("dimension mismatch between " + left_path.string() + " and " + right_path.string());
  pair.d_max = d_max;
  pair.name = name.empty() ? left_path.parent_path().filename().string() : std::move(name);
  return pair;
}

DisparityMap decode_disparity(const RawRaster& raster, const GroundTruthOptions& options,
                              std::size_t* clamped) {
  if (raster.channels != 1) throw DataError("ground truth must be single-channel");
  if (options.scale < 1) throw ConfigError("ground-truth scale must be >= 1");
  DisparityMap map(raster.width, raster.height, options.d_max >= 0 ? options.d_max : 0, options.scale);
  std::size_t over = 0;
  int largest = 0;
  for (std::size_t i = 0; i < raster.samples.size(); ++i) {
    const int stored = raster.samples[i];
    const int value = stored / options.scale;
    map.values[i] = value;
    if (options.zero_is_invalid && stored == 0) {
      map.valid[i] = 0;
      map.values[i] = 0;
    } else if (options.d_max >= 0 && value > options.d_max) {
      map.valid[i] = 0;
      map.values[i] = 0;
      ++over;
    } else {
      largest = std::max(largest, value);
    }
  }
  if (options.d_max < 0) map.d_max = largest;
  if (over > 0)
    spdlog::warn("{} ground-truth pixels exceed d_max={} and were marked invalid", over, options.d_max);
  if (clamped) *clamped = over;
  return map;
}

DisparityMap load_ground_truth(const fs::path& path, const GroundTruthOptions& options) {
  return decode_disparity(read_raster(path), options);
}

OcclusionMask load_occlusion_mask(const fs::path& path) {
  RawRaster raw = read_raster(path);
  if (raw.channels != 1) throw DataError("occlusion mask must be single-channel: " + path.string());
  OcclusionMask mask{raw.width, raw.height, std::vector<std::uint8_t>(raw.samples.size())};
  for (std::size_t i = 0; i < raw.samples.size(); ++i)
    mask.occluded[i] = raw.samples[i] == raw.maxval ? 0 : 1;
  return mask;
}

void save_disparity_pgm(const DisparityMap& map, const fs::path& path) {
  RawRaster raw;
  raw.width = map.width;
  raw.height = map.height;
  raw.channels = 1;
  raw.samples.resize(map.pixel_count());
  int largest = 0;
  for (std::size_t i = 0; i < map.pixel_count(); ++i) {
    const int stored = map.valid[i] ? map.values[i] * map.scale : 0;
    if (stored < 0 || stored > 65535) throw DataError("disparity not representable in a PGM");
    raw.samples[i] = static_cast<std::uint16_t>(stored);
    largest = std::max(largest, stored);
  }
  raw.maxval = largest > 255 ? 65535 : 255;
  write_pnm(raw, path);
}

RasterImage render_error_overlay(const DisparityMap& pred, const DisparityMap& gt,
                                 const OcclusionMask* occlusion, int threshold) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw DataError("prediction and ground truth dimensions differ");
  if (occlusion && (occlusion->width != gt.width || occlusion->height != gt.height))
    throw DataError("occlusion mask dimensions differ");
  RasterImage out(pred.width, pred.height, 3, 0);
  const double gray_scale = 255.0 / std::max(1, std::max(pred.d_max, gt.d_max));
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    std::uint8_t* px = &out.data[i * 3];
    if (!gt.valid[i] || (occlusion && occlusion->occluded[i])) continue;
    if (!pred.valid[i] || std::abs(pred.values[i] - gt.values[i]) >= threshold) {
      px[0] = 255;
      continue;
    }
    const auto g = static_cast<std::uint8_t>(std::clamp(pred.values[i] * gray_scale, 0.0, 255.0));
    px[0] = px[1] = px[2] = g;
  }
  return out;
}

ArtifactPaths save_disparity_artifacts(const DisparityMap& map, const fs::path& base_path,
                                       const OverlayInputs& overlay) {
  ArtifactPaths paths;
  paths.disparity = base_path;
  paths.disparity += ".pgm";
  save_disparity_pgm(map, paths.disparity);
  if (overlay.ground_truth) {
    fs::path overlay_path = base_path;
    overlay_path += "_errors.ppm";
    save_image(render_error_overlay(map, *overlay.ground_truth, overlay.occlusion, overlay.threshold),
               overlay_path);
    paths.overlay = overlay_path;
  }
  return paths;
}

namespace {

std::optional<fs::path> probe(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".pgm", ".ppm", ".png"}) {
    fs::path candidate = dir / (stem + ext);
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace

std::vector<DatasetEntry> list_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError("dataset directory not found: " + root.string());
  std::vector<DatasetEntry> entries;
  for (const auto& item : fs::directory_iterator(root)) {
    if (!item.is_directory()) continue;
    auto left = probe(item.path(), "view1");
    auto right = probe(item.path(), "view5");
    if (!left || !right) continue;
    DatasetEntry e;
    e.name = item.path().filename().string();
    e.left = *left;
    e.right = *right;
    e.gt_left = probe(item.path(), "disp1");
    e.gt_right = probe(item.path(), "disp5");
    e.occlusion = probe(item.path(), "occ1");
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.name < b.name; });
  return entries;
}

}  // namespace hdp
