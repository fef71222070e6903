#include "reidkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "reidkit/error.hpp"

namespace reidkit {

namespace {

std::vector<png_byte> decode(const std::filesystem::path& path, png_uint_32 format,
                             png_uint_32& height, png_uint_32& width) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::kImageDecode, path.string() + ": " + image.message);
  }
  image.format = format;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kImageDecode, path.string() + ": " + msg);
  }
  height = image.height;
  width = image.width;
  return buffer;
}

}  // namespace

RgbImage read_png_rgb(const std::filesystem::path& path) {
  png_uint_32 h = 0, w = 0;
  const auto buffer = decode(path, PNG_FORMAT_RGB, h, w);
  RgbImage img(h, w);
  std::transform(buffer.begin(), buffer.end(), img.data.begin(),
                 [](png_byte b) { return static_cast<double>(b) / 255.0; });
  return img;
}

void write_png_rgb(const RgbImage& img, const std::filesystem::path& path) {
  std::vector<png_byte> buffer(img.data.size());
  std::transform(img.data.begin(), img.data.end(), buffer.begin(), [](double v) {
    return static_cast<png_byte>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, path.string() + ": " + image.message);
  }
}

BinaryMask read_png_mask(const std::filesystem::path& path) {
  png_uint_32 h = 0, w = 0;
  const auto buffer = decode(path, PNG_FORMAT_RGB, h, w);
  BinaryMask mask(h, w);
  for (std::size_t p = 0; p < mask.data.size(); ++p) {
    mask.data[p] = (buffer[p * 3] | buffer[p * 3 + 1] | buffer[p * 3 + 2]) != 0 ? 1 : 0;
  }
  return mask;
}

BinaryMask rasterize_polygons(std::span<const Polygon> polygons, std::size_t height,
                              std::size_t width) {
  BinaryMask mask(height, width);
  std::vector<double> crossings;
  for (std::size_t y = 0; y < height; ++y) {
    const double cy = static_cast<double>(y) + 0.5;
    crossings.clear();
    for (const auto& poly : polygons) {
      const std::size_t n = poly.size() / 2;
      if (n < 3) continue;
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = poly[2 * i], yi = poly[2 * i + 1];
        const double xj = poly[2 * j], yj = poly[2 * j + 1];
        // Half-open rule so shared vertices are counted once.
        if ((yi > cy) != (yj > cy)) {
          crossings.push_back(xi + (cy - yi) * (xj - xi) / (yj - yi));
        }
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t x = 0; x < width; ++x) {
      const double cx = static_cast<double>(x) + 0.5;
      const auto left = std::lower_bound(crossings.begin(), crossings.end(), cx) - crossings.begin();
      if (left % 2 == 1) mask.set(y, x, true);
    }
  }
  return mask;
}

BinaryMask read_polygon_mask(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto h = doc.at("height").get<std::size_t>();
    const auto w = doc.at("width").get<std::size_t>();
    const auto polygons = doc.at("segmentation").get<std::vector<Polygon>>();
    return rasterize_polygons(polygons, h, w);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kImageDecode, path.string() + ": bad polygon mask: " + e.what());
  }
}

}  // namespace reidkit
