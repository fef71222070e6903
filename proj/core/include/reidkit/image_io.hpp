#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "reidkit/preprocess.hpp"

namespace reidkit {

/// Reads an 8-bit PNG as RGB in [0, 1]. Gray and palette images are expanded,
/// alpha is composited onto black. Throws kImageDecode naming the file.
RgbImage read_png_rgb(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG; values are clamped to [0,1] and rounded to 1/255.
void write_png_rgb(const RgbImage& img, const std::filesystem::path& path);

/// Single-channel (or any) PNG mask: a pixel is set when any colour channel is nonzero.
BinaryMask read_png_mask(const std::filesystem::path& path);

/// COCO-style polygon list: each polygon is a flat [x0, y0, x1, y1, ...] list
/// in pixel coordinates.
using Polygon = std::vector<double>;

/// Rasterizes all polygons together with the even-odd rule, sampling at pixel
/// centres (x + 0.5, y + 0.5). A pixel is set when a horizontal ray from its
/// centre crosses the union of all polygon edges an odd number of times.
BinaryMask rasterize_polygons(std::span<const Polygon> polygons, std::size_t height,
                              std::size_t width);

/// JSON object {"height":H,"width":W,"segmentation":[[x,y,...],...]}.
BinaryMask read_polygon_mask(const std::filesystem::path& path);

}  // namespace reidkit
