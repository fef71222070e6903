#include "reidkit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reidkit/error.hpp"

namespace reidkit {

namespace {

void check_image(const RgbImage& img) {
  if (img.height == 0 || img.width == 0 || img.data.size() != img.height * img.width * 3) {
    throw Error(ErrorCode::kInvalidArgument, "image must be non-empty with 3 channels");
  }
}

// Source coordinate for output index `dst` under half-pixel alignment.
double source_coord(std::size_t dst, std::size_t in, std::size_t out) {
  const double src = (static_cast<double>(dst) + 0.5) * static_cast<double>(in) /
                         static_cast<double>(out) -
                     0.5;
  return std::clamp(src, 0.0, static_cast<double>(in - 1));
}

}  // namespace

void TransformConfig::validate() const {
  if (target < 2) throw Error(ErrorCode::kInvalidArgument, "target must be >= 2");
  if (!(pad_value >= 0.0 && pad_value <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pad_value must lie in [0, 1]");
  }
  for (double s : std) {
    if (!(s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "std components must be > 0");
  }
}

Box mask_bounding_box(const BinaryMask& mask, std::size_t pad) {
  std::size_t y0 = mask.height, y1 = 0, x0 = mask.width, x1 = 0;
  bool any = false;
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      any = true;
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
    }
  }
  if (!any) throw Error(ErrorCode::kEmptyMask, "empty mask");
  const std::size_t top = y0 >= pad ? y0 - pad : 0;
  const std::size_t left = x0 >= pad ? x0 - pad : 0;
  const std::size_t bottom = std::min(y1 + pad, mask.height - 1);
  const std::size_t right = std::min(x1 + pad, mask.width - 1);
  return {left, top, right - left + 1, bottom - top + 1};
}

RgbImage crop_instance(const RgbImage& img, const BinaryMask& mask, std::size_t pad) {
  check_image(img);
  if (mask.height != img.height || mask.width != img.width ||
      mask.data.size() != mask.height * mask.width) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask is " + std::to_string(mask.height) + "x" + std::to_string(mask.width) +
                    " but image is " + std::to_string(img.height) + "x" +
                    std::to_string(img.width));
  }
  const Box box = mask_bounding_box(mask, pad);
  RgbImage out(box.height, box.width, 0.0);
  for (std::size_t y = 0; y < box.height; ++y) {
    for (std::size_t x = 0; x < box.width; ++x) {
      if (!mask.at(box.y + y, box.x + x)) continue;
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(box.y + y, box.x + x, c);
    }
  }
  return out;
}

RgbImage resize_bilinear(const RgbImage& img, std::size_t out_h, std::size_t out_w) {
  check_image(img);
  if (out_h == 0 || out_w == 0) {
    throw Error(ErrorCode::kInvalidArgument, "resize target must be non-empty");
  }
  RgbImage out(out_h, out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    const double sy = source_coord(y, img.height, out_h);
    const auto y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double wy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x) {
      const double sx = source_coord(x, img.width, out_w);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const double wx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = img.at(y0, x0, c) * (1.0 - wx) + img.at(y0, x1, c) * wx;
        const double bottom = img.at(y1, x0, c) * (1.0 - wx) + img.at(y1, x1, c) * wx;
        out.at(y, x, c) = top * (1.0 - wy) + bottom * wy;
      }
    }
  }
  return out;
}

Box content_box(std::size_t height, std::size_t width, std::size_t target) {
  const std::size_t longest = std::max(height, width);
  const double scale = static_cast<double>(target) / static_cast<double>(longest);
  auto scaled = [&](std::size_t side) -> std::size_t {
    if (side == longest) return target;
    const auto s = static_cast<std::size_t>(std::round(static_cast<double>(side) * scale));
    return std::clamp<std::size_t>(s, 1, target);
  };
  const std::size_t h = scaled(height);
  const std::size_t w = scaled(width);
  return {(target - w) / 2, (target - h) / 2, w, h};
}

RgbImage resize_pad_square(const RgbImage& img, const TransformConfig& cfg) {
  check_image(img);
  cfg.validate();
  const Box box = content_box(img.height, img.width, cfg.target);
  const RgbImage content = resize_bilinear(img, box.height, box.width);
  RgbImage canvas(cfg.target, cfg.target, cfg.pad_value);
  for (std::size_t y = 0; y < box.height; ++y) {
    const auto src = content.data.begin() + static_cast<std::ptrdiff_t>(y * box.width * 3);
    std::copy(src, src + static_cast<std::ptrdiff_t>(box.width * 3),
              canvas.data.begin() +
                  static_cast<std::ptrdiff_t>(((box.y + y) * cfg.target + box.x) * 3));
  }
  return canvas;
}

std::vector<double> normalize(const RgbImage& img, const TransformConfig& cfg) {
  cfg.validate();
  if (img.height != cfg.target || img.width != cfg.target) {
    throw Error(ErrorCode::kDimensionMismatch, "normalize expects a target x target canvas");
  }
  const std::size_t plane = img.height * img.width;
  std::vector<double> out(plane * 3);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      out[c * plane + p] = (img.data[p * 3 + c] - cfg.mean[c]) / cfg.std[c];
    }
  }
  return out;
}

RgbImage denormalize(std::span<const double> chw, std::size_t height, std::size_t width,
                     const TransformConfig& cfg) {
  cfg.validate();
  const std::size_t plane = height * width;
  if (chw.size() != plane * 3) {
    throw Error(ErrorCode::kDimensionMismatch, "tensor size does not match 3 x height x width");
  }
  RgbImage out(height, width);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      out.data[p * 3 + c] = chw[c * plane + p] * cfg.std[c] + cfg.mean[c];
    }
  }
  return out;
}

ChannelStats compute_stats(std::span<const RgbImage> images) {
  if (images.empty()) throw Error(ErrorCode::kEmptyDomain, "no images for statistics");
  std::array<double, 3> sum{};
  double count = 0.0;
  for (const auto& img : images) {
    check_image(img);
    for (std::size_t p = 0; p < img.height * img.width; ++p) {
      for (std::size_t c = 0; c < 3; ++c) sum[c] += img.data[p * 3 + c];
    }
    count += static_cast<double>(img.height * img.width);
  }
  ChannelStats stats;
  for (std::size_t c = 0; c < 3; ++c) stats.mean[c] = sum[c] / count;

  std::array<double, 3> sq{};
  for (const auto& img : images) {
    for (std::size_t p = 0; p < img.height * img.width; ++p) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = img.data[p * 3 + c] - stats.mean[c];
        sq[c] += d * d;
      }
    }
  }
  for (std::size_t c = 0; c < 3; ++c) {
    stats.std[c] = std::sqrt(sq[c] / count);
    if (!(stats.std[c] > 1e-12)) {
      throw Error(ErrorCode::kDegenerateStd,
                  "degenerate std on channel " + std::to_string(c) + " (constant input)");
    }
  }
  return stats;
}

}  // namespace reidkit
