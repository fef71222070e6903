#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace reidkit {

/// HWC image with values in [0, 1].
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;  // height * width * 3

  RgbImage() = default;
  RgbImage(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), data(h * w * 3, fill) {}

  double& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * 3 + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data[(y * width + x) * 3 + c];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(std::size_t h, std::size_t w, bool fill = false)
      : height(h), width(w), data(h * w, fill ? 1 : 0) {}

  bool at(std::size_t y, std::size_t x) const { return data[y * width + x] != 0; }
  void set(std::size_t y, std::size_t x, bool v) { data[y * width + x] = v ? 1 : 0; }
};

/// Channel statistics measured on zero-padded 224 px canvases of the fish crops.
inline constexpr std::array<double, 3> kFishCanvasMean = {0.0495, 0.0503, 0.0535};
inline constexpr std::array<double, 3> kFishCanvasStd = {0.1370, 0.1363, 0.1412};

struct TransformConfig {
  std::size_t target = 224;
  double pad_value = 0.0;
  std::array<double, 3> mean = kFishCanvasMean;
  std::array<double, 3> std = kFishCanvasStd;

  /// Throws when target < 2, pad_value outside [0,1] or any std <= 0.
  void validate() const;
};

/// Pixel rectangle; `x`, `y` are the top-left corner.
struct Box {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Tight bounding box of the mask grown by `pad` on every side, clipped to
/// the image. Throws kEmptyMask when no pixel is set.
Box mask_bounding_box(const BinaryMask& mask, std::size_t pad);

/// Crops the instance selected by `mask`. Pixels inside the box but outside
/// the mask are zeroed.
RgbImage crop_instance(const RgbImage& img, const BinaryMask& mask, std::size_t pad = 2);

/// Aspect-preserving bilinear resize so the longer side equals cfg.target,
/// centred on a cfg.target square canvas filled with cfg.pad_value.
///
/// The short side is round-half-away-from-zero(side * target / long_side).
/// Sampling uses half-pixel centres (src = (dst + 0.5) * in / out - 0.5,
/// clamped to the image) with no antialias filter. Left/top padding is
/// floor(slack / 2), right/bottom takes the remainder.
RgbImage resize_pad_square(const RgbImage& img, const TransformConfig& cfg);

/// Where resize_pad_square() placed the image content on the canvas.
Box content_box(std::size_t height, std::size_t width, std::size_t target);

/// Bilinear resize with half-pixel centres to exactly out_h x out_w.
RgbImage resize_bilinear(const RgbImage& img, std::size_t out_h, std::size_t out_w);

/// (x - mean[c]) / std[c], laid out CHW. The image must be target x target.
std::vector<double> normalize(const RgbImage& img, const TransformConfig& cfg);

/// Inverse of normalize(): CHW tensor back to an HWC image.
RgbImage denormalize(std::span<const double> chw, std::size_t height, std::size_t width,
                     const TransformConfig& cfg);

struct ChannelStats {
  std::array<double, 3> mean{};
  std::array<double, 3> std{};
};

/// Per-channel mean and population standard deviation over every canvas pixel
/// (padding included). Two passes with 64-bit accumulation, images visited in
/// order. Throws kEmptyDomain for no images and kDegenerateStd when a channel
/// has zero spread.
ChannelStats compute_stats(std::span<const RgbImage> images);

}  // namespace reidkit
