#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace orsim {

// Planar raster of real values. Plane c occupies
// data[c * width * height, (c + 1) * width * height), rows top to bottom.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, double fill = 0.0);
  RasterImage(int width, int height, int channels, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const { return data_.empty(); }

  double& at(int c, int x, int y) { return data_[index(c, x, y)]; }
  double at(int c, int x, int y) const { return data_[index(c, x, y)]; }

  std::span<double> plane(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t index(int c, int x, int y) const {
    return static_cast<std::size_t>(c) * plane_size() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

struct GradientPair {
  RasterImage dx;
  RasterImage dy;
};

enum class ColorSpace { RGB, LUV, HSV };

ColorSpace parse_color_space(std::string_view name);
std::string_view to_string(ColorSpace space);

// Bilinear resampling with half-pixel-centred coordinates; output dims are
// round(dim * scale), at least 1.
RasterImage resample(const RasterImage& img, double scale);
RasterImage resample_to(const RasterImage& img, int out_width, int out_height);

// Resampling used for pyramid levels: halves repeatedly while the target is at
// most half the current size, then finishes with one bilinear step. Each halving
// is a 2x2 box average, so large downscales do not alias.
RasterImage resample_pyramid(const RasterImage& img, int out_width, int out_height);

// Three-channel conversion; each output channel lands in [0,1]:
//   LUV: L/100, (u+134)/354, (v+140)/262, D65 white, linear RGB input.
//   HSV: H/360, S, V.
// A single-channel image passes through unchanged when space is RGB.
RasterImage to_color_space(const RasterImage& img, ColorSpace space);

// Centred differences with replicate-edge borders.
GradientPair gradients(const RasterImage& channel);

// Separable binomial filter of the given radius (radius 1: [1 2 1]/4),
// reflected borders. Constants are reproduced exactly.
RasterImage smooth(const RasterImage& img, int radius);

// Separable triangle filter [1 2 .. r+1 .. 2 1]/(r+1)^2, reflected borders.
RasterImage triangle_smooth(const RasterImage& img, int radius);

// 1-D filter taps used by the two smoothers above (integer weights, unnormalised).
std::vector<double> binomial_taps(int radius);
std::vector<double> triangle_taps(int radius);

// Separable convolution of every plane with the same symmetric integer taps.
RasterImage separable_filter(const RasterImage& img, std::span<const double> taps);

// Half-sample symmetric reflection of index i into [0, n).
int reflect_index(int i, int n);

RasterImage extract_channel(const RasterImage& img, int c);
RasterImage flip_horizontal(const RasterImage& img);

// Exact rotation by quarter_turns * 90 degrees. Positive turns map pixel
// (x, y) to (H-1-y, x), which turns a gradient (dx, dy) into (-dy, dx).
RasterImage rotate90(const RasterImage& img, int quarter_turns);

// Bilinear rotation about the image centre by `degrees` in the same sense as
// rotate90; samples falling outside the source take `background`.
RasterImage rotate_bilinear(const RasterImage& img, double degrees, double background = 0.0);

// Crop with replicate-edge padding for regions that leave the image.
RasterImage crop(const RasterImage& img, int x0, int y0, int width, int height);

double plane_sum(std::span<const double> plane);

}  // namespace orsim
