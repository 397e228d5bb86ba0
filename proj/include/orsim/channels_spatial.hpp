#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orsim/imaging.hpp"

namespace orsim {

// Channel families. The pyramid fits one power-law exponent per group.
enum class ChannelGroup { Color, GradientMagnitude, FrequencyF1, FrequencyF2, FrequencyF3 };

inline constexpr int kChannelGroupCount = 5;

std::string_view to_string(ChannelGroup g);
ChannelGroup parse_channel_group(std::string_view name);

// Planar multi-channel real raster with a unique name and a group per channel.
class ChannelStack {
 public:
  ChannelStack() = default;
  ChannelStack(int width, int height) : width_(width), height_(height) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  int size() const { return static_cast<int>(names_.size()); }

  // Appends a plane; throws ArgumentError on a size mismatch or duplicate name.
  void add(std::string name, ChannelGroup group, std::vector<double> plane);
  // Reserves named slots filled with zeros; planes are then written in place.
  void add_zero(std::string name, ChannelGroup group);
  void append(const ChannelStack& other);

  std::span<const double> plane(int c) const;
  std::span<double> plane(int c);
  const std::string& name(int c) const { return names_[static_cast<std::size_t>(c)]; }
  ChannelGroup group(int c) const { return groups_[static_cast<std::size_t>(c)]; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ChannelGroup>& groups() const { return groups_; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const ChannelStack&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::string> names_;
  std::vector<ChannelGroup> groups_;
  std::vector<double> data_;
};

// Colour channels Omega_1, one per component of the requested space.
ChannelStack color_channels(const RasterImage& img, ColorSpace space);

struct GradientMagnitudeOptions {
  int pre_smooth_radius = 1;    // binomial pre-smoothing
  int norm_radius = 5;          // triangle radius of the normalisation kernel
  double epsilon = 0.005;
};

// Per-pixel max over channels of sqrt(dx^2 + dy^2), no smoothing, no normalisation.
RasterImage gradient_magnitude_raw(const RasterImage& img);

// M / (triangle_smooth(M) + epsilon).
RasterImage normalize_gradient_magnitude(const RasterImage& magnitude, int norm_radius,
                                         double epsilon);

// Omega_2: normalised gradient magnitude as a one-channel stack named "GM".
ChannelStack gradient_magnitude(const RasterImage& img, const GradientMagnitudeOptions& opts = {});

}  // namespace orsim
