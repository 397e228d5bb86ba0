#include "orsim/channels_spatial.hpp"

#include <algorithm>
#include <cmath>

#include "orsim/errors.hpp"

namespace orsim {

std::string_view to_string(ChannelGroup g) {
  switch (g) {
    case ChannelGroup::Color: return "color";
    case ChannelGroup::GradientMagnitude: return "gradient_magnitude";
    case ChannelGroup::FrequencyF1: return "frequency_F1";
    case ChannelGroup::FrequencyF2: return "frequency_F2";
    case ChannelGroup::FrequencyF3: return "frequency_F3";
  }
  return "?";
}

ChannelGroup parse_channel_group(std::string_view name) {
  for (int i = 0; i < kChannelGroupCount; ++i) {
    const auto g = static_cast<ChannelGroup>(i);
    if (to_string(g) == name) return g;
  }
  throw ArgumentError("unknown channel group: " + std::string(name));
}

void ChannelStack::add(std::string name, ChannelGroup group, std::vector<double> plane) {
  if (plane.size() != plane_size()) throw ArgumentError("channel '" + name + "' has the wrong size");
  if (std::find(names_.begin(), names_.end(), name) != names_.end())
    throw ArgumentError("duplicate channel name '" + name + "'");
  names_.push_back(std::move(name));
  groups_.push_back(group);
  data_.insert(data_.end(), plane.begin(), plane.end());
}

void ChannelStack::add_zero(std::string name, ChannelGroup group) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end())
    throw ArgumentError("duplicate channel name '" + name + "'");
  names_.push_back(std::move(name));
  groups_.push_back(group);
  data_.resize(data_.size() + plane_size(), 0.0);
}

void ChannelStack::append(const ChannelStack& other) {
  if (other.width_ != width_ || other.height_ != height_)
    throw ArgumentError("cannot append channel stacks of different size");
  for (int c = 0; c < other.size(); ++c) {
    const auto p = other.plane(c);
    add(other.name(c), other.group(c), std::vector<double>(p.begin(), p.end()));
  }
}

std::span<const double> ChannelStack::plane(int c) const {
  return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
}

std::span<double> ChannelStack::plane(int c) {
  return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
}

ChannelStack color_channels(const RasterImage& img, ColorSpace space) {
  if (img.channels() != 3) throw ArgumentError("colour channels need a 3-channel image");
  const RasterImage conv = to_color_space(img, space);
  static constexpr const char* kNames[3][3] = {{"R", "G", "B"}, {"L", "U", "V"}, {"H", "S", "V"}};
  const int row = static_cast<int>(space);
  ChannelStack out(img.width(), img.height());
  for (int c = 0; c < 3; ++c) {
    const auto p = conv.plane(c);
    out.add(std::string(to_string(space)) + "_" + kNames[row][c], ChannelGroup::Color,
            std::vector<double>(p.begin(), p.end()));
  }
  return out;
}

RasterImage gradient_magnitude_raw(const RasterImage& img) {
  RasterImage mag(img.width(), img.height(), 1, 0.0);
  auto m = mag.plane(0);
  for (int c = 0; c < img.channels(); ++c) {
    const GradientPair g = gradients(extract_channel(img, c));
    const auto dx = g.dx.plane(0), dy = g.dy.plane(0);
    for (std::size_t i = 0; i < m.size(); ++i)
      m[i] = std::max(m[i], std::sqrt(dx[i] * dx[i] + dy[i] * dy[i]));
  }
  return mag;
}

RasterImage normalize_gradient_magnitude(const RasterImage& magnitude, int norm_radius,
                                         double epsilon) {
  if (magnitude.channels() != 1) throw ArgumentError("normalisation expects one channel");
  if (!(epsilon > 0.0)) throw ArgumentError("normalisation epsilon must be positive");
  const RasterImage energy = triangle_smooth(magnitude, norm_radius);
  RasterImage out = magnitude;
  auto o = out.plane(0);
  const auto s = energy.plane(0);
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = o[i] / (s[i] + epsilon);
  return out;
}

ChannelStack gradient_magnitude(const RasterImage& img, const GradientMagnitudeOptions& opts) {
  if (img.channels() != 1 && img.channels() != 3)
    throw ArgumentError("gradient magnitude needs a 1- or 3-channel image");
  const RasterImage smoothed = smooth(img, opts.pre_smooth_radius);
  const RasterImage norm =
      normalize_gradient_magnitude(gradient_magnitude_raw(smoothed), opts.norm_radius, opts.epsilon);
  ChannelStack out(img.width(), img.height());
  out.add("GM", ChannelGroup::GradientMagnitude, norm.data());
  return out;
}

}  // namespace orsim
