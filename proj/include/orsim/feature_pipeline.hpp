#pragma once

#include <memory>
#include <string>
#include <vector>

#include "orsim/aggregate.hpp"
#include "orsim/channels_frequency.hpp"
#include "orsim/channels_spatial.hpp"

namespace orsim {

// Everything that decides which channels a model sees.
struct ChannelConfig {
  ColorSpace color = ColorSpace::LUV;
  bool use_color = true;
  bool use_gradient = true;
  bool use_frequency = true;
  FrequencyFeatureConfig frequency;
  int shrink = 4;
  int pre_smooth = 1;      // binomial radius applied before any channel
  int post_smooth = 1;     // binomial radius on the cell grid
  int region_radius = 8;   // triangle radius for colour and gradient channels
  int gm_norm_radius = 5;
  double gm_epsilon = 0.005;

  void validate() const;  // ConfigError
  bool operator==(const ChannelConfig&) const = default;
};

struct ChannelLayout {
  std::vector<std::string> names;
  std::vector<ChannelGroup> groups;
};

// Channel order fixed by the configuration alone: colour, GM, frequency.
ChannelLayout channel_layout(const ChannelConfig& cfg);

// Full SFCF computation for one image: pre-smoothing, colour, normalised
// gradient magnitude and the frequency channels, region smoothing, pooling.
// Frequency planes are pooled as they are produced, so a full-resolution
// stack of every channel never exists at once.
class FeaturePipeline {
 public:
  explicit FeaturePipeline(ChannelConfig cfg);

  const ChannelConfig& config() const { return cfg_; }
  const std::vector<std::string>& channel_names() const { return names_; }
  const std::vector<ChannelGroup>& channel_groups() const { return groups_; }
  int channel_count() const { return static_cast<int>(names_.size()); }
  int shrink() const { return cfg_.shrink; }

  // Pixels of margin a window needs on every side so that no kernel it sees
  // reaches the border; a multiple of shrink.
  int context_pixels() const { return context_; }

  // Pixel-resolution channels after region smoothing, before pooling.
  ChannelStack channels(const RasterImage& img) const;

  AggregatedStack aggregate(const RasterImage& img) const;

 private:
  RasterImage prepare(const RasterImage& img) const;

  ChannelConfig cfg_;
  std::unique_ptr<FrequencyChannelComputer> freq_;
  std::vector<std::string> names_;
  std::vector<ChannelGroup> groups_;
  int context_ = 0;
};

}  // namespace orsim
