#include "orsim/feature_pipeline.hpp"

#include <algorithm>

#include "orsim/errors.hpp"

namespace orsim {

void ChannelConfig::validate() const {
  if (shrink != 2 && shrink != 4 && shrink != 8) throw ConfigError("shrink must be 2, 4 or 8");
  if (pre_smooth < 0 || pre_smooth > 3) throw ConfigError("pre_smooth must be in 0..3");
  if (post_smooth < 0 || post_smooth > 3) throw ConfigError("post_smooth must be in 0..3");
  if (region_radius < 1) throw ConfigError("region_radius must be >= 1");
  if (gm_norm_radius < 1) throw ConfigError("gm_norm_radius must be >= 1");
  if (!(gm_epsilon > 0.0)) throw ConfigError("gm_epsilon must be positive");
  if (!use_color && !use_gradient && !use_frequency) throw ConfigError("no channel family enabled");
  if (use_frequency) frequency.validate();
}

ChannelLayout channel_layout(const ChannelConfig& cfg) {
  ChannelLayout out;
  if (cfg.use_color) {
    static constexpr const char* kNames[3][3] = {{"R", "G", "B"}, {"L", "U", "V"}, {"H", "S", "V"}};
    for (const char* c : kNames[static_cast<int>(cfg.color)]) {
      out.names.push_back(std::string(to_string(cfg.color)) + "_" + c);
      out.groups.push_back(ChannelGroup::Color);
    }
  }
  if (cfg.use_gradient) {
    out.names.push_back("GM");
    out.groups.push_back(ChannelGroup::GradientMagnitude);
  }
  if (cfg.use_frequency) {
    for (auto& s : frequency_channel_layout(cfg.frequency)) {
      out.names.push_back(std::move(s.name));
      out.groups.push_back(s.group);
    }
  }
  return out;
}

FeaturePipeline::FeaturePipeline(ChannelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  ChannelLayout layout = channel_layout(cfg_);
  names_ = std::move(layout.names);
  groups_ = std::move(layout.groups);
  int reach = cfg_.use_color || cfg_.use_gradient ? cfg_.region_radius : 0;
  if (cfg_.use_frequency) {
    freq_ = std::make_unique<FrequencyChannelComputer>(cfg_.frequency);
    reach = std::max(reach, freq_->max_kernel_radius());
  }
  context_ = (reach + cfg_.shrink - 1) / cfg_.shrink * cfg_.shrink;
}

RasterImage FeaturePipeline::prepare(const RasterImage& img) const {
  if (img.channels() == 3) return smooth(img, cfg_.pre_smooth);
  if (img.channels() != 1) throw ArgumentError("images must have 1 or 3 channels");
  // Grey input is treated as an RGB image with equal components.
  std::vector<double> rgb;
  rgb.reserve(img.plane_size() * 3);
  for (int c = 0; c < 3; ++c) rgb.insert(rgb.end(), img.data().begin(), img.data().end());
  return smooth(RasterImage(img.width(), img.height(), 3, std::move(rgb)), cfg_.pre_smooth);
}

ChannelStack FeaturePipeline::channels(const RasterImage& img) const {
  const RasterImage pre = prepare(img);
  ChannelStack out(img.width(), img.height());
  if (cfg_.use_color) out.append(color_channels(pre, cfg_.color));
  if (cfg_.use_gradient)
    out.append(gradient_magnitude(pre, {0, cfg_.gm_norm_radius, cfg_.gm_epsilon}));
  if (cfg_.use_color || cfg_.use_gradient) out = region_convolve(out, cfg_.region_radius);
  if (cfg_.use_frequency)
    out.append(freq_->compute_stack(fourier_orders(complex_gradient(pre), cfg_.frequency.max_order)));
  return out;
}

AggregatedStack FeaturePipeline::aggregate(const RasterImage& img) const {
  const int s = cfg_.shrink;
  if (img.width() < s || img.height() < s) throw ArgumentError("image smaller than one cell");
  const RasterImage pre = prepare(img);
  const int cw = img.width() / s, ch = img.height() / s;
  ChannelStack cells(cw, ch);
  for (std::size_t c = 0; c < names_.size(); ++c) cells.add_zero(names_[c], groups_[c]);

  auto pool_into = [&](int channel, std::span<const double> plane) {
    std::vector<double> pooled = block_means(plane, img.width(), img.height(), s);
    if (cfg_.post_smooth > 0)
      pooled = smooth(RasterImage(cw, ch, 1, std::move(pooled)), cfg_.post_smooth).data();
    std::copy(pooled.begin(), pooled.end(), cells.plane(channel).begin());
  };

  int next = 0;
  if (cfg_.use_color || cfg_.use_gradient) {
    ChannelStack spatial(img.width(), img.height());
    if (cfg_.use_color) spatial.append(color_channels(pre, cfg_.color));
    if (cfg_.use_gradient)
      spatial.append(gradient_magnitude(pre, {0, cfg_.gm_norm_radius, cfg_.gm_epsilon}));
    spatial = region_convolve(spatial, cfg_.region_radius);
    for (int c = 0; c < spatial.size(); ++c) pool_into(next++, spatial.plane(c));
  }
  if (cfg_.use_frequency) {
    const int base = next;
    freq_->compute(fourier_orders(complex_gradient(pre), cfg_.frequency.max_order),
                   [&](int c, std::span<const double> plane) { pool_into(base + c, plane); });
  }
  return {s, std::move(cells)};
}

}  // namespace orsim
