#pragma once

#include <span>
#include <vector>

#include "orsim/channels_spatial.hpp"

namespace orsim {

using FeatureVector = std::vector<float>;

// Model window in pixels; both sides divisible by shrink.
struct WindowSpec {
  int width = 32;
  int height = 28;
  int shrink = 4;

  void validate() const;  // ArgumentError unless sizes are positive multiples of shrink
  int cells_x() const { return width / shrink; }
  int cells_y() const { return height / shrink; }

  bool operator==(const WindowSpec&) const = default;
};

// Channels pooled into shrink x shrink cells; data dims are floor(dim / shrink).
struct AggregatedStack {
  int shrink = 4;
  ChannelStack data;
};

// Isotropic triangle smoothing of the colour and gradient channels; frequency
// channels pass through untouched. Channel order is preserved.
ChannelStack region_convolve(const ChannelStack& stack, int radius);

// Block means of one plane over non-overlapping shrink x shrink cells. Each
// mean is formed as first + sum(v - first) / n so constant blocks come out
// exactly constant.
std::vector<double> block_means(std::span<const double> plane, int width, int height, int shrink);

// Block means then binomial post-smoothing on the cell grid.
// shrink must be 2, 4 or 8 and not exceed either dimension.
AggregatedStack acf_pool(const ChannelStack& stack, int shrink, int post_smooth_radius = 1);

// Cells of the window whose top-left cell is (cell_x, cell_y), channel-major
// then row-major. Length = cells_x * cells_y * channels.
FeatureVector window_vector(const AggregatedStack& agg, const WindowSpec& window, int cell_x,
                            int cell_y);

// Same, written to out (which must hold the full length).
void window_vector_into(const AggregatedStack& agg, const WindowSpec& window, int cell_x, int cell_y,
                        std::span<float> out);

std::size_t feature_length(const WindowSpec& window, int channels);

}  // namespace orsim
