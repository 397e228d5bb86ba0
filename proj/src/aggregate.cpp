#include "orsim/aggregate.hpp"

#include <algorithm>

#include "orsim/errors.hpp"

namespace orsim {

void WindowSpec::validate() const {
  if (shrink < 1) throw ArgumentError("shrink must be positive");
  if (width < shrink || height < shrink || width % shrink != 0 || height % shrink != 0)
    throw ArgumentError("window " + std::to_string(width) + "x" + std::to_string(height) +
                        " is not a positive multiple of shrink " + std::to_string(shrink));
}

std::size_t feature_length(const WindowSpec& window, int channels) {
  return static_cast<std::size_t>(window.cells_x()) * window.cells_y() * channels;
}

ChannelStack region_convolve(const ChannelStack& stack, int radius) {
  if (radius < 1) throw ArgumentError("region kernel radius must be >= 1");
  ChannelStack out = stack;
  for (int c = 0; c < stack.size(); ++c) {
    const ChannelGroup g = stack.group(c);
    if (g != ChannelGroup::Color && g != ChannelGroup::GradientMagnitude) continue;
    const auto p = stack.plane(c);
    const RasterImage img(stack.width(), stack.height(), 1, std::vector<double>(p.begin(), p.end()));
    const RasterImage sm = triangle_smooth(img, radius);
    std::copy(sm.data().begin(), sm.data().end(), out.plane(c).begin());
  }
  return out;
}

std::vector<double> block_means(std::span<const double> plane, int width, int height, int shrink) {
  if (shrink < 1) throw ArgumentError("shrink must be positive");
  if (plane.size() != static_cast<std::size_t>(width) * height) throw ArgumentError("plane size mismatch");
  const int cw = width / shrink, ch = height / shrink;
  std::vector<double> out(static_cast<std::size_t>(cw) * ch);
  const double n = static_cast<double>(shrink) * shrink;
  for (int cy = 0; cy < ch; ++cy)
    for (int cx = 0; cx < cw; ++cx) {
      const std::size_t origin = static_cast<std::size_t>(cy) * shrink * width + static_cast<std::size_t>(cx) * shrink;
      const double first = plane[origin];
      double acc = 0.0;
      for (int y = 0; y < shrink; ++y) {
        const double* row = plane.data() + origin + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < shrink; ++x) acc += row[x] - first;
      }
      out[static_cast<std::size_t>(cy) * cw + cx] = first + acc / n;
    }
  return out;
}

AggregatedStack acf_pool(const ChannelStack& stack, int shrink, int post_smooth_radius) {
  if (shrink != 2 && shrink != 4 && shrink != 8) throw ArgumentError("shrink must be 2, 4 or 8");
  if (stack.width() < shrink || stack.height() < shrink)
    throw ArgumentError("stack smaller than one cell");
  if (post_smooth_radius < 0) throw ArgumentError("post-smoothing radius must be >= 0");
  const int cw = stack.width() / shrink, ch = stack.height() / shrink;
  AggregatedStack agg{shrink, ChannelStack(cw, ch)};
  for (int c = 0; c < stack.size(); ++c) {
    std::vector<double> cells = block_means(stack.plane(c), stack.width(), stack.height(), shrink);
    if (post_smooth_radius > 0) cells = smooth(RasterImage(cw, ch, 1, std::move(cells)), post_smooth_radius).data();
    agg.data.add(stack.name(c), stack.group(c), std::move(cells));
  }
  return agg;
}

void window_vector_into(const AggregatedStack& agg, const WindowSpec& window, int cell_x, int cell_y,
                        std::span<float> out) {
  if (window.shrink != agg.shrink) throw ArgumentError("window shrink differs from stack shrink");
  const int wx = window.cells_x(), wy = window.cells_y();
  const ChannelStack& s = agg.data;
  if (cell_x < 0 || cell_y < 0 || cell_x + wx > s.width() || cell_y + wy > s.height())
    throw ArgumentError("window at cell (" + std::to_string(cell_x) + "," + std::to_string(cell_y) +
                        ") leaves the aggregated stack");
  if (out.size() != feature_length(window, s.size())) throw ArgumentError("feature buffer has the wrong length");
  std::size_t k = 0;
  for (int c = 0; c < s.size(); ++c) {
    const auto p = s.plane(c);
    for (int y = 0; y < wy; ++y) {
      const double* row = p.data() + static_cast<std::size_t>(cell_y + y) * s.width() + cell_x;
      for (int x = 0; x < wx; ++x) out[k++] = static_cast<float>(row[x]);
    }
  }
}

FeatureVector window_vector(const AggregatedStack& agg, const WindowSpec& window, int cell_x, int cell_y) {
  FeatureVector v(feature_length(window, agg.data.size()));
  window_vector_into(agg, window, cell_x, cell_y, v);
  return v;
}

}  // namespace orsim
