#include "orsim/detector.hpp"

#include <algorithm>
#include <cstdint>

#include "orsim/errors.hpp"
#include "orsim/parallel.hpp"

namespace orsim {

namespace {

// Trees flattened with each split feature turned into an offset relative to
// the window's top-left cell of channel 0.
struct CompiledTrees {
  std::vector<std::int64_t> offset;
  std::vector<float> threshold;
  std::vector<std::int32_t> left, right;  // absolute node indices
  std::vector<std::int32_t> value;        // leaf vote, 0 for internal nodes
  std::vector<std::int32_t> root;
};

CompiledTrees compile(const BoostedModel& m, int plane_width, std::size_t plane_size) {
  const int cx = m.window.cells_x(), cy = m.window.cells_y();
  const int per_channel = cx * cy;
  CompiledTrees c;
  for (const auto& tree : m.trees) {
    const auto base = static_cast<std::int32_t>(c.offset.size());
    c.root.push_back(base);
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        c.offset.push_back(0);
        c.threshold.push_back(0.0f);
        c.left.push_back(-1);
        c.right.push_back(-1);
        c.value.push_back(n.value);
        continue;
      }
      const int ch = n.feature / per_channel, rem = n.feature % per_channel;
      const int r = rem / cx, col = rem % cx;
      c.offset.push_back(static_cast<std::int64_t>(ch) * static_cast<std::int64_t>(plane_size) +
                         static_cast<std::int64_t>(r) * plane_width + col);
      c.threshold.push_back(n.threshold);
      c.left.push_back(base + n.left);
      c.right.push_back(base + n.right);
      c.value.push_back(0);
    }
  }
  return c;
}

}  // namespace

Detector::Detector(BoostedModel model)
    : Detector(model, std::make_shared<const FeaturePipeline>(model.channels)) {}

Detector::Detector(BoostedModel model, std::shared_ptr<const FeaturePipeline> pipeline)
    : model_(std::move(model)), pipeline_(std::move(pipeline)) {
  if (!pipeline_) throw ArgumentError("detector needs a feature pipeline");
  if (!(pipeline_->config() == model_.channels)) throw ArgumentError("pipeline configuration differs from the model");
  model_.window.validate();
  if (model_.window.shrink != model_.channels.shrink) throw ArgumentError("window shrink differs from channel shrink");
  if (model_.alphas.size() != model_.trees.size() || model_.thresholds.size() != model_.trees.size())
    throw ArgumentError("model needs one alpha and one threshold per tree");
  const std::size_t len = model_.feature_length();
  for (const auto& t : model_.trees) {
    if (t.nodes.empty()) throw ArgumentError("empty tree in model");
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) continue;
      if (static_cast<std::size_t>(n.feature) >= len) throw ArgumentError("tree feature index out of range");
      const auto nn = static_cast<int>(t.nodes.size());
      if (n.left < 0 || n.left >= nn || n.right < 0 || n.right >= nn) throw ArgumentError("tree child index out of range");
    }
  }
}

Pyramid Detector::pyramid(const RasterImage& img, const PyramidOptions& opts) const {
  return build_pyramid(img, *pipeline_, model_.lambda, model_.window, opts);
}

std::vector<WindowHit> Detector::scan_level(const PyramidLevel& level, int level_index,
                                            const DetectOptions& opts) const {
  if (opts.stride_cells < 1) throw ArgumentError("stride must be >= 1 cell");
  const ChannelStack& st = level.agg.data;
  if (st.size() != pipeline_->channel_count()) throw ArgumentError("level channel count differs from the model");
  const int W = st.width(), H = st.height();
  const int cx = model_.window.cells_x(), cy = model_.window.cells_y();
  std::vector<WindowHit> hits;
  if (W < cx || H < cy) return hits;
  // Levels are pooled in double; the classifier sees float, as in training.
  const std::vector<double>& d = st.data();
  std::vector<float> data(d.begin(), d.end());
  const CompiledTrees c = compile(model_, W, st.plane_size());
  const std::size_t T = model_.trees.size();
  for (int y = 0; y + cy <= H; y += opts.stride_cells) {
    for (int x = 0; x + cx <= W; x += opts.stride_cells) {
      const float* base = data.data() + static_cast<std::ptrdiff_t>(y) * W + x;
      double s = 0.0;
      bool rejected = false;
      for (std::size_t t = 0; t < T; ++t) {
        std::int32_t n = c.root[t];
        while (c.left[static_cast<std::size_t>(n)] >= 0) {
          const auto k = static_cast<std::size_t>(n);
          n = base[c.offset[k]] < c.threshold[k] ? c.left[k] : c.right[k];
        }
        s += model_.alphas[t] * c.value[static_cast<std::size_t>(n)];
        if (opts.use_cascade && s < model_.thresholds[t]) {
          rejected = true;
          break;
        }
      }
      if (!rejected && s >= opts.score_threshold) hits.push_back({level_index, x, y, s});
    }
  }
  return hits;
}

Box Detector::window_box(const PyramidLevel& level, int cell_x, int cell_y) const {
  const double s = model_.window.shrink;
  return {cell_x * s / level.scale_x, cell_y * s / level.scale_y, model_.window.width / level.scale_x,
          model_.window.height / level.scale_y};
}

std::vector<Detection> Detector::detect(const Pyramid& pyr, int image_width, int image_height,
                                        const DetectOptions& opts) const {
  std::vector<std::vector<WindowHit>> per_level(pyr.levels.size());
  parallel_for(pyr.levels.size(), opts.pyramid.threads, [&](std::size_t l) {
    per_level[l] = scan_level(pyr.levels[l], static_cast<int>(l), opts);
  });
  std::vector<Detection> out;
  for (std::size_t l = 0; l < per_level.size(); ++l) {
    for (const auto& h : per_level[l]) {
      const Box b = window_box(pyr.levels[l], h.cell_x, h.cell_y);
      const double x0 = std::clamp(b.x, 0.0, static_cast<double>(image_width));
      const double y0 = std::clamp(b.y, 0.0, static_cast<double>(image_height));
      const double x1 = std::clamp(b.x + b.w, 0.0, static_cast<double>(image_width));
      const double y1 = std::clamp(b.y + b.h, 0.0, static_cast<double>(image_height));
      if (!(x1 > x0) || !(y1 > y0)) continue;
      out.push_back({x0, y0, x1 - x0, y1 - y0, h.score, static_cast<int>(l)});
    }
  }
  sort_detections(out);
  return out;
}

std::vector<Detection> Detector::detect(const RasterImage& img, const DetectOptions& opts) const {
  return detect(pyramid(img, opts.pyramid), img.width(), img.height(), opts);
}

void sort_detections(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });
}

std::vector<Detection> nms(std::vector<Detection> dets, double overlap_threshold) {
  if (!(overlap_threshold > 0.0 && overlap_threshold < 1.0)) throw ArgumentError("overlap threshold must lie in (0, 1)");
  sort_detections(dets);
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (iou(d.box(), k.box()) > overlap_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> two_step_nms(std::vector<Detection> dets, double overlap_threshold,
                                    double containment_threshold) {
  if (!(containment_threshold > 0.0 && containment_threshold <= 1.0))
    throw ArgumentError("containment threshold must lie in (0, 1]");
  const std::vector<Detection> first = nms(std::move(dets), overlap_threshold);
  std::vector<Detection> kept;
  for (const auto& d : first) {
    const double a = area(d.box());
    bool contained = false;
    for (const auto& k : kept) {
      if (a > 0.0 && intersection(d.box(), k.box()) / a > containment_threshold) {
        contained = true;
        break;
      }
    }
    if (!contained) kept.push_back(d);
  }
  return kept;
}

}  // namespace orsim
