#pragma once

#include <memory>
#include <vector>

#include "orsim/boosting.hpp"
#include "orsim/geometry.hpp"
#include "orsim/pyramid.hpp"

namespace orsim {

struct Detection {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double score = 0.0;
  int level = 0;

  Box box() const { return {x, y, w, h}; }
  bool operator==(const Detection&) const = default;
};

struct DetectOptions {
  int stride_cells = 1;
  double score_threshold = 0.0;  // kept when the full score is >= this
  bool use_cascade = true;
  PyramidOptions pyramid;
};

// A window at the top-left cell (cell_x, cell_y) of a pyramid level.
struct WindowHit {
  int level = 0;
  int cell_x = 0;
  int cell_y = 0;
  double score = 0.0;
};

// Sliding-window scoring over the fast pyramid. Trees are compiled into
// per-level offsets so windows are scored straight from the pooled stack.
class Detector {
 public:
  explicit Detector(BoostedModel model);
  Detector(BoostedModel model, std::shared_ptr<const FeaturePipeline> pipeline);

  const BoostedModel& model() const { return model_; }
  const FeaturePipeline& pipeline() const { return *pipeline_; }

  Pyramid pyramid(const RasterImage& img, const PyramidOptions& opts) const;

  // Windows of one level that pass the cascade (if enabled) and the threshold,
  // in row-major cell order.
  std::vector<WindowHit> scan_level(const PyramidLevel& level, int level_index, const DetectOptions& opts) const;

  // Level windows in original image pixels, clamped to the image. Windows
  // whose clamped box is empty are dropped.
  std::vector<Detection> detect(const RasterImage& img, const DetectOptions& opts = {}) const;
  std::vector<Detection> detect(const Pyramid& pyr, int image_width, int image_height,
                                const DetectOptions& opts = {}) const;

  Box window_box(const PyramidLevel& level, int cell_x, int cell_y) const;

 private:
  BoostedModel model_;
  std::shared_ptr<const FeaturePipeline> pipeline_;
};

// Score descending, then x, then y.
void sort_detections(std::vector<Detection>& dets);

// Greedy suppression of boxes whose IoU with a kept box exceeds the threshold.
std::vector<Detection> nms(std::vector<Detection> dets, double overlap_threshold = 0.5);

// nms, then drop every survivor whose intersection with a higher-scored kept
// survivor covers more than containment_threshold of its own area.
std::vector<Detection> two_step_nms(std::vector<Detection> dets, double overlap_threshold = 0.5,
                                    double containment_threshold = 0.65);

}  // namespace orsim
