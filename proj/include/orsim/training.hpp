#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "orsim/boosting.hpp"
#include "orsim/detector.hpp"
#include "orsim/evalkit.hpp"

namespace orsim {

// Region around `box` resampled so that the box, widened or narrowed to the
// window's aspect ratio at equal area, fills the window exactly; `context`
// pixels of surround are kept on every side. Output is
// (window.width + 2 context) x (window.height + 2 context).
RasterImage positive_crop(const RasterImage& img, const Box& box, const WindowSpec& window, int context);

// Crops of every annotated box whose image id is in `ids`, in annotation order.
std::vector<RasterImage> positive_crops(const std::vector<std::string>& ids, const std::vector<RasterImage>& images,
                                        const std::vector<AnnotatedBox>& truths, const WindowSpec& window,
                                        int context);

// Feature vector of the window at the centre of a crop made by positive_crop.
FeatureVector crop_features(const FeaturePipeline& pipeline, const RasterImage& crop, const WindowSpec& window,
                            int context);

struct PositiveSampling {
  // One pyramid per entry; every truth contributes its best window from each.
  std::vector<PyramidOptions> pyramids{PyramidOptions{}};
  double min_iou = 0.5;  // truths whose best window overlaps less are dropped
  bool mirror = true;    // also sample the horizontally flipped image
  int threads = 1;
};

// Feature vectors of the pyramid windows that best overlap each annotated box
// (highest IoU, then lowest level, row, column), i.e. exactly what the
// detector scores at that object. Truths whose image id is absent are ignored.
std::vector<FeatureVector> pyramid_positives(const std::vector<std::string>& ids,
                                             const std::vector<RasterImage>& images,
                                             const std::vector<AnnotatedBox>& truths, const FeaturePipeline& pipeline,
                                             const LambdaTable& lambda, const WindowSpec& window,
                                             const PositiveSampling& sampling);

struct TrainOptions {
  std::vector<int> schedule{32, 128, 512, 2048};
  int random_negatives = 5000;
  int hard_negative_cap = 5000;
  double cascade_margin = 0.1;  // fraction of the alphas summed so far
  double score_threshold = 0.0;
  bool mirror = true;
  DetectOptions mining;  // pyramid and stride used to sample and mine negatives
  std::uint64_t seed = 1;
  int threads = 1;
};

struct StageReport {
  int weak_target = 0;
  int rounds = 0;             // trees actually trained
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t hard_negatives = 0;  // mined before this stage
  double last_error = 0.0;
  double exp_loss = 0.0;      // on this stage's training set
  double previous_exp_loss = 0.0;  // the previous stage's model on this stage's set
  bool skipped = false;
};

struct TrainResult {
  BoostedModel model;
  std::vector<StageReport> stages;
};

// Stage 0 trains on the positive crops (mirrored if enabled) and random
// windows from the negative pool. Every later stage mines the highest-scoring
// negative windows (score >= score_threshold, at most hard_negative_cap), adds
// them to the pool, and retrains from scratch at its weak count. The final
// model is cascade-calibrated on the positives. `base` supplies window,
// channels, lambda table, config hash and seed.
// ArgumentError: no positives, empty or non-increasing schedule.
// DegenerateDataError: no negative windows could be sampled.
// Same, with positives given as feature vectors; `mirror` is not applied to
// them.
TrainResult train_detector(const std::vector<FeatureVector>& positives, const std::vector<RasterImage>& negative_pool,
                           const BoostedModel& base, const TrainOptions& opts,
                           const std::function<void(const std::string&)>& log = {});
TrainResult train_detector(const std::vector<RasterImage>& positive_crops, const std::vector<RasterImage>& negative_pool,
                           const BoostedModel& base, const TrainOptions& opts,
                           const std::function<void(const std::string&)>& log = {});

}  // namespace orsim
