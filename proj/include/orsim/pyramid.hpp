#pragma once

#include <array>
#include <string>
#include <vector>

#include "orsim/aggregate.hpp"
#include "orsim/feature_pipeline.hpp"

namespace orsim {

// Power-law exponent per channel group: a channel computed at scale s relates
// to the anchor at s_a by C(s) ~ resample(C(s_a)) * (s / s_a)^(-lambda).
struct LambdaTable {
  std::array<double, kChannelGroupCount> lambda{};
  std::array<double, kChannelGroupCount> r2{1.0, 1.0, 1.0, 1.0, 1.0};

  double of(ChannelGroup g) const { return lambda[static_cast<std::size_t>(g)]; }
  bool operator==(const LambdaTable&) const = default;
};

struct GroupFit {
  bool present = false;     // the pipeline has channels in this group
  bool degenerate = false;  // some mu_s was zero, so log mu is undefined
  double lambda = 0.0;
  double r2 = 1.0;
  std::vector<double> mu;   // one per calibration scale
};

struct CalibrationReport {
  std::vector<double> scales;
  std::array<GroupFit, kChannelGroupCount> groups;
  LambdaTable table;  // degenerate groups keep lambda 0
};

// Residual RMS in log units below which a flat fit counts as exact. R^2 is
// computed against max(total variance, n * tol^2), so a group whose mean
// barely moves with scale is judged by how well the line matches it rather
// than by a ratio of two near-zero numbers.
inline constexpr double kFlatFitTolerance = 0.01;

// mu_s per group: mean over images of the mean |value| of the group's
// aggregated channels on resample(I, s). lambda is minus the least-squares
// slope of log mu against log s. Never throws on a degenerate group; see
// calibrate_lambda.
CalibrationReport calibration_report(const std::vector<RasterImage>& images,
                                     const std::vector<double>& scales,
                                     const FeaturePipeline& pipeline, int threads = 1);

// Requires >= 8 images and >= 3 scales spanning at least one octave
// (ArgumentError). Throws CalibrationError naming the first degenerate group.
LambdaTable calibrate_lambda(const std::vector<RasterImage>& images, const std::vector<double>& scales,
                             const FeaturePipeline& pipeline, int threads = 1);

// Log-spaced scales 2^0 .. 2^-octaves with `per_octave` steps, as used by calibration.
std::vector<double> default_calibration_scales(int octaves = 2, int per_octave = 4);

struct PyramidOptions {
  int n_per_oct = 8;
  int n_octaves = 0;    // 0: as many as fit the window
  int octaves_up = 0;   // upsampled octaves (scales above 1)
  bool force_exact = false;
  int threads = 1;
};

struct PyramidLevel {
  double scale = 1.0;    // nominal 2^(-i / n_per_oct)
  double scale_x = 1.0;  // resampled width / original width
  double scale_y = 1.0;
  AggregatedStack agg;
  bool approximated = false;
  int anchor = -1;       // index of the exact level this one came from; self for exact levels
};

struct Pyramid {
  std::vector<PyramidLevel> levels;
  bool window_too_large = false;  // image cannot hold the window even at the largest scale
};

// Scales s_i = 2^(-i / n_per_oct) for i = -octaves_up * n_per_oct, ...,
// stopping before the resampled image stops holding the window. Levels on
// whole octaves are computed from the resampled image; the rest come from the
// anchor at the start of their octave (always a downsampling) via the power
// law, unless force_exact.
Pyramid build_pyramid(const RasterImage& img, const FeaturePipeline& pipeline, const LambdaTable& table,
                      const WindowSpec& window, const PyramidOptions& opts = {});

// Level scales, anchors and approximation flags of build_pyramid for an image
// of the given size, with every stack left empty.
Pyramid pyramid_geometry(int width, int height, const WindowSpec& window, const PyramidOptions& opts = {});

// build_pyramid computing only the levels flagged in `wanted` (plus their
// anchors); the others keep empty stacks. An empty mask means every level.
Pyramid build_pyramid_levels(const RasterImage& img, const FeaturePipeline& pipeline, const LambdaTable& table,
                             const WindowSpec& window, const PyramidOptions& opts, const std::vector<bool>& wanted);

// The power-law step on its own: resample every channel of `anchor` to the
// cell grid of `cells_w` x `cells_h` and multiply by ratio^(-lambda_group).
AggregatedStack approximate_level(const AggregatedStack& anchor, int cells_w, int cells_h, double ratio,
                                  const LambdaTable& table);

// Image dimensions of a level at scale s.
int scaled_dim(int dim, double s);

}  // namespace orsim
