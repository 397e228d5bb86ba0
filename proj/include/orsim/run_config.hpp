#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "orsim/boosting.hpp"
#include "orsim/detector.hpp"
#include "orsim/synth.hpp"
#include "orsim/training.hpp"

namespace orsim {

// Every tunable of a calibrate/train/detect/eval run. Text form is flat
// `key = value` lines with `#` comments; unknown or repeated keys are errors.
struct RunConfig {
  ChannelConfig channels;
  WindowSpec window;
  int n_per_oct = 8;
  int octaves_up = 0;
  int calibration_octaves = 2;
  int calibration_per_octave = 4;

  std::vector<int> schedule{32, 128, 512, 2048};
  int random_negatives = 5000;
  int hard_negative_cap = 5000;
  double cascade_margin = 0.1;
  bool mirror = true;
  // Where positive windows come from: pyramid windows of the "fast" and/or
  // "exact" detection pyramid, or "crop" (exactly rescaled crops) alone.
  std::vector<std::string> positive_sources{"fast", "exact"};

  int stride = 1;
  double score_threshold = 0.0;
  double nms_overlap = 0.5;
  double nms_containment = 0.65;
  bool two_step_nms = true;
  double iou_threshold = 0.5;

  std::uint64_t seed = 1;
  int threads = 1;

  SynthSpec synth;

  // Relative paths are resolved against the config file's directory.
  std::filesystem::path calibration_images;
  std::filesystem::path train_images;
  std::filesystem::path train_annotations;
  std::filesystem::path negative_images;
  std::filesystem::path lambda_table;
  std::filesystem::path model;
  std::filesystem::path test_images;
  std::filesystem::path detections;
  std::filesystem::path annotations;
  std::filesystem::path report;

  // ConfigError, with the line number for syntax and unknown keys.
  static RunConfig parse(std::istream& in, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  // ConfigError unless every value lies on its allowed grid.
  void validate() const;

  // `key = value` lines for every tunable in a fixed order. Paths and the
  // thread count are left out: they do not change any result.
  std::string canonical() const;
  // FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  BoostedModel base_model(const LambdaTable& lambda) const;
  TrainOptions train_options() const;
  DetectOptions detect_options() const;
  PyramidOptions pyramid_options() const;
  // Empty pyramid list when positive_sources is "crop".
  PositiveSampling positive_sampling() const;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace orsim
