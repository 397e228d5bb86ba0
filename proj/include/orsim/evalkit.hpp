#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "orsim/geometry.hpp"
#include "orsim/imaging.hpp"

namespace orsim {

struct AnnotatedBox {
  std::string image_id;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::string label;

  Box box() const { return {x, y, w, h}; }
  bool operator==(const AnnotatedBox&) const = default;
};

// Lines `image_id x y w h label`; blank lines and `#` comments are skipped.
// Malformed lines and non-positive sizes raise ParseError with the line number.
std::vector<AnnotatedBox> parse_annotations(std::istream& in);
std::vector<AnnotatedBox> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path, const std::vector<AnnotatedBox>& boxes,
                      const std::vector<std::string>& header = {});

struct DetectionRecord {
  std::string image_id;
  Box box;
  double score = 0.0;
};

// Sorts by image id, then score descending, then x, then y. This is the file order.
void sort_records(std::vector<DetectionRecord>& records);

// `# ` header lines, then `image_id x y w h score` with two decimals for the
// box and four for the score. Records are written in sort_records order.
void save_detections(const std::filesystem::path& path, std::vector<DetectionRecord> records,
                     const std::vector<std::string>& header);
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);

struct ScoredBox {
  Box box;
  double score = 0.0;
};

struct MatchResult {
  std::vector<bool> tp;             // per detection, in input order
  std::vector<bool> truth_matched;  // per truth
};

// Detections are visited by score descending (ties: smaller x, then smaller y,
// then input order). Each takes the unmatched truth of highest IoU if that
// IoU is strictly above the threshold.
MatchResult match_detections(const std::vector<ScoredBox>& dets, const std::vector<Box>& truths,
                             double iou_threshold = 0.5);

struct ScoredFlag {
  double score = 0.0;
  bool tp = false;
};

struct PRPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct PRCurve {
  std::vector<PRPoint> points;  // one per distinct score, threshold descending
  double ap = 0.0;              // all-points interpolated
  double ar = 0.0;              // recall at the F1-best threshold
  double af = 0.0;              // F1 at that threshold
  double best_threshold = 0.0;
  bool no_detections = false;
  std::size_t n_truths = 0;
};

// n_truths must be >= 1 (ArgumentError).
PRCurve pr_metrics(const std::vector<ScoredFlag>& flags, std::size_t n_truths);

// Matches per image and pools the flags over the corpus.
PRCurve evaluate(const std::vector<DetectionRecord>& dets, const std::vector<AnnotatedBox>& truths,
                 double iou_threshold = 0.5);

// `# ` header lines, `threshold,recall,precision` rows, then `AP,AR,AF` and
// its values.
void write_pr_csv(const std::filesystem::path& path, const PRCurve& curve, const std::vector<std::string>& header = {});

// Originals followed by their horizontal mirrors.
std::vector<RasterImage> mirror_augment(const std::vector<RasterImage>& windows);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then round-robin into k folds; fold i tests on its share.
std::vector<Fold> kfold_split(std::size_t n_items, int k, std::uint64_t seed);

}  // namespace orsim
