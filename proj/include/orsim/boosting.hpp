#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "orsim/aggregate.hpp"
#include "orsim/feature_pipeline.hpp"
#include "orsim/pyramid.hpp"

namespace orsim {

inline constexpr int kMaxTreeDepth = 3;
inline constexpr double kEpsilonFloor = 1e-6;

// Internal nodes send x[feature] < threshold left. Leaves have feature -1 and
// vote value (+1 or -1) with confidence |w+ - w-| / (w+ + w-).
struct TreeNode {
  int feature = -1;
  float threshold = 0.0f;
  int left = -1;
  int right = -1;
  int value = -1;
  double confidence = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Nodes in preorder; node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  int predict(std::span<const float> x) const;
  int depth() const;
  bool operator==(const DecisionTree&) const = default;
};

// Per-feature split candidates. bin(x) counts the edges <= x, so the split
// "x < edges[b-1]" is exactly "bin(x) < b" and training on bins agrees with
// scoring on raw values.
class BinEdges {
 public:
  BinEdges() = default;

  // At most 255 edges per feature: every distinct value above the minimum when
  // there are few, else 255 quantiles. samples are row-major, n x dims.
  static BinEdges from_samples(std::span<const float> samples, std::size_t n, std::size_t dims);

  std::size_t dims() const { return edges_.size(); }
  const std::vector<float>& edges(std::size_t f) const { return edges_[f]; }
  std::uint8_t bin(std::size_t f, float x) const;

 private:
  std::vector<std::vector<float>> edges_;
};

// Quantized training matrix, column-major, with labels and weights.
class TrainSet {
 public:
  explicit TrainSet(BinEdges edges);

  void add(std::span<const float> x, int label);  // label +1 or -1
  void add_binned(std::span<const std::uint8_t> bins, int label);
  void reserve(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  std::size_t dims() const { return edges_.dims(); }
  const BinEdges& edges() const { return edges_; }
  const std::vector<int>& labels() const { return labels_; }
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }

  // Contiguous bins of feature f over all samples.
  std::span<const std::uint8_t> column(std::size_t f) const;
  float value_at_threshold(std::size_t f, int b) const { return edges_.edges(f)[static_cast<std::size_t>(b - 1)]; }

  // Uniform weights within each class, each class holding half the mass (all
  // uniform if a class is empty). These also become the prior of the
  // exponential loss.
  void reset_weights();
  const std::vector<double>& prior() const { return prior_; }
  std::size_t positives() const;

 private:
  void grow(std::size_t capacity);

  BinEdges edges_;
  std::size_t capacity_ = 0;
  std::vector<std::uint8_t> bins_;  // dims x capacity
  std::vector<int> labels_;
  std::vector<double> weights_;
  std::vector<double> prior_;
};

struct TreeFit {
  DecisionTree tree;
  double error = 0.0;  // weighted misclassification on the training weights
};

// Greedy depth-limited tree minimising weighted misclassification. Every
// non-trivial split is a candidate even when it does not lower the error, so
// interactions like XOR can be reached; ties go to the lowest feature, then
// the lowest threshold. DegenerateDataError if only one class has weight.
TreeFit train_tree(const TrainSet& data, int max_depth = kMaxTreeDepth, int threads = 1);

// Trees vote +1/-1; a window is rejected as soon as the running sum drops
// below its threshold.
struct BoostedModel {
  WindowSpec window;
  ChannelConfig channels;
  LambdaTable lambda;
  std::vector<DecisionTree> trees;
  std::vector<double> alphas;
  std::vector<double> thresholds;
  std::string config_hash;
  std::uint64_t seed = 0;

  std::size_t feature_length() const;
  bool operator==(const BoostedModel&) const = default;
};

inline constexpr double kNoCascade = -std::numeric_limits<double>::infinity();

struct RoundStats {
  double error = 0.0;  // epsilon of the new tree before reweighting
  double alpha = 0.0;
  bool aborted = false;  // epsilon >= 0.5; nothing was appended
};

// One discrete AdaBoost round: fit a tree, beta = eps / (1 - eps) with eps
// floored at kEpsilonFloor, alpha = ln(1 / beta), scale the weights of
// correctly classified samples by beta and renormalise. The tree is appended
// with threshold kNoCascade.
RoundStats adaboost_round(BoostedModel& model, TrainSet& data, int threads = 1);

// Predictions of one tree on every training sample.
std::vector<int> predict_train(const DecisionTree& tree, const TrainSet& data);

// sum prior_i exp(-y_i H(x_i) / 2) over the set. Scaling correct samples by
// beta keeps the weights proportional to prior_i exp(-y_i H / 2) when
// alpha = ln(1/beta), so this is the loss each round provably lowers, by the
// factor 2 sqrt(eps (1 - eps)).
double exponential_loss(const BoostedModel& model, const TrainSet& data);

struct WindowScore {
  double score = 0.0;     // full sum, or the partial sum at rejection
  bool rejected = false;
};

// ArgumentError on length mismatch.
WindowScore score_window(const BoostedModel& model, std::span<const float> x);

// theta_t = (min over positives whose full score reaches score_threshold of
// their partial sum at t) - margin_factor * (alpha_1 + ... + alpha_t). With no
// such positive every threshold is kNoCascade. positives are row-major vectors.
void calibrate_cascade(BoostedModel& model, std::span<const float> positives, std::size_t n,
                       double score_threshold = 0.0, double margin_factor = 0.1);

}  // namespace orsim
