#include "orsim/boosting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "orsim/errors.hpp"
#include "orsim/parallel.hpp"

namespace orsim {

int DecisionTree::predict(std::span<const float> x) const {
  int n = 0;
  while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
    const TreeNode& t = nodes[static_cast<std::size_t>(n)];
    n = x[static_cast<std::size_t>(t.feature)] < t.threshold ? t.left : t.right;
  }
  return nodes[static_cast<std::size_t>(n)].value;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  auto rec = [&](auto&& self, int n) -> int {
    const TreeNode& t = nodes[static_cast<std::size_t>(n)];
    if (t.is_leaf()) return 0;
    return 1 + std::max(self(self, t.left), self(self, t.right));
  };
  return rec(rec, 0);
}

BinEdges BinEdges::from_samples(std::span<const float> samples, std::size_t n, std::size_t dims) {
  if (samples.size() != n * dims) throw ArgumentError("sample matrix size mismatch");
  if (n == 0) throw ArgumentError("bin edges need at least one sample");
  BinEdges out;
  out.edges_.resize(dims);
  std::vector<float> col(n);
  for (std::size_t f = 0; f < dims; ++f) {
    for (std::size_t i = 0; i < n; ++i) col[i] = samples[i * dims + f];
    std::sort(col.begin(), col.end());
    std::vector<float> distinct;
    distinct.reserve(256);
    for (float v : col) {
      if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
      if (distinct.size() > 256) break;
    }
    std::vector<float>& e = out.edges_[f];
    if (distinct.size() <= 256) {
      e.assign(distinct.begin() + 1, distinct.end());
    } else {
      for (std::size_t q = 1; q < 256; ++q) {
        const float v = col[q * n / 256];
        if (v != col.front() && (e.empty() || e.back() != v)) e.push_back(v);
      }
    }
  }
  return out;
}

std::uint8_t BinEdges::bin(std::size_t f, float x) const {
  const auto& e = edges_[f];
  return static_cast<std::uint8_t>(std::upper_bound(e.begin(), e.end(), x) - e.begin());
}

TrainSet::TrainSet(BinEdges edges) : edges_(std::move(edges)) {}

void TrainSet::grow(std::size_t capacity) {
  const std::size_t d = dims();
  std::vector<std::uint8_t> next(d * capacity);
  for (std::size_t f = 0; f < d; ++f)
    std::copy_n(bins_.begin() + static_cast<std::ptrdiff_t>(f * capacity_), size(),
                next.begin() + static_cast<std::ptrdiff_t>(f * capacity));
  bins_ = std::move(next);
  capacity_ = capacity;
}

void TrainSet::reserve(std::size_t n) {
  if (n > capacity_) grow(n);
}

void TrainSet::add(std::span<const float> x, int label) {
  if (x.size() != dims()) throw ArgumentError("feature vector length does not match the bin edges");
  if (label != 1 && label != -1) throw ArgumentError("labels must be +1 or -1");
  if (size() == capacity_) grow(std::max<std::size_t>(64, capacity_ * 2));
  const std::size_t i = size();
  for (std::size_t f = 0; f < x.size(); ++f) bins_[f * capacity_ + i] = edges_.bin(f, x[f]);
  labels_.push_back(label);
  weights_.push_back(0.0);
  prior_.push_back(0.0);
}

void TrainSet::add_binned(std::span<const std::uint8_t> bins, int label) {
  if (bins.size() != dims()) throw ArgumentError("binned vector length does not match the bin edges");
  if (label != 1 && label != -1) throw ArgumentError("labels must be +1 or -1");
  if (size() == capacity_) grow(std::max<std::size_t>(64, capacity_ * 2));
  const std::size_t i = size();
  for (std::size_t f = 0; f < bins.size(); ++f) bins_[f * capacity_ + i] = bins[f];
  labels_.push_back(label);
  weights_.push_back(0.0);
  prior_.push_back(0.0);
}

std::span<const std::uint8_t> TrainSet::column(std::size_t f) const {
  return {bins_.data() + f * capacity_, size()};
}

std::size_t TrainSet::positives() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

void TrainSet::reset_weights() {
  const std::size_t np = positives(), nn = size() - np;
  for (std::size_t i = 0; i < size(); ++i) {
    if (np == 0 || nn == 0)
      weights_[i] = 1.0 / static_cast<double>(size());
    else
      weights_[i] = 0.5 / static_cast<double>(labels_[i] > 0 ? np : nn);
  }
  prior_ = weights_;
}

namespace {

struct Split {
  double error = std::numeric_limits<double>::infinity();
  int feature = -1;
  int bin = 0;  // left: bin < this
};

bool better(const Split& a, const Split& b) {
  if (a.error != b.error) return a.error < b.error;
  if (a.feature != b.feature) return a.feature < b.feature;
  return a.bin < b.bin;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainSet& data, int max_depth, int threads)
      : data_(data), max_depth_(max_depth), threads_(threads) {}

  TreeFit run() {
    std::vector<std::uint32_t> idx(data_.size());
    std::iota(idx.begin(), idx.end(), 0u);
    fit_.error = 0.0;
    grow(idx, 0);
    return std::move(fit_);
  }

 private:
  int leaf(double wp, double wn) {
    TreeNode n;
    n.value = wp > wn ? 1 : -1;
    n.confidence = wp + wn > 0.0 ? std::abs(wp - wn) / (wp + wn) : 0.0;
    fit_.error += std::min(wp, wn);
    fit_.tree.nodes.push_back(n);
    return static_cast<int>(fit_.tree.nodes.size()) - 1;
  }

  Split best_split(const std::vector<std::uint32_t>& idx, double wp, double wn) const {
    const auto& w = data_.weights();
    const auto& y = data_.labels();
    std::vector<double> ws(idx.size());
    std::vector<std::uint16_t> off(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      ws[k] = w[idx[k]];
      off[k] = y[idx[k]] > 0 ? 0 : 256;
    }
    const std::size_t dims = data_.dims();
    const std::size_t workers = static_cast<std::size_t>(std::max(threads_, 1));
    std::vector<Split> best(workers);
    parallel_for(workers, threads_, [&](std::size_t t) {
      std::array<double, 512> h;
      std::array<std::uint32_t, 256> c;
      for (std::size_t f = t; f < dims; f += workers) {
        const std::size_t nb = data_.edges().edges(f).size();
        if (nb == 0) continue;
        h.fill(0.0);
        c.fill(0);
        const std::uint8_t* col = data_.column(f).data();
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const std::uint8_t b = col[idx[k]];
          h[b + off[k]] += ws[k];
          ++c[b];
        }
        double lp = 0.0, ln = 0.0;
        std::size_t left = 0;
        for (std::size_t b = 1; b <= nb; ++b) {
          lp += h[b - 1];
          ln += h[b - 1 + 256];
          left += c[b - 1];
          if (left == 0) continue;
          if (left == idx.size()) break;
          const double rp = std::max(wp - lp, 0.0), rn = std::max(wn - ln, 0.0);
          const double err = std::min(lp, ln) + std::min(rp, rn);
          const Split s{err, static_cast<int>(f), static_cast<int>(b)};
          if (better(s, best[t])) best[t] = s;
        }
      }
    });
    Split out;
    for (const auto& s : best)
      if (s.feature >= 0 && better(s, out)) out = s;
    return out;
  }

  int grow(const std::vector<std::uint32_t>& idx, int depth) {
    double wp = 0.0, wn = 0.0;
    for (std::uint32_t i : idx) (data_.labels()[i] > 0 ? wp : wn) += data_.weights()[i];
    if (depth >= max_depth_ || wp == 0.0 || wn == 0.0) return leaf(wp, wn);
    const Split s = best_split(idx, wp, wn);
    if (s.feature < 0) return leaf(wp, wn);
    std::vector<std::uint32_t> left, right;
    const std::uint8_t* col = data_.column(static_cast<std::size_t>(s.feature)).data();
    for (std::uint32_t i : idx) (col[i] < s.bin ? left : right).push_back(i);
    if (left.empty() || right.empty()) return leaf(wp, wn);
    TreeNode n;
    n.feature = s.feature;
    n.threshold = data_.value_at_threshold(static_cast<std::size_t>(s.feature), s.bin);
    fit_.tree.nodes.push_back(n);
    const int me = static_cast<int>(fit_.tree.nodes.size()) - 1;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    fit_.tree.nodes[static_cast<std::size_t>(me)].left = l;
    fit_.tree.nodes[static_cast<std::size_t>(me)].right = r;
    return me;
  }

  const TrainSet& data_;
  int max_depth_;
  int threads_;
  TreeFit fit_;
};

}  // namespace

TreeFit train_tree(const TrainSet& data, int max_depth, int threads) {
  if (max_depth < 1) throw ArgumentError("tree depth must be >= 1");
  double wp = 0.0, wn = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) (data.labels()[i] > 0 ? wp : wn) += data.weights()[i];
  if (!(wp > 0.0) || !(wn > 0.0)) throw DegenerateDataError("training data must hold weight on both classes");
  return TreeBuilder(data, max_depth, threads).run();
}

std::vector<int> predict_train(const DecisionTree& tree, const TrainSet& data) {
  // Thresholds are bin edges, so bin(threshold) is the bin index of the split.
  std::vector<int> split_bin(tree.nodes.size(), 0);
  for (std::size_t k = 0; k < tree.nodes.size(); ++k)
    if (!tree.nodes[k].is_leaf())
      split_bin[k] = data.edges().bin(static_cast<std::size_t>(tree.nodes[k].feature), tree.nodes[k].threshold);
  std::vector<int> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t n = 0;
    while (!tree.nodes[n].is_leaf()) {
      const TreeNode& t = tree.nodes[n];
      const int b = data.column(static_cast<std::size_t>(t.feature))[i];
      n = static_cast<std::size_t>(b < split_bin[n] ? t.left : t.right);
    }
    out[i] = tree.nodes[n].value;
  }
  return out;
}

std::size_t BoostedModel::feature_length() const {
  return orsim::feature_length(window, static_cast<int>(channel_layout(channels).names.size()));
}

RoundStats adaboost_round(BoostedModel& model, TrainSet& data, int threads) {
  TreeFit fit = train_tree(data, kMaxTreeDepth, threads);
  RoundStats st;
  st.error = fit.error;
  if (!(fit.error < 0.5)) {
    st.aborted = true;
    return st;
  }
  const double eps = std::max(fit.error, kEpsilonFloor);
  const double beta = eps / (1.0 - eps);
  st.alpha = std::log(1.0 / beta);
  const std::vector<int> pred = predict_train(fit.tree, data);
  auto& w = data.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (pred[i] == data.labels()[i]) w[i] *= beta;
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  model.trees.push_back(std::move(fit.tree));
  model.alphas.push_back(st.alpha);
  model.thresholds.push_back(kNoCascade);
  return st;
}

double exponential_loss(const BoostedModel& model, const TrainSet& data) {
  std::vector<double> h(data.size(), 0.0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const std::vector<int> p = predict_train(model.trees[t], data);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += model.alphas[t] * p[i];
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) loss += data.prior()[i] * std::exp(-0.5 * data.labels()[i] * h[i]);
  return loss;
}

WindowScore score_window(const BoostedModel& model, std::span<const float> x) {
  if (x.size() != model.feature_length()) throw ArgumentError("feature vector length does not match the model");
  WindowScore s;
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    s.score += model.alphas[t] * model.trees[t].predict(x);
    if (s.score < model.thresholds[t]) {
      s.rejected = true;
      return s;
    }
  }
  return s;
}

void calibrate_cascade(BoostedModel& model, std::span<const float> positives, std::size_t n,
                       double score_threshold, double margin_factor) {
  const std::size_t d = model.feature_length();
  if (positives.size() != n * d) throw ArgumentError("positive matrix size mismatch");
  const std::size_t T = model.trees.size();
  std::vector<double> lowest(T, std::numeric_limits<double>::infinity());
  std::vector<double> partial(T);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = positives.subspan(i * d, d);
    double s = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      s += model.alphas[t] * model.trees[t].predict(x);
      partial[t] = s;
    }
    if (T == 0 || s < score_threshold) continue;
    any = true;
    for (std::size_t t = 0; t < T; ++t) lowest[t] = std::min(lowest[t], partial[t]);
  }
  model.thresholds.assign(T, kNoCascade);
  if (!any) return;
  // The slack grows with the vote mass spent so far: unseen positives drift
  // from the training minimum by an amount that scales with the partial sum.
  double spent = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    spent += model.alphas[t];
    model.thresholds[t] = lowest[t] - margin_factor * spent;
  }
}

}  // namespace orsim
