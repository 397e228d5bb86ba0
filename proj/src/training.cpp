#include "orsim/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <numeric>
#include <random>
#include <tuple>

#include "orsim/errors.hpp"
#include "orsim/parallel.hpp"

namespace orsim {

RasterImage positive_crop(const RasterImage& img, const Box& box, const WindowSpec& window, int context) {
  if (!(box.w > 0.0) || !(box.h > 0.0)) throw ArgumentError("positive box must have positive size");
  if (context < 0) throw ArgumentError("context must be >= 0");
  const double W = window.width, H = window.height;
  const double fitted_w = std::sqrt(box.w * box.h * W / H);
  const double k = W / fitted_w;
  const int rw = scaled_dim(img.width(), k), rh = scaled_dim(img.height(), k);
  const RasterImage scaled = rw == img.width() && rh == img.height() ? img : resample_pyramid(img, rw, rh);
  const double kx = static_cast<double>(rw) / img.width(), ky = static_cast<double>(rh) / img.height();
  const double cx = (box.x + 0.5 * box.w) * kx, cy = (box.y + 0.5 * box.h) * ky;
  const int x0 = static_cast<int>(std::lround(cx - 0.5 * W)) - context;
  const int y0 = static_cast<int>(std::lround(cy - 0.5 * H)) - context;
  return crop(scaled, x0, y0, window.width + 2 * context, window.height + 2 * context);
}

std::vector<RasterImage> positive_crops(const std::vector<std::string>& ids, const std::vector<RasterImage>& images,
                                        const std::vector<AnnotatedBox>& truths, const WindowSpec& window,
                                        int context) {
  if (ids.size() != images.size()) throw ArgumentError("one id per image required");
  std::vector<RasterImage> out;
  for (const auto& t : truths) {
    const auto it = std::find(ids.begin(), ids.end(), t.image_id);
    if (it == ids.end()) continue;
    out.push_back(positive_crop(images[static_cast<std::size_t>(it - ids.begin())], t.box(), window, context));
  }
  return out;
}

FeatureVector crop_features(const FeaturePipeline& pipeline, const RasterImage& crop, const WindowSpec& window,
                            int context) {
  if (context % window.shrink != 0) throw ArgumentError("context must be a multiple of shrink");
  if (crop.width() != window.width + 2 * context || crop.height() != window.height + 2 * context)
    throw ArgumentError("crop size does not match window plus context");
  const AggregatedStack agg = pipeline.aggregate(crop);
  return window_vector(agg, window, context / window.shrink, context / window.shrink);
}

std::vector<FeatureVector> pyramid_positives(const std::vector<std::string>& ids,
                                             const std::vector<RasterImage>& images,
                                             const std::vector<AnnotatedBox>& truths, const FeaturePipeline& pipeline,
                                             const LambdaTable& lambda, const WindowSpec& window,
                                             const PositiveSampling& sampling) {
  if (ids.size() != images.size()) throw ArgumentError("one id per image required");
  std::vector<std::vector<Box>> boxes(images.size());
  for (const auto& t : truths) {
    const auto it = std::find(ids.begin(), ids.end(), t.image_id);
    if (it != ids.end()) boxes[static_cast<std::size_t>(it - ids.begin())].push_back(t.box());
  }
  const std::size_t n_src = sampling.pyramids.size() * (sampling.mirror ? 2 : 1);
  std::vector<std::vector<FeatureVector>> per_image(images.size());
  parallel_for(images.size(), sampling.threads, [&](std::size_t i) {
    if (boxes[i].empty()) return;
    const double W = images[i].width(), s = window.shrink;
    std::vector<std::vector<FeatureVector>> found(boxes[i].size());
    for (std::size_t src = 0; src < n_src; ++src) {
      const bool flip = src % 2 == 1 && sampling.mirror;
      PyramidOptions po = sampling.pyramids[sampling.mirror ? src / 2 : src];
      po.threads = 1;
      const RasterImage img = flip ? flip_horizontal(images[i]) : images[i];
      Pyramid pyr = pyramid_geometry(img.width(), img.height(), window, po);
      std::vector<std::array<int, 3>> pick(boxes[i].size(), {-1, 0, 0});
      for (std::size_t b = 0; b < boxes[i].size(); ++b) {
        Box truth = boxes[i][b];
        if (flip) truth.x = W - truth.x - truth.w;
        double best = -1.0;
        for (std::size_t l = 0; l < pyr.levels.size(); ++l) {
          const PyramidLevel& lv = pyr.levels[l];
          const int nx = scaled_dim(img.width(), lv.scale) / window.shrink - window.cells_x();
          const int ny = scaled_dim(img.height(), lv.scale) / window.shrink - window.cells_y();
          for (int y = 0; y <= ny; ++y)
            for (int x = 0; x <= nx; ++x) {
              const Box wb{x * s / lv.scale_x, y * s / lv.scale_y, window.width / lv.scale_x,
                           window.height / lv.scale_y};
              const double o = iou(wb, truth);
              if (o > best) best = o, pick[b] = {static_cast<int>(l), x, y};
            }
        }
        if (best < sampling.min_iou) pick[b][0] = -1;
      }
      std::vector<bool> wanted(pyr.levels.size(), false);
      for (const auto& p : pick)
        if (p[0] >= 0) wanted[static_cast<std::size_t>(p[0])] = true;
      if (std::find(wanted.begin(), wanted.end(), true) == wanted.end()) continue;
      pyr = build_pyramid_levels(img, pipeline, lambda, window, po, wanted);
      for (std::size_t b = 0; b < pick.size(); ++b)
        if (pick[b][0] >= 0)
          found[b].push_back(window_vector(pyr.levels[static_cast<std::size_t>(pick[b][0])].agg, window, pick[b][1],
                                           pick[b][2]));
    }
    for (auto& f : found) std::move(f.begin(), f.end(), std::back_inserter(per_image[i]));
  });
  std::vector<FeatureVector> out;
  for (auto& v : per_image) std::move(v.begin(), v.end(), std::back_inserter(out));
  return out;
}

namespace {

std::mt19937_64 image_rng(std::uint64_t seed, std::size_t image, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(image), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

struct Position {
  int level, x, y;
};

std::vector<Position> window_positions(const Pyramid& pyr, const WindowSpec& window, int stride) {
  std::vector<Position> out;
  for (std::size_t l = 0; l < pyr.levels.size(); ++l) {
    const auto& st = pyr.levels[l].agg.data;
    for (int y = 0; y + window.cells_y() <= st.height(); y += stride)
      for (int x = 0; x + window.cells_x() <= st.width(); x += stride) out.push_back({static_cast<int>(l), x, y});
  }
  return out;
}

struct Mined {
  double score;
  std::size_t image;
  int level, y, x;
  std::vector<std::uint8_t> bins;
};

bool mined_before(const Mined& a, const Mined& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.image, a.level, a.y, a.x) < std::tie(b.image, b.level, b.y, b.x);
}

}  // namespace

TrainResult train_detector(const std::vector<RasterImage>& positive_crops, const std::vector<RasterImage>& negative_pool,
                           const BoostedModel& base, const TrainOptions& opts,
                           const std::function<void(const std::string&)>& log) {
  if (positive_crops.empty()) throw ArgumentError("no positive windows");
  const FeaturePipeline pipeline(base.channels);
  const int ctx = pipeline.context_pixels();
  const std::vector<RasterImage> crops = opts.mirror ? mirror_augment(positive_crops) : positive_crops;
  std::vector<FeatureVector> pos(crops.size());
  parallel_for(crops.size(), opts.threads,
               [&](std::size_t i) { pos[i] = crop_features(pipeline, crops[i], base.window, ctx); });
  return train_detector(pos, negative_pool, base, opts, log);
}

TrainResult train_detector(const std::vector<FeatureVector>& positives, const std::vector<RasterImage>& negative_pool,
                           const BoostedModel& base, const TrainOptions& opts,
                           const std::function<void(const std::string&)>& log) {
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  if (positives.empty()) throw ArgumentError("no positive windows");
  if (opts.schedule.empty()) throw ArgumentError("empty weak-learner schedule");
  for (std::size_t i = 0; i < opts.schedule.size(); ++i)
    if (opts.schedule[i] < 1 || (i > 0 && opts.schedule[i] <= opts.schedule[i - 1]))
      throw ArgumentError("schedule must be positive and increasing");
  if (opts.random_negatives < 1 || opts.hard_negative_cap < 0) throw ArgumentError("bad negative counts");

  auto pipeline = std::make_shared<const FeaturePipeline>(base.channels);
  const WindowSpec& window = base.window;
  const std::size_t D = base.feature_length();
  const int stride = opts.mining.stride_cells;
  if (stride < 1) throw ArgumentError("stride must be >= 1 cell");
  PyramidOptions pyr_opts = opts.mining.pyramid;
  pyr_opts.threads = 1;

  // Positives.
  const std::size_t n_pos = positives.size();
  std::vector<float> pos(n_pos * D);
  for (std::size_t i = 0; i < n_pos; ++i) {
    if (positives[i].size() != D) throw ArgumentError("positive feature length does not match the model");
    std::copy(positives[i].begin(), positives[i].end(), pos.begin() + static_cast<std::ptrdiff_t>(i * D));
  }
  say("positives: " + std::to_string(n_pos));

  // Random negatives, spread evenly over the pool.
  const std::size_t n_img = negative_pool.size();
  if (n_img == 0) throw DegenerateDataError("negative pool is empty");
  const auto R = static_cast<std::size_t>(opts.random_negatives);
  std::vector<std::vector<float>> neg_per_image(n_img);
  parallel_for(n_img, opts.threads, [&](std::size_t i) {
    const std::size_t quota = R / n_img + (i < R % n_img ? 1 : 0);
    if (quota == 0) return;
    const Pyramid pyr = build_pyramid(negative_pool[i], *pipeline, base.lambda, window, pyr_opts);
    const std::vector<Position> pos_all = window_positions(pyr, window, stride);
    if (pos_all.empty()) return;
    std::vector<std::uint32_t> idx(pos_all.size());
    std::iota(idx.begin(), idx.end(), 0u);
    const std::size_t k = std::min(quota, idx.size());
    auto rng = image_rng(opts.seed, i, 0);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t r = j + static_cast<std::size_t>(rng() % (idx.size() - j));
      std::swap(idx[j], idx[r]);
    }
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    auto& out = neg_per_image[i];
    out.resize(k * D);
    for (std::size_t j = 0; j < k; ++j) {
      const Position& p = pos_all[idx[j]];
      window_vector_into(pyr.levels[static_cast<std::size_t>(p.level)].agg, window, p.x, p.y,
                         std::span<float>(out.data() + j * D, D));
    }
  });
  std::size_t n_neg = 0;
  for (const auto& v : neg_per_image) n_neg += v.size() / D;
  if (n_neg == 0) throw DegenerateDataError("no negative window fits in the negative pool");
  say("random negatives: " + std::to_string(n_neg));

  // Bin edges from the stage-0 set, then the quantized training matrix.
  std::vector<float> stage0(pos);
  stage0.reserve((n_pos + n_neg) * D);
  for (auto& v : neg_per_image) {
    stage0.insert(stage0.end(), v.begin(), v.end());
    std::vector<float>().swap(v);
  }
  TrainSet data(BinEdges::from_samples(stage0, n_pos + n_neg, D));
  data.reserve(n_pos + n_neg + static_cast<std::size_t>(opts.hard_negative_cap) * (opts.schedule.size() - 1));
  for (std::size_t i = 0; i < n_pos + n_neg; ++i)
    data.add(std::span<const float>(stage0.data() + i * D, D), i < n_pos ? 1 : -1);
  std::vector<float>().swap(stage0);

  TrainResult result;
  BoostedModel model = base;
  model.trees.clear();
  model.alphas.clear();
  model.thresholds.clear();

  for (std::size_t s = 0; s < opts.schedule.size(); ++s) {
    StageReport rep;
    rep.weak_target = opts.schedule[s];
    if (s > 0) {
      const Detector det(model, pipeline);
      DetectOptions mopts = opts.mining;
      mopts.use_cascade = false;
      mopts.score_threshold = opts.score_threshold;
      const auto cap = static_cast<std::size_t>(opts.hard_negative_cap);
      std::vector<Mined> best;
      const std::size_t chunk = static_cast<std::size_t>(std::max(opts.threads, 1));
      for (std::size_t c0 = 0; c0 < n_img && cap > 0; c0 += chunk) {
        const std::size_t c1 = std::min(n_img, c0 + chunk);
        std::vector<std::vector<Mined>> found(c1 - c0);
        parallel_for(c1 - c0, opts.threads, [&](std::size_t j) {
          const std::size_t i = c0 + j;
          const Pyramid pyr = build_pyramid(negative_pool[i], *pipeline, base.lambda, window, pyr_opts);
          std::vector<Mined> m;
          for (std::size_t l = 0; l < pyr.levels.size(); ++l)
            for (const auto& h : det.scan_level(pyr.levels[l], static_cast<int>(l), mopts))
              m.push_back({h.score, i, h.level, h.cell_y, h.cell_x, {}});
          std::sort(m.begin(), m.end(), mined_before);
          if (m.size() > cap) m.resize(cap);
          std::vector<float> v(D);
          for (auto& e : m) {
            window_vector_into(pyr.levels[static_cast<std::size_t>(e.level)].agg, window, e.x, e.y, v);
            e.bins.resize(D);
            for (std::size_t f = 0; f < D; ++f) e.bins[f] = data.edges().bin(f, v[f]);
          }
          found[j] = std::move(m);
        });
        for (auto& f : found) std::move(f.begin(), f.end(), std::back_inserter(best));
        std::sort(best.begin(), best.end(), mined_before);
        if (best.size() > cap) best.resize(cap);
      }
      rep.hard_negatives = best.size();
      if (best.empty()) {
        rep.skipped = true;
        say("stage " + std::to_string(s) + ": no hard negatives found, stage skipped");
        result.stages.push_back(rep);
        continue;
      }
      for (const auto& e : best) data.add_binned(e.bins, -1);
      say("stage " + std::to_string(s) + ": mined " + std::to_string(best.size()) + " hard negatives");
    }
    data.reset_weights();
    if (s > 0) rep.previous_exp_loss = exponential_loss(model, data);
    model.trees.clear();
    model.alphas.clear();
    model.thresholds.clear();
    for (int t = 0; t < opts.schedule[s]; ++t) {
      const RoundStats st = adaboost_round(model, data, opts.threads);
      rep.last_error = st.error;
      if (st.aborted) {
        say("stage " + std::to_string(s) + ": weak learner error reached 0.5 at round " + std::to_string(t) +
            ", stage stopped early");
        break;
      }
      // A perfect learner leaves the weights unchanged, so every later round
      // would pick the same tree again.
      if (st.error == 0.0) {
        say("stage " + std::to_string(s) + ": training set separated at round " + std::to_string(t) +
            ", stage stopped early");
        break;
      }
    }
    rep.rounds = static_cast<int>(model.trees.size());
    rep.positives = data.positives();
    rep.negatives = data.size() - rep.positives;
    rep.exp_loss = exponential_loss(model, data);
    char buf[200];
    int len = std::snprintf(buf, sizeof buf, "stage %zu: %d trees, %zu pos, %zu neg, last eps %.6f, exp loss %.6g",
                            s, rep.rounds, rep.positives, rep.negatives, rep.last_error, rep.exp_loss);
    if (s > 0) std::snprintf(buf + len, sizeof buf - len, " (previous stage's model %.6g)", rep.previous_exp_loss);
    say(buf);
    result.stages.push_back(rep);
  }
  calibrate_cascade(model, pos, n_pos, opts.score_threshold, opts.cascade_margin);
  result.model = std::move(model);
  return result;
}

}  // namespace orsim
