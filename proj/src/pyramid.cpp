#include "orsim/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "orsim/errors.hpp"
#include "orsim/parallel.hpp"

namespace orsim {

int scaled_dim(int dim, double s) { return std::max(1, static_cast<int>(std::lround(dim * s))); }

namespace {

// Mean as first + sum(v - first) / n: exact for constant inputs.
double offset_mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double first = v[0];
  double acc = 0.0;
  for (double x : v) acc += x - first;
  return first + acc / static_cast<double>(v.size());
}

RasterImage at_scale(const RasterImage& img, double s) {
  if (s == 1.0) return img;
  return resample_pyramid(img, scaled_dim(img.width(), s), scaled_dim(img.height(), s));
}

}  // namespace

std::vector<double> default_calibration_scales(int octaves, int per_octave) {
  std::vector<double> s;
  for (int i = 0; i <= octaves * per_octave; ++i) s.push_back(std::exp2(-static_cast<double>(i) / per_octave));
  return s;
}

CalibrationReport calibration_report(const std::vector<RasterImage>& images, const std::vector<double>& scales,
                                     const FeaturePipeline& pipeline, int threads) {
  if (images.size() < 8) throw ArgumentError("calibration needs at least 8 images");
  if (scales.size() < 3) throw ArgumentError("calibration needs at least 3 scales");
  for (double s : scales)
    if (!(s > 0.0) || !std::isfinite(s)) throw ArgumentError("calibration scales must be positive");
  const auto [lo, hi] = std::minmax_element(scales.begin(), scales.end());
  if (*hi / *lo < 2.0 - 1e-12) throw ArgumentError("calibration scales must span at least one octave");

  const std::size_t ns = scales.size(), ng = kChannelGroupCount;
  // per image, per scale, per group
  std::vector<double> means(images.size() * ns * ng, 0.0);
  const auto& groups = pipeline.channel_groups();
  parallel_for(images.size(), threads, [&](std::size_t i) {
    for (std::size_t si = 0; si < ns; ++si) {
      const RasterImage img = at_scale(images[i], scales[si]);
      const AggregatedStack agg = pipeline.aggregate(img);
      // Mean of per-channel means (the planes share a size), so a corpus of
      // constant channels gives the same mu bit for bit at every scale.
      for (std::size_t g = 0; g < ng; ++g) {
        std::vector<double> per_channel, mags;
        for (int c = 0; c < agg.data.size(); ++c) {
          if (static_cast<std::size_t>(groups[static_cast<std::size_t>(c)]) != g) continue;
          mags.clear();
          for (double v : agg.data.plane(c)) mags.push_back(std::abs(v));
          per_channel.push_back(offset_mean(mags));
        }
        means[(i * ns + si) * ng + g] = per_channel.empty() ? 0.0 : offset_mean(per_channel);
      }
    }
  });

  CalibrationReport rep;
  rep.scales = scales;
  for (std::size_t g = 0; g < ng; ++g) {
    GroupFit& fit = rep.groups[g];
    fit.present = std::find(groups.begin(), groups.end(), static_cast<ChannelGroup>(g)) != groups.end();
    if (!fit.present) continue;
    fit.mu.resize(ns);
    std::vector<double> per_image(images.size());
    for (std::size_t si = 0; si < ns; ++si) {
      for (std::size_t i = 0; i < images.size(); ++i) per_image[i] = means[(i * ns + si) * ng + g];
      fit.mu[si] = offset_mean(per_image);
    }
    if (std::any_of(fit.mu.begin(), fit.mu.end(), [](double m) { return !(m > 0.0); })) {
      fit.degenerate = true;
      fit.r2 = 0.0;
      continue;
    }
    std::vector<double> x(ns), y(ns);
    for (std::size_t si = 0; si < ns; ++si) {
      x[si] = std::log(scales[si]);
      y[si] = std::log(fit.mu[si]);
    }
    const double mx = offset_mean(x), my = offset_mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t si = 0; si < ns; ++si) {
      sxy += (x[si] - mx) * (y[si] - my);
      sxx += (x[si] - mx) * (x[si] - mx);
      syy += (y[si] - my) * (y[si] - my);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t si = 0; si < ns; ++si) {
      const double r = y[si] - (my + slope * (x[si] - mx));
      ss_res += r * r;
    }
    fit.lambda = -slope + 0.0;  // + 0.0 turns -0 into +0
    fit.r2 = 1.0 - ss_res / std::max(syy, static_cast<double>(ns) * kFlatFitTolerance * kFlatFitTolerance);
    rep.table.lambda[g] = fit.lambda;
    rep.table.r2[g] = fit.r2;
  }
  return rep;
}

LambdaTable calibrate_lambda(const std::vector<RasterImage>& images, const std::vector<double>& scales,
                             const FeaturePipeline& pipeline, int threads) {
  const CalibrationReport rep = calibration_report(images, scales, pipeline, threads);
  for (std::size_t g = 0; g < kChannelGroupCount; ++g)
    if (rep.groups[g].present && rep.groups[g].degenerate)
      throw CalibrationError("degenerate power-law fit for channel group " +
                             std::string(to_string(static_cast<ChannelGroup>(g))) +
                             ": mean channel magnitude is zero");
  return rep.table;
}

AggregatedStack approximate_level(const AggregatedStack& anchor, int cells_w, int cells_h, double ratio,
                                  const LambdaTable& table) {
  const ChannelStack& src = anchor.data;
  AggregatedStack out{anchor.shrink, ChannelStack(cells_w, cells_h)};
  for (int c = 0; c < src.size(); ++c) {
    const auto p = src.plane(c);
    std::vector<double> plane;
    if (cells_w == src.width() && cells_h == src.height()) {
      plane.assign(p.begin(), p.end());
    } else {
      const RasterImage r = resample_to(RasterImage(src.width(), src.height(), 1, std::vector<double>(p.begin(), p.end())),
                                        cells_w, cells_h);
      plane = r.data();
    }
    if (ratio != 1.0) {
      const double f = std::pow(ratio, -table.of(src.group(c)));
      for (double& v : plane) v *= f;
    }
    out.data.add(src.name(c), src.group(c), std::move(plane));
  }
  return out;
}

Pyramid pyramid_geometry(int width, int height, const WindowSpec& window, const PyramidOptions& opts) {
  if (opts.n_per_oct < 1) throw ArgumentError("n_per_oct must be >= 1");
  if (opts.octaves_up < 0 || opts.n_octaves < 0) throw ArgumentError("octave counts must be >= 0");
  window.validate();
  const int n = opts.n_per_oct, shrink = window.shrink;
  Pyramid pyr;
  int i0 = 0;
  for (int i = -opts.octaves_up * n;; ++i) {
    if (opts.n_octaves > 0 && i > opts.n_octaves * n) break;
    const double s = std::exp2(-static_cast<double>(i) / n);
    const int w = scaled_dim(width, s), h = scaled_dim(height, s);
    if (w / shrink < window.cells_x() || h / shrink < window.cells_y()) break;
    if (pyr.levels.empty()) i0 = i;
    PyramidLevel lv;
    lv.scale = s;
    lv.scale_x = static_cast<double>(w) / width;
    lv.scale_y = static_cast<double>(h) / height;
    lv.approximated = !opts.force_exact && ((i % n) + n) % n != 0;
    const int ia = static_cast<int>(std::floor(static_cast<double>(i) / n)) * n;
    lv.anchor = lv.approximated ? ia - i0 : static_cast<int>(pyr.levels.size());
    pyr.levels.push_back(std::move(lv));
  }
  pyr.window_too_large = pyr.levels.empty();
  return pyr;
}

Pyramid build_pyramid(const RasterImage& img, const FeaturePipeline& pipeline, const LambdaTable& table,
                      const WindowSpec& window, const PyramidOptions& opts) {
  return build_pyramid_levels(img, pipeline, table, window, opts, {});
}

Pyramid build_pyramid_levels(const RasterImage& img, const FeaturePipeline& pipeline, const LambdaTable& table,
                             const WindowSpec& window, const PyramidOptions& opts, const std::vector<bool>& wanted) {
  if (window.shrink != pipeline.shrink()) throw ArgumentError("window shrink differs from pipeline shrink");
  Pyramid pyr = pyramid_geometry(img.width(), img.height(), window, opts);
  const std::size_t L = pyr.levels.size();
  if (!wanted.empty() && wanted.size() != L) throw ArgumentError("level mask size does not match the pyramid");
  std::vector<bool> want(L, wanted.empty());
  for (std::size_t l = 0; l < wanted.size(); ++l)
    if (wanted[l]) want[l] = true, want[static_cast<std::size_t>(pyr.levels[l].anchor)] = true;
  std::vector<std::size_t> exact, approx;
  for (std::size_t l = 0; l < L; ++l)
    if (want[l]) (pyr.levels[l].approximated ? approx : exact).push_back(l);

  const int shrink = window.shrink;
  parallel_for(exact.size(), opts.threads, [&](std::size_t e) {
    PyramidLevel& lv = pyr.levels[exact[e]];
    lv.agg = pipeline.aggregate(at_scale(img, lv.scale));
  });
  parallel_for(approx.size(), opts.threads, [&](std::size_t a) {
    PyramidLevel& lv = pyr.levels[approx[a]];
    const PyramidLevel& al = pyr.levels[static_cast<std::size_t>(lv.anchor)];
    const int w = scaled_dim(img.width(), lv.scale), h = scaled_dim(img.height(), lv.scale);
    lv.agg = approximate_level(al.agg, w / shrink, h / shrink, lv.scale / al.scale, table);
  });
  return pyr;
}

}  // namespace orsim
