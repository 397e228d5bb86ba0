#include <gtest/gtest.h>

#include <cmath>

#include "orsim/errors.hpp"
#include "orsim/pyramid.hpp"
#include "orsim/synth.hpp"

using namespace orsim;

namespace {

// Pink-noise RGB images with independent, mildly correlated channels.
std::vector<RasterImage> pink_corpus(int count, int size) {
  std::vector<RasterImage> out;
  for (int i = 0; i < count; ++i) {
    RasterImage img(size, size, 3);
    const auto base = pink_noise(size, size, 500 + static_cast<std::uint64_t>(i));
    for (int c = 0; c < 3; ++c) {
      const auto tint = pink_noise(size, size, 900 + static_cast<std::uint64_t>(i * 3 + c));
      auto p = img.plane(c);
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::clamp(0.5 + 0.15 * base[k] + 0.05 * tint[k], 0.0, 1.0);
    }
    out.push_back(std::move(img));
  }
  return out;
}

// Gradient exponent of the corpus above, frozen from a reference run.
constexpr double kGoldenGradientLambda = 0.184862209;

ChannelConfig spatial_only() {
  ChannelConfig c;
  c.use_frequency = false;
  return c;
}

}  // namespace

TEST(Calibration, ColourIsScaleInvariantAndGradientDecays) {
  const FeaturePipeline pipe(spatial_only());
  const auto images = pink_corpus(12, 128);
  const LambdaTable t = calibrate_lambda(images, default_calibration_scales(2, 4), pipe);
  EXPECT_NEAR(t.of(ChannelGroup::Color), 0.0, 0.05);
  EXPECT_GT(t.of(ChannelGroup::GradientMagnitude), 0.0);
  EXPECT_NEAR(t.of(ChannelGroup::GradientMagnitude), kGoldenGradientLambda, 1e-6);
}

TEST(Calibration, ConstantImagesGiveZeroColourExponent) {
  ChannelConfig cfg;
  cfg.use_gradient = cfg.use_frequency = false;
  const FeaturePipeline pipe(cfg);
  const std::vector<RasterImage> images(8, RasterImage(64, 64, 3, 0.6));
  const CalibrationReport rep = calibration_report(images, default_calibration_scales(2, 4), pipe);
  const GroupFit& f = rep.groups[static_cast<std::size_t>(ChannelGroup::Color)];
  ASSERT_TRUE(f.present);
  for (double m : f.mu) EXPECT_NEAR(m, f.mu.front(), 1e-12);
  EXPECT_EQ(rep.table.of(ChannelGroup::Color), 0.0);
}

TEST(Calibration, ConstantImagesMakeGradientDegenerate) {
  const FeaturePipeline pipe(spatial_only());
  const std::vector<RasterImage> images(8, RasterImage(64, 64, 3, 0.6));
  EXPECT_THROW(calibrate_lambda(images, default_calibration_scales(2, 4), pipe), CalibrationError);
}

TEST(Calibration, TooFewImagesRejected) {
  const FeaturePipeline pipe(spatial_only());
  const std::vector<RasterImage> images(3, RasterImage(64, 64, 3, 0.6));
  EXPECT_THROW(calibrate_lambda(images, default_calibration_scales(2, 4), pipe), ArgumentError);
}

TEST(PyramidGeometry, OneScalePerOctaveHasOnlyAnchors) {
  PyramidOptions o;
  o.n_per_oct = 1;
  const Pyramid p = pyramid_geometry(400, 300, WindowSpec{}, o);
  ASSERT_GE(p.levels.size(), 3u);
  for (std::size_t l = 0; l < p.levels.size(); ++l) {
    EXPECT_FALSE(p.levels[l].approximated);
    EXPECT_EQ(p.levels[l].anchor, static_cast<int>(l));
  }
}

TEST(PyramidGeometry, EightScalesPerOctave) {
  const Pyramid p = pyramid_geometry(512, 512, WindowSpec{}, PyramidOptions{});
  ASSERT_GE(p.levels.size(), 17u);
  for (int oct = 0; oct < 2; ++oct) {
    int approx = 0;
    for (int i = 0; i < 8; ++i) {
      const PyramidLevel& lv = p.levels[static_cast<std::size_t>(oct * 8 + i)];
      EXPECT_NEAR(lv.scale, std::exp2(-(oct * 8 + i) / 8.0), 1e-15);
      approx += lv.approximated;
      EXPECT_EQ(lv.anchor, oct * 8);
    }
    EXPECT_EQ(approx, 7);
  }
  const Pyramid exact = pyramid_geometry(512, 512, WindowSpec{}, PyramidOptions{.force_exact = true});
  for (const auto& lv : exact.levels) EXPECT_FALSE(lv.approximated);
}

TEST(PyramidGeometry, StopsWhenWindowNoLongerFits) {
  const WindowSpec win;
  const Pyramid p = pyramid_geometry(64, 64, win, PyramidOptions{});
  ASSERT_FALSE(p.levels.empty());
  const PyramidLevel& last = p.levels.back();
  EXPECT_GE(scaled_dim(64, last.scale) / win.shrink, win.cells_x());
  EXPECT_TRUE(pyramid_geometry(16, 16, win, PyramidOptions{}).window_too_large);
}

TEST(Pyramid, ApproximatedLevelsFollowThePowerLaw) {
  const FeaturePipeline pipe(spatial_only());
  LambdaTable t;
  t.lambda[static_cast<std::size_t>(ChannelGroup::GradientMagnitude)] = 0.4;
  const RasterImage img = pink_corpus(1, 160).front();
  const Pyramid p = build_pyramid(img, pipe, t, WindowSpec{}, PyramidOptions{});
  const PyramidLevel& lv = p.levels[3];
  ASSERT_TRUE(lv.approximated);
  ASSERT_EQ(lv.anchor, 0);
  const AggregatedStack& a = p.levels[0].agg;
  const AggregatedStack manual = approximate_level(a, lv.agg.data.width(), lv.agg.data.height(), lv.scale, t);
  EXPECT_EQ(manual.data, lv.agg.data);
  // Identity ratio and size reproduce the anchor.
  const AggregatedStack same = approximate_level(a, a.data.width(), a.data.height(), 1.0, t);
  for (std::size_t i = 0; i < a.data.data().size(); ++i) EXPECT_NEAR(same.data.data()[i], a.data.data()[i], 1e-12);
}

TEST(Pyramid, LevelMaskComputesOnlyWhatIsAsked) {
  const FeaturePipeline pipe(spatial_only());
  const RasterImage img = pink_corpus(1, 160).front();
  const Pyramid full = build_pyramid(img, pipe, LambdaTable{}, WindowSpec{}, PyramidOptions{});
  std::vector<bool> want(full.levels.size(), false);
  want[5] = true;
  const Pyramid part = build_pyramid_levels(img, pipe, LambdaTable{}, WindowSpec{}, PyramidOptions{}, want);
  EXPECT_EQ(part.levels[5].agg.data, full.levels[5].agg.data);
  EXPECT_EQ(part.levels[0].agg.data, full.levels[0].agg.data);
  EXPECT_EQ(part.levels[2].agg.data.size(), 0);
}
