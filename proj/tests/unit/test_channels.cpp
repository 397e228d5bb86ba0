#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orsim/channels_frequency.hpp"
#include "orsim/channels_spatial.hpp"
#include "orsim/imaging.hpp"

using namespace orsim;

namespace {

RasterImage random_image(int w, int h, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RasterImage img(w, h, c);
  for (auto& v : img.data()) v = u(rng);
  return img;
}

// Blocky random texture: strong edges with flat interiors.
RasterImage blocky_image(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RasterImage img(w, h, 1);
  const int b = 6;
  std::vector<double> cells(static_cast<std::size_t>((w / b + 1) * (h / b + 1)));
  for (auto& v : cells) v = u(rng) < 0.5 ? 0.1 + 0.2 * u(rng) : 0.7 + 0.2 * u(rng);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(0, x, y) = cells[static_cast<std::size_t>((y / b) * (w / b + 1) + x / b)];
  return img;
}

Complex tap(const Stencil& s, int dx, int dy) {
  return s.taps[static_cast<std::size_t>((dy + s.radius) * (2 * s.radius + 1) + dx + s.radius)];
}

Complex tap_sum(const Stencil& s) {
  Complex z{};
  for (const auto& t : s.taps) z += t;
  return z;
}

}  // namespace

TEST(ColorChannels, BlackLuvHasZeroLuminance) {
  const ChannelStack s = color_channels(RasterImage(4, 4, 3, 0.0), ColorSpace::LUV);
  ASSERT_EQ(s.size(), 3);
  for (double v : s.plane(0)) EXPECT_EQ(v, 0.0);
}

TEST(ColorChannels, RgbIsTheInput) {
  const RasterImage img = random_image(5, 4, 3, 1);
  const ChannelStack s = color_channels(img, ColorSpace::RGB);
  ASSERT_EQ(s.size(), 3);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < img.plane_size(); ++i) EXPECT_EQ(s.plane(c)[i], img.plane(c)[i]);
}

TEST(ColorChannels, WhiteHasUnitValue) {
  const ChannelStack s = color_channels(RasterImage(3, 3, 3, 1.0), ColorSpace::HSV);
  for (double v : s.plane(2)) EXPECT_EQ(v, 1.0);
}

TEST(GradientMagnitude, ConstantImageGivesZero) {
  const ChannelStack s = gradient_magnitude(RasterImage(16, 16, 3, 0.4));
  ASSERT_EQ(s.size(), 1);
  for (double v : s.plane(0)) EXPECT_EQ(v, 0.0);
}

TEST(GradientMagnitude, StepRidgeIsHalfTheStep) {
  const double h = 0.8;
  RasterImage img(10, 6, 3, 0.0);
  for (int y = 0; y < 6; ++y)
    for (int x = 5; x < 10; ++x) img.at(1, x, y) = h;
  const RasterImage m = gradient_magnitude_raw(img);
  for (int y = 0; y < 6; ++y) {
    EXPECT_NEAR(m.at(0, 4, y), h / 2, 1e-15);
    EXPECT_NEAR(m.at(0, 5, y), h / 2, 1e-15);
    EXPECT_EQ(m.at(0, 2, y), 0.0);
    EXPECT_EQ(m.at(0, 7, y), 0.0);
  }
}

TEST(GradientMagnitude, NormalisationCancelsGain) {
  const RasterImage img = blocky_image(64, 64, 2);
  RasterImage half = img;
  for (auto& v : half.data()) v *= 0.5;
  const GradientMagnitudeOptions opts;
  const ChannelStack a = gradient_magnitude(img, opts);
  const ChannelStack b = gradient_magnitude(half, opts);
  // The ratio is (S + eps) / (S + 2 eps) for S the full-gain normaliser.
  const RasterImage ref = triangle_smooth(gradient_magnitude_raw(smooth(img, opts.pre_smooth_radius)), opts.norm_radius);
  int checked = 0;
  for (std::size_t i = 0; i < ref.plane_size(); ++i) {
    if (ref.data()[i] < 20 * opts.epsilon || a.plane(0)[i] < 1e-3) continue;
    EXPECT_NEAR(b.plane(0)[i] / a.plane(0)[i], 1.0, 0.05);
    ++checked;
  }
  EXPECT_GT(checked, 500);
}

TEST(ComplexGradient, ConstantImageGivesZeroField) {
  const ComplexField d = complex_gradient(RasterImage(8, 8, 1, 0.6));
  for (const auto& z : d.data) EXPECT_EQ(z, Complex{});
}

TEST(ComplexGradient, RampIsHorizontal) {
  const int w = 16;
  RasterImage img(w, 5, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < w; ++x) img.at(0, x, y) = static_cast<double>(x) / w;
  const ComplexField d = complex_gradient(img);
  for (int y = 0; y < 5; ++y)
    for (int x = 1; x + 1 < w; ++x) {
      EXPECT_NEAR(d.at(x, y).real(), 1.0 / w, 1e-15);
      EXPECT_EQ(d.at(x, y).imag(), 0.0);
    }
}

TEST(ComplexGradient, QuarterTurnMultipliesByI) {
  const RasterImage img = random_image(9, 12, 1, 3);
  const ComplexField d = complex_gradient(img);
  const ComplexField r = complex_gradient(rotate90(img, 1));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      EXPECT_EQ(r.at(img.height() - 1 - y, x), Complex(0, 1) * d.at(x, y));
}

TEST(FourierOrders, OrderZeroIsMagnitude) {
  const ComplexField d = complex_gradient(random_image(7, 7, 1, 4));
  const auto f = fourier_orders(d, 3);
  ASSERT_EQ(f.size(), 4u);
  for (std::size_t i = 0; i < d.data.size(); ++i) EXPECT_NEAR(f[0].data[i].real(), std::abs(d.data[i]), 1e-15);
}

TEST(FourierOrders, PhaseArithmetic) {
  ComplexField d(1, 1);
  d.at(0, 0) = Complex(0, 1);
  const auto f = fourier_orders(d, 2);
  EXPECT_NEAR(f[2].at(0, 0).real(), -1.0, 1e-15);
  EXPECT_NEAR(f[2].at(0, 0).imag(), 0.0, 1e-15);
}

TEST(FourierOrders, QuarterTurnPhaseFactor) {
  const RasterImage img = random_image(10, 10, 1, 5);
  const int m = 4;
  const auto f = fourier_orders(complex_gradient(img), m);
  const auto g = fourier_orders(complex_gradient(rotate90(img, 1)), m);
  for (int k = 0; k <= m; ++k) {
    const Complex factor = std::polar(1.0, -k * std::numbers::pi / 2);
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 10; ++x) {
        const Complex want = factor * f[static_cast<std::size_t>(k)].at(x, y);
        const Complex got = g[static_cast<std::size_t>(k)].at(9 - y, x);
        EXPECT_NEAR(std::abs(got - want), 0.0, 1e-12);
      }
  }
}

TEST(HarmonicKernel, CentralDcKernelSumsToOne) {
  const HarmonicKernel k = make_harmonic_kernel(0, 0.0, 6.0, 0);
  const Complex s = tap_sum(k.stencil);
  EXPECT_NEAR(s.real(), 1.0, 1e-12);
  for (const auto& t : k.stencil.taps) EXPECT_EQ(t.imag(), 0.0);
}

TEST(HarmonicKernel, NonzeroOrdersHaveZeroSum) {
  for (int j = 0; j < 5; ++j)
    for (int k : {-4, -3, -1, 1, 2, 4}) {
      const HarmonicKernel h = make_harmonic_kernel(j, 6.0 * j, 6.0, k);
      EXPECT_LT(std::abs(tap_sum(h.stencil)), 1e-6) << "j=" << j << " k=" << k;
    }
}

TEST(HarmonicKernel, OppositeOrdersAreConjugate) {
  for (int k : {1, 2, 3}) {
    const HarmonicKernel a = make_harmonic_kernel(2, 12.0, 6.0, k);
    const HarmonicKernel b = make_harmonic_kernel(2, 12.0, 6.0, -k);
    ASSERT_EQ(a.stencil.taps.size(), b.stencil.taps.size());
    for (std::size_t i = 0; i < a.stencil.taps.size(); ++i)
      EXPECT_NEAR(std::abs(a.stencil.taps[i] - std::conj(b.stencil.taps[i])), 0.0, 1e-15);
  }
}

TEST(FrequencyChannels, ZeroFieldGivesZeroChannels) {
  const FrequencyChannelComputer fc(FrequencyFeatureConfig::standard(3.0, 2));
  const auto fks = fourier_orders(ComplexField(24, 24), 2);
  const ChannelStack s = fc.compute_stack(fks);
  for (double v : s.data()) EXPECT_EQ(v, 0.0);
}

TEST(FrequencyChannels, F2MatchesHandStencilSum) {
  // sigma 1 puts ring 1 on a 5x5 stencil. F2 at (j, k) is f_k convolved with
  // U_{j,-k}; evaluate the sum tap by tap at an interior pixel.
  FrequencyFeatureConfig cfg = FrequencyFeatureConfig::standard(1.0, 1);
  cfg.use_f1 = cfg.use_f3 = false;
  const FrequencyChannelComputer fc(cfg);
  const HarmonicKernel u = make_harmonic_kernel(1, 1.0, 1.0, -1);
  ASSERT_EQ(u.stencil.radius, 2);

  const int w = 15;
  const double theta = 0.7;
  ComplexField d(w, w);
  for (auto& z : d.data) z = std::polar(1.0, theta);
  auto fks = fourier_orders(d, 1);
  const ChannelStack flat = fc.compute_stack(fks, ConvolutionMethod::Direct);
  const int re = 2 * (1 * 2 + 1), im = re + 1;
  ASSERT_EQ(flat.name(re), "F2_j1_k1_re");
  const std::size_t centre = static_cast<std::size_t>(7 * w + 7);
  const Complex got(flat.plane(re)[centre], flat.plane(im)[centre]);
  EXPECT_NEAR(std::abs(got), std::abs(tap_sum(u.stencil)), 1e-12);

  std::mt19937 rng(6);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  for (auto& z : d.data) z = std::polar(1.0, ang(rng));
  fks = fourier_orders(d, 1);
  const ChannelStack s = fc.compute_stack(fks, ConvolutionMethod::Direct);
  for (int py = 4; py <= 10; ++py)
    for (int px = 4; px <= 10; ++px) {
      Complex want{};
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) want += fks[1].at(px - dx, py - dy) * tap(u.stencil, dx, dy);
      const std::size_t i = static_cast<std::size_t>(py * w + px);
      EXPECT_NEAR(s.plane(re)[i], want.real(), 1e-12);
      EXPECT_NEAR(s.plane(im)[i], want.imag(), 1e-12);
    }
}

TEST(FrequencyChannels, QuarterTurnInvariance) {
  const FrequencyChannelComputer fc(FrequencyFeatureConfig::standard(3.0, 2));
  const RasterImage img = smooth(random_image(41, 41, 1, 7), 1);
  const ChannelStack a = fc.compute_stack(fourier_orders(complex_gradient(img), 2));
  const ChannelStack b = fc.compute_stack(fourier_orders(complex_gradient(rotate90(img, 1)), 2));
  const int n = 41, margin = fc.max_kernel_radius() / 2;
  double worst = 0.0;
  for (int c = 0; c < a.size(); ++c)
    for (int y = margin; y < n - margin; ++y)
      for (int x = margin; x < n - margin; ++x) {
        const double va = a.plane(c)[static_cast<std::size_t>(y * n + x)];
        const double vb = b.plane(c)[static_cast<std::size_t>(x * n + (n - 1 - y))];
        worst = std::max(worst, std::abs(va - vb));
      }
  EXPECT_LT(worst, 1e-6);
}

TEST(FrequencyChannels, FftMatchesDirect) {
  const FrequencyChannelComputer fc(FrequencyFeatureConfig::standard(3.0, 2));
  const auto fks = fourier_orders(complex_gradient(random_image(30, 23, 1, 8)), 2);
  const ChannelStack a = fc.compute_stack(fks, ConvolutionMethod::Fft);
  const ChannelStack b = fc.compute_stack(fks, ConvolutionMethod::Direct);
  ASSERT_EQ(a.data().size(), b.data().size());
  for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-6);
}

TEST(FrequencyChannels, DefaultLayoutSize) {
  EXPECT_EQ(frequency_channel_layout(FrequencyFeatureConfig::standard(6.0, 4)).size(), 267u);
  EXPECT_EQ(frequency_channel_layout(FrequencyFeatureConfig::standard(3.0, 2)).size(), 109u);
}
