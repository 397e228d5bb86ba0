#include "orsim/channels_frequency.hpp"

#include <algorithm>
#include <cmath>

#include "orsim/errors.hpp"

namespace orsim {

FrequencyFeatureConfig FrequencyFeatureConfig::standard(double sigma, int max_order) {
  FrequencyFeatureConfig c;
  c.sigma = sigma;
  c.max_order = max_order;
  c.radii.clear();
  for (int j = 0; j < 5; ++j) c.radii.push_back(j * sigma);
  return c;
}

void FrequencyFeatureConfig::validate() const {
  if (max_order < 1) throw ConfigError("Fourier order m must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be positive");
  if (radii.empty() || radii.front() != 0.0) throw ConfigError("kernel radii must start at 0");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw ConfigError("kernel radii must be strictly increasing");
  if (use_f3 && radii.size() < 2) throw ConfigError("F3 needs at least two radii");
  if (!use_f1 && !use_f2 && !use_f3) throw ConfigError("no frequency family enabled");
  if (!(f3_floor >= 0.0 && f3_floor <= 1.0)) throw ConfigError("F3 floor must lie in [0, 1]");
}

std::vector<ChannelSlot> frequency_channel_layout(const FrequencyFeatureConfig& cfg) {
  std::vector<ChannelSlot> out;
  const int m = cfg.max_order, nr = cfg.ring_count();
  auto tag = [](int j, int k) { return "_j" + std::to_string(j) + "_k" + std::to_string(k); };
  if (cfg.use_f1)
    for (int j = 0; j < nr; ++j)
      for (int k = 0; k <= m; ++k) out.push_back({"F1" + tag(j, k), ChannelGroup::FrequencyF1});
  if (cfg.use_f2)
    for (int j = 0; j < nr; ++j)
      for (int k = 0; k <= m; ++k)
        for (const char* part : {"_re", "_im"})
          out.push_back({"F2" + tag(j, k) + part, ChannelGroup::FrequencyF2});
  if (cfg.use_f3)
    for (int j = 0; j + 1 < nr; ++j)
      for (int k = 0; k <= m; ++k)
        for (int q = 0; q <= m; ++q) {
          if (k + q == 0) continue;
          for (const char* part : {"_re", "_im"})
            out.push_back({"F3" + tag(j, k) + "_q" + std::to_string(q) + part,
                           ChannelGroup::FrequencyF3});
        }
  return out;
}

ComplexField complex_gradient(const RasterImage& img) {
  RasterImage lum;
  if (img.channels() == 1)
    lum = img;
  else if (img.channels() == 3)
    lum = extract_channel(to_color_space(img, ColorSpace::LUV), 0);
  else
    throw ArgumentError("complex gradient needs a 1- or 3-channel image");
  const GradientPair g = gradients(lum);
  ComplexField d(img.width(), img.height());
  const auto dx = g.dx.plane(0), dy = g.dy.plane(0);
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = Complex(dx[i], dy[i]);
  return d;
}

std::vector<ComplexField> fourier_orders(const ComplexField& d, int max_order) {
  if (max_order < 0) throw ArgumentError("Fourier order must be non-negative");
  std::vector<ComplexField> fks(static_cast<std::size_t>(max_order) + 1, ComplexField(d.width, d.height));
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    const Complex z = d.data[i];
    const double mag = std::sqrt(z.real() * z.real() + z.imag() * z.imag());
    if (mag == 0.0) continue;
    // e^{-ik theta} = conj(u)^k; a quarter turn maps u to i*u exactly, so the
    // powers stay bit-exact under 90 degree rotations.
    const Complex cu = std::conj(z / mag);
    Complex p(1.0, 0.0);
    fks[0].data[i] = Complex(mag, 0.0);
    for (int k = 1; k <= max_order; ++k) {
      p *= cu;
      fks[static_cast<std::size_t>(k)].data[i] = mag * p;
    }
  }
  return fks;
}

HarmonicKernel make_harmonic_kernel(int ring_index, double ring_radius, double sigma, int order) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  HarmonicKernel h;
  h.radius_index = ring_index;
  h.order = order;
  h.sigma = sigma;
  h.ring_radius = ring_radius;
  const double outer = ring_radius + sigma;
  const int r = static_cast<int>(std::ceil(outer + 0.4)) - 1;
  const int side = 2 * r + 1;
  constexpr int kSub = 5;
  std::vector<double> profile(static_cast<std::size_t>(side) * side, 0.0);
  std::vector<Complex> taps(profile.size());
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      double psum = 0.0;
      Complex tsum{};
      for (int sy = 0; sy < kSub; ++sy)
        for (int sx = 0; sx < kSub; ++sx) {
          const double x = dx + (sx + 0.5) / kSub - 0.5;
          const double y = dy + (sy + 0.5) / kSub - 0.5;
          const double rad = std::sqrt(x * x + y * y);
          const double p = std::max(0.0, 1.0 - std::abs(rad - ring_radius) / sigma);
          if (p == 0.0) continue;
          psum += p;
          if (order == 0) {
            tsum += p;
          } else if (rad > 0.0) {
            const double phi = std::atan2(-y, x);
            tsum += p * Complex(std::cos(order * phi), std::sin(order * phi));
          }
        }
      const std::size_t idx = static_cast<std::size_t>(dy + r) * side + (dx + r);
      profile[idx] = psum / (kSub * kSub);
      taps[idx] = tsum / static_cast<double>(kSub * kSub);
    }
  double total = 0.0;
  for (double p : profile) total += p;
  double abs_total = 0.0;
  for (const auto& t : taps) abs_total += std::abs(t);
  if (!(total > 0.0) || !(abs_total > 1e-12 * total))
    throw ConfigError("empty annulus for ring " + std::to_string(ring_index) + " order " +
                      std::to_string(order));
  for (auto& t : taps) t /= total;
  for (auto& p : profile) p /= total;
  if (order != 0 && order % 4 == 0) {
    Complex dc{};
    for (const auto& t : taps) dc += t;
    for (std::size_t i = 0; i < taps.size(); ++i) taps[i] -= dc * profile[i];
  }
  h.stencil.radius = r;
  h.stencil.taps = std::move(taps);
  return h;
}

std::vector<HarmonicKernel> build_kernels(const FrequencyFeatureConfig& cfg) {
  cfg.validate();
  const int m = cfg.max_order;
  std::vector<int> orders;
  if (cfg.use_f1) orders.push_back(0);
  if (cfg.use_f2)
    for (int k = 0; k <= m; ++k) orders.push_back(-k);
  if (cfg.use_f3)
    for (int k = 0; k <= m; ++k) orders.push_back(k);
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  std::vector<HarmonicKernel> out;
  for (int j = 0; j < cfg.ring_count(); ++j)
    for (int k : orders)
      out.push_back(make_harmonic_kernel(j, cfg.radii[static_cast<std::size_t>(j)], cfg.sigma, k));
  return out;
}

FrequencyChannelComputer::FrequencyChannelComputer(FrequencyFeatureConfig cfg,
                                                   std::size_t spectrum_cache_bytes)
    : cfg_(std::move(cfg)), cache_budget_(spectrum_cache_bytes) {
  kernels_ = build_kernels(cfg_);
  layout_ = frequency_channel_layout(cfg_);
  for (const auto& k : kernels_) max_radius_ = std::max(max_radius_, k.stencil.radius);
}

int FrequencyChannelComputer::kernel_index(int j, int k) const {
  for (std::size_t i = 0; i < kernels_.size(); ++i)
    if (kernels_[i].radius_index == j && kernels_[i].order == k) return static_cast<int>(i);
  throw ArgumentError("kernel (" + std::to_string(j) + "," + std::to_string(k) + ") not in bank");
}

std::shared_ptr<const std::vector<SpectrumBuffer>> FrequencyChannelComputer::kernel_spectra(
    const FftConvolver& conv) const {
  {
    std::lock_guard lock(cache_mutex_);
    for (auto it = cache_.begin(); it != cache_.end(); ++it)
      if (it->rows == conv.rows() && it->cols == conv.cols()) {
        cache_.splice(cache_.begin(), cache_, it);
        return cache_.front().spectra;
      }
  }
  auto spectra = std::make_shared<std::vector<SpectrumBuffer>>();
  spectra->reserve(kernels_.size());
  for (const auto& k : kernels_) spectra->push_back(conv.stencil_spectrum(k.stencil));
  const std::size_t bytes =
      kernels_.size() * static_cast<std::size_t>(conv.rows()) * conv.cols() * sizeof(Complex);
  if (bytes <= cache_budget_) {
    std::lock_guard lock(cache_mutex_);
    cache_.push_front({conv.rows(), conv.cols(), bytes, spectra});
    cache_bytes_ += bytes;
    while (cache_bytes_ > cache_budget_ && cache_.size() > 1) {
      cache_bytes_ -= cache_.back().bytes;
      cache_.pop_back();
    }
  }
  return spectra;
}

void FrequencyChannelComputer::compute(const std::vector<ComplexField>& fks, const Sink& sink,
                                       ConvolutionMethod method) const {
  const int m = cfg_.max_order, nr = cfg_.ring_count();
  if (static_cast<int>(fks.size()) < m + 1) throw ArgumentError("need Fourier orders 0..m");
  const int w = fks[0].width, h = fks[0].height;
  for (const auto& f : fks)
    if (f.width != w || f.height != h) throw ArgumentError("Fourier order fields differ in size");
  const std::size_t n = static_cast<std::size_t>(w) * h;

  std::unique_ptr<FftConvolver> conv;
  std::vector<SpectrumBuffer> field_spec;
  std::shared_ptr<const std::vector<SpectrumBuffer>> kspec;
  if (method == ConvolutionMethod::Fft) {
    conv = std::make_unique<FftConvolver>(w, h, max_radius_);
    for (int k = 0; k <= m; ++k) field_spec.push_back(conv->field_spectrum(fks[static_cast<std::size_t>(k)].data));
    kspec = kernel_spectra(*conv);
  }
  auto convolve = [&](int k, int j, int order, std::vector<Complex>& out) {
    const int ki = kernel_index(j, order);
    if (method == ConvolutionMethod::Fft) {
      out.resize(n);
      conv->convolve(field_spec[static_cast<std::size_t>(k)], (*kspec)[static_cast<std::size_t>(ki)], out);
    } else {
      out = convolve_direct(fks[static_cast<std::size_t>(k)].data, w, h,
                            kernels_[static_cast<std::size_t>(ki)].stencil);
    }
  };

  int base = 0;
  const int f1_base = base;
  if (cfg_.use_f1) base += nr * (m + 1);
  const int f2_base = base;
  if (cfg_.use_f2) base += 2 * nr * (m + 1);
  const int f3_base = base;

  std::vector<Complex> a, b;
  std::vector<double> re(n), im(n);
  auto emit_complex = [&](int channel, const std::vector<Complex>& z) {
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = z[i].real();
      im[i] = z[i].imag();
    }
    sink(channel, re);
    sink(channel + 1, im);
  };

  // Annular gradient energy E_j = |d| * U_{j,0}; it is F1, the k = 0 part of
  // F2 and the scale reference of the F3 floor.
  std::vector<std::vector<double>> energy(static_cast<std::size_t>(nr));
  for (int j = 0; j < nr; ++j) {
    convolve(0, j, 0, a);
    auto& e = energy[static_cast<std::size_t>(j)];
    e.resize(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = a[i].real();
    if (cfg_.use_f1)
      for (int k = 0; k <= m; ++k) sink(f1_base + j * (m + 1) + k, e);
    if (cfg_.use_f2) {
      emit_complex(f2_base + 2 * (j * (m + 1)), a);
      for (int k = 1; k <= m; ++k) {
        convolve(k, j, -k, b);
        emit_complex(f2_base + 2 * (j * (m + 1) + k), b);
      }
    }
  }

  if (cfg_.use_f3) {
    const double tau = cfg_.f3_floor;
    const int couples = (m + 1) * (m + 1) - 1;
    std::vector<Complex> prod(n);
    for (int k = 0; k <= m; ++k)
      for (int q = 0; q <= m; ++q) {
        if (k + q == 0) continue;
        const int couple = k * (m + 1) + q - 1;  // position in (k, q) order, (0,0) skipped
        convolve(k, 0, q, a);
        for (int j = 0; j + 1 < nr; ++j) {
          convolve(k, j + 1, q, b);
          const auto& e0 = energy[static_cast<std::size_t>(j)];
          const auto& e1 = energy[static_cast<std::size_t>(j + 1)];
          for (std::size_t i = 0; i < n; ++i) {
            const double ma = std::abs(a[i]), mb = std::abs(b[i]);
            if (ma < kF3Guard || mb < kF3Guard) {
              prod[i] = Complex{};
              continue;
            }
            const Complex z = a[i] * std::conj(b[i]);
            prod[i] = z / std::max(ma * mb, tau * e0[i] * e1[i]);
          }
          emit_complex(f3_base + 2 * (j * couples + couple), prod);
          std::swap(a, b);
        }
      }
  }
}

ChannelStack FrequencyChannelComputer::compute_stack(const std::vector<ComplexField>& fks,
                                                     ConvolutionMethod method) const {
  if (fks.empty()) throw ArgumentError("no Fourier order fields");
  ChannelStack out(fks[0].width, fks[0].height);
  for (const auto& s : layout_) out.add_zero(s.name, s.group);
  compute(
      fks,
      [&](int c, std::span<const double> plane) { std::copy(plane.begin(), plane.end(), out.plane(c).begin()); },
      method);
  return out;
}

ChannelStack invariant_features(const std::vector<ComplexField>& fks,
                                const std::vector<HarmonicKernel>& kernels,
                                const FrequencyFeatureConfig& cfg) {
  FrequencyChannelComputer computer(cfg, 0);
  if (kernels.size() != computer.kernels().size())
    throw ArgumentError("kernel bank does not match frequency configuration");
  for (std::size_t i = 0; i < kernels.size(); ++i)
    if (kernels[i].radius_index != computer.kernels()[i].radius_index ||
        kernels[i].order != computer.kernels()[i].order)
      throw ArgumentError("kernel bank does not match frequency configuration");
  return computer.compute_stack(fks);
}

}  // namespace orsim
