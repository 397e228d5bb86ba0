#pragma once

#include <cstddef>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "orsim/channels_spatial.hpp"
#include "orsim/fft_convolve.hpp"
#include "orsim/imaging.hpp"

namespace orsim {

// Complex raster; holds the gradient field d = dx + i dy and its Fourier orders.
struct ComplexField {
  int width = 0;
  int height = 0;
  std::vector<Complex> data;

  ComplexField() = default;
  ComplexField(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h) {}
  Complex& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const Complex& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// U_{j,k}(x) = P_j(|x|) e^{i k phi(x)} with the triangular radial profile
// P_j(r) = max(0, 1 - |r - r_j| / sigma).
//
// phi is measured against the image row axis (phi = atan2(-y, x) for row
// offset y), the opposite sense to the gradient phase atan2(dy, dx). A rotation
// that advances gradient phases by a then multiplies f_k = |d| e^{-ik theta} by
// e^{-ika} and U_{j,k'} by e^{-ik'a}, so f_k * U_{j,k'} picks up
// e^{-i(k+k')a}: k' = -k is invariant, and the two-ring F3 product cancels the
// common factor for any k'.
//
// Taps are 5x5 supersampled per pixel and scaled so the radial profile sums to
// one. Orders divisible by four leak a DC term on the square lattice; that
// term is projected out so every k != 0 kernel sums to zero.
struct HarmonicKernel {
  int radius_index = 0;  // j
  int order = 0;         // k, may be negative
  double sigma = 0.0;
  double ring_radius = 0.0;  // r_j
  Stencil stencil;
};

struct FrequencyFeatureConfig {
  int max_order = 4;  // m
  double sigma = 6.0;
  std::vector<double> radii{0.0, 6.0, 12.0, 18.0, 24.0};
  bool use_f1 = true;
  bool use_f2 = true;
  bool use_f3 = true;
  // F3 divides a conj(b) by max(|a||b|, f3_floor * E_j * E_{j+1}), with E_j
  // the ring's gradient energy (the F1 value). Couples far below the local
  // energy carry phase noise only; the floor fades them out instead of
  // promoting that noise to unit magnitude. 0 gives the bare unit phase.
  double f3_floor = 0.1;

  // Five rings r_j = j * sigma, j = 0..4.
  static FrequencyFeatureConfig standard(double sigma, int max_order);

  // Throws ConfigError on m < 1, radii not strictly increasing from 0,
  // sigma <= 0, or no family enabled.
  void validate() const;
  int ring_count() const { return static_cast<int>(radii.size()); }

  bool operator==(const FrequencyFeatureConfig&) const = default;
};

struct ChannelSlot {
  std::string name;
  ChannelGroup group;
};

// Deterministic Omega_3 layout: family-major, then j, then k, then k', then
// real before imaginary. F3 couples rings (j, j+1) with k' in 0..m, k + k' != 0.
std::vector<ChannelSlot> frequency_channel_layout(const FrequencyFeatureConfig& cfg);

// d = dx + i dy of the luminance: the LUV L channel for 3-channel input, the
// channel itself for 1-channel input.
ComplexField complex_gradient(const RasterImage& img);

// f_k = |d| e^{-ik theta(d)} for k = 0..m; zero wherever d is zero.
std::vector<ComplexField> fourier_orders(const ComplexField& d, int max_order);

HarmonicKernel make_harmonic_kernel(int ring_index, double ring_radius, double sigma, int order);

// Every (j, k) kernel the enabled families need, sorted by j then k.
// Throws ConfigError for an annulus without taps.
std::vector<HarmonicKernel> build_kernels(const FrequencyFeatureConfig& cfg);

enum class ConvolutionMethod { Fft, Direct };

// Computes Omega_3 channels. Holds the kernel bank and an LRU cache of kernel
// spectra keyed by padded FFT size; compute() is safe to call concurrently.
class FrequencyChannelComputer {
 public:
  explicit FrequencyChannelComputer(FrequencyFeatureConfig cfg,
                                    std::size_t spectrum_cache_bytes = std::size_t{512} << 20);

  const FrequencyFeatureConfig& config() const { return cfg_; }
  const std::vector<HarmonicKernel>& kernels() const { return kernels_; }
  const std::vector<ChannelSlot>& layout() const { return layout_; }
  int max_kernel_radius() const { return max_radius_; }

  using Sink = std::function<void(int channel, std::span<const double> plane)>;

  // Emits every channel of the layout exactly once, in no particular order.
  void compute(const std::vector<ComplexField>& fks, const Sink& sink,
               ConvolutionMethod method = ConvolutionMethod::Fft) const;

  ChannelStack compute_stack(const std::vector<ComplexField>& fks,
                             ConvolutionMethod method = ConvolutionMethod::Fft) const;

 private:
  int kernel_index(int j, int k) const;
  std::shared_ptr<const std::vector<SpectrumBuffer>> kernel_spectra(const FftConvolver& conv) const;

  FrequencyFeatureConfig cfg_;
  std::vector<HarmonicKernel> kernels_;
  std::vector<ChannelSlot> layout_;
  int max_radius_ = 0;

  struct CacheEntry {
    int rows;
    int cols;
    std::size_t bytes;
    std::shared_ptr<const std::vector<SpectrumBuffer>> spectra;
  };
  std::size_t cache_budget_;
  mutable std::mutex cache_mutex_;
  mutable std::list<CacheEntry> cache_;  // front = most recent
  mutable std::size_t cache_bytes_ = 0;
};

// Convenience wrapper: a fresh computer over `kernels`' config.
ChannelStack invariant_features(const std::vector<ComplexField>& fks,
                                const std::vector<HarmonicKernel>& kernels,
                                const FrequencyFeatureConfig& cfg);

// Absolute guard: F3 is 0 where either ring response is below it.
inline constexpr double kF3Guard = 1e-8;

}  // namespace orsim
