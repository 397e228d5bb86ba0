#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace orsim {

using Complex = std::complex<double>;

// Square complex stencil with taps[(dy + r) * (2r + 1) + (dx + r)] = U(dx, dy).
struct Stencil {
  int radius = 0;
  std::vector<Complex> taps;
};

// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
int good_fft_size(int n);

// Owning buffer from fftw_malloc, so every transform sees the same alignment
// and FFTW picks the same codelets run to run.
class SpectrumBuffer {
 public:
  SpectrumBuffer() = default;
  explicit SpectrumBuffer(std::size_t n);
  SpectrumBuffer(SpectrumBuffer&&) noexcept;
  SpectrumBuffer& operator=(SpectrumBuffer&&) noexcept;
  SpectrumBuffer(const SpectrumBuffer&) = delete;
  SpectrumBuffer& operator=(const SpectrumBuffer&) = delete;
  ~SpectrumBuffer();

  Complex* data() { return data_; }
  const Complex* data() const { return data_; }
  std::size_t size() const { return size_; }

 private:
  Complex* data_ = nullptr;
  std::size_t size_ = 0;
};

// Linear convolution out(p) = sum_q field(p - q) U(q) of a width x height field
// with stencils of radius <= max_radius, borders reflected (half-sample
// symmetric). Computed on a zero-extended padded grid with FFTW; plans are made
// with FFTW_ESTIMATE under a global lock and shared between instances.
class FftConvolver {
 public:
  FftConvolver(int width, int height, int max_radius);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int max_radius() const { return radius_; }

  SpectrumBuffer field_spectrum(std::span<const Complex> field) const;
  SpectrumBuffer stencil_spectrum(const Stencil& stencil) const;

  // out must hold width * height values.
  void convolve(const SpectrumBuffer& field_spec, const SpectrumBuffer& stencil_spec,
                std::span<Complex> out) const;

 private:
  int width_;
  int height_;
  int radius_;
  int rows_;
  int cols_;
};

// Reference implementation with identical border semantics, O(N * taps).
std::vector<Complex> convolve_direct(std::span<const Complex> field, int width, int height,
                                     const Stencil& stencil);

}  // namespace orsim
