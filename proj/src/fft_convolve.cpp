#include "orsim/fft_convolve.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <new>
#include <utility>

#include "orsim/errors.hpp"
#include "orsim/imaging.hpp"

namespace orsim {

int good_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

SpectrumBuffer::SpectrumBuffer(std::size_t n) : size_(n) {
  data_ = reinterpret_cast<Complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!data_) throw std::bad_alloc();
  std::fill(data_, data_ + n, Complex{});
}

SpectrumBuffer::SpectrumBuffer(SpectrumBuffer&& o) noexcept
    : data_(std::exchange(o.data_, nullptr)), size_(std::exchange(o.size_, 0)) {}

SpectrumBuffer& SpectrumBuffer::operator=(SpectrumBuffer&& o) noexcept {
  if (this != &o) {
    if (data_) fftw_free(data_);
    data_ = std::exchange(o.data_, nullptr);
    size_ = std::exchange(o.size_, 0);
  }
  return *this;
}

SpectrumBuffer::~SpectrumBuffer() {
  if (data_) fftw_free(data_);
}

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// The FFTW planner is not thread-safe; executing an existing plan on new
// arrays (fftw_execute_dft) is.
class PlanRegistry {
 public:
  static PlanRegistry& instance() {
    static PlanRegistry r;
    return r;
  }

  PlanPair get(int rows, int cols) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({rows, cols});
    if (it != plans_.end()) return it->second;
    SpectrumBuffer a(static_cast<std::size_t>(rows) * cols), b(static_cast<std::size_t>(rows) * cols);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    PlanPair p;
    p.forward = fftw_plan_dft_2d(rows, cols, pa, pb, FFTW_FORWARD, FFTW_ESTIMATE);
    p.inverse = fftw_plan_dft_2d(rows, cols, pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE);
    plans_.emplace(std::make_pair(rows, cols), p);
    return p;
  }

 private:
  PlanRegistry() = default;
  ~PlanRegistry() {
    for (auto& [k, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }
  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

void execute(fftw_plan plan, SpectrumBuffer& in, SpectrumBuffer& out) {
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

FftConvolver::FftConvolver(int width, int height, int max_radius)
    : width_(width), height_(height), radius_(max_radius) {
  if (width < 1 || height < 1 || max_radius < 0) throw ArgumentError("bad convolver geometry");
  rows_ = good_fft_size(height + 2 * max_radius);
  cols_ = good_fft_size(width + 2 * max_radius);
}

SpectrumBuffer FftConvolver::field_spectrum(std::span<const Complex> field) const {
  if (field.size() != static_cast<std::size_t>(width_) * height_)
    throw ArgumentError("field size does not match convolver");
  const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
  SpectrumBuffer padded(n), spec(n);
  // Reflected border of width radius_ on every side, starting at (0, 0).
  const int ph = height_ + 2 * radius_, pw = width_ + 2 * radius_;
  for (int y = 0; y < ph; ++y) {
    const int sy = reflect_index(y - radius_, height_);
    Complex* row = padded.data() + static_cast<std::size_t>(y) * cols_;
    const Complex* src = field.data() + static_cast<std::size_t>(sy) * width_;
    for (int x = 0; x < pw; ++x) row[x] = src[reflect_index(x - radius_, width_)];
  }
  execute(PlanRegistry::instance().get(rows_, cols_).forward, padded, spec);
  return spec;
}

SpectrumBuffer FftConvolver::stencil_spectrum(const Stencil& stencil) const {
  if (stencil.radius > radius_) throw ArgumentError("stencil larger than convolver radius");
  const int side = 2 * stencil.radius + 1;
  if (stencil.taps.size() != static_cast<std::size_t>(side) * side)
    throw ArgumentError("stencil tap count does not match radius");
  const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
  SpectrumBuffer wrapped(n), spec(n);
  for (int dy = -stencil.radius; dy <= stencil.radius; ++dy) {
    const int r = (dy + rows_) % rows_;
    for (int dx = -stencil.radius; dx <= stencil.radius; ++dx) {
      const int c = (dx + cols_) % cols_;
      wrapped.data()[static_cast<std::size_t>(r) * cols_ + c] =
          stencil.taps[static_cast<std::size_t>(dy + stencil.radius) * side + (dx + stencil.radius)];
    }
  }
  execute(PlanRegistry::instance().get(rows_, cols_).forward, wrapped, spec);
  return spec;
}

void FftConvolver::convolve(const SpectrumBuffer& field_spec, const SpectrumBuffer& stencil_spec,
                            std::span<Complex> out) const {
  const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
  if (field_spec.size() != n || stencil_spec.size() != n) throw ArgumentError("spectrum size mismatch");
  if (out.size() != static_cast<std::size_t>(width_) * height_) throw ArgumentError("output size mismatch");
  SpectrumBuffer prod(n), result(n);
  const Complex* a = field_spec.data();
  const Complex* b = stencil_spec.data();
  Complex* p = prod.data();
  for (std::size_t i = 0; i < n; ++i) p[i] = a[i] * b[i];
  execute(PlanRegistry::instance().get(rows_, cols_).inverse, prod, result);
  const double scale = 1.0 / static_cast<double>(n);
  for (int y = 0; y < height_; ++y) {
    const Complex* row = result.data() + static_cast<std::size_t>(y + radius_) * cols_ + radius_;
    Complex* dst = out.data() + static_cast<std::size_t>(y) * width_;
    for (int x = 0; x < width_; ++x) dst[x] = row[x] * scale;
  }
}

std::vector<Complex> convolve_direct(std::span<const Complex> field, int width, int height,
                                     const Stencil& stencil) {
  if (field.size() != static_cast<std::size_t>(width) * height) throw ArgumentError("field size mismatch");
  const int r = stencil.radius, side = 2 * r + 1;
  std::vector<Complex> out(field.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      Complex acc{};
      for (int dy = -r; dy <= r; ++dy) {
        const int sy = reflect_index(y - dy, height);
        for (int dx = -r; dx <= r; ++dx) {
          const Complex& t = stencil.taps[static_cast<std::size_t>(dy + r) * side + (dx + r)];
          if (t == Complex{}) continue;
          acc += field[static_cast<std::size_t>(sy) * width + reflect_index(x - dx, width)] * t;
        }
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  return out;
}

}  // namespace orsim
