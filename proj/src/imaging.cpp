#include "orsim/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "orsim/errors.hpp"

namespace orsim {

RasterImage::RasterImage(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1 || channels < 1)
    throw ArgumentError("raster dimensions must be positive");
  data_.assign(plane_size() * static_cast<std::size_t>(channels), fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 1 || height < 1 || channels < 1)
    throw ArgumentError("raster dimensions must be positive");
  if (data_.size() != plane_size() * static_cast<std::size_t>(channels))
    throw ArgumentError("raster data length does not match dimensions");
}

ColorSpace parse_color_space(std::string_view name) {
  if (name == "RGB" || name == "rgb") return ColorSpace::RGB;
  if (name == "LUV" || name == "luv") return ColorSpace::LUV;
  if (name == "HSV" || name == "hsv") return ColorSpace::HSV;
  throw ArgumentError("unknown color space: " + std::string(name));
}

std::string_view to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::RGB: return "RGB";
    case ColorSpace::LUV: return "LUV";
    case ColorSpace::HSV: return "HSV";
  }
  return "?";
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Linear interpolation written so equal endpoints reproduce exactly.
inline double lerp(double a, double b, double t) { return a + t * (b - a); }

struct AxisSample {
  int i0;
  int i1;
  double t;
};

std::vector<AxisSample> axis_samples(int in, int out) {
  std::vector<AxisSample> s(static_cast<std::size_t>(out));
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * ratio - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    int i0 = static_cast<int>(std::floor(src));
    i0 = std::min(i0, in - 1);
    const int i1 = std::min(i0 + 1, in - 1);
    s[static_cast<std::size_t>(o)] = {i0, i1, src - i0};
  }
  return s;
}

}  // namespace

RasterImage resample_to(const RasterImage& img, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) throw ArgumentError("resample target must be at least 1x1");
  if (out_width == img.width() && out_height == img.height()) return img;
  const auto xs = axis_samples(img.width(), out_width);
  const auto ys = axis_samples(img.height(), out_height);
  RasterImage out(out_width, out_height, img.channels());
  const int w = img.width();
  for (int c = 0; c < img.channels(); ++c) {
    const auto src = img.plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < out_height; ++y) {
      const auto& sy = ys[static_cast<std::size_t>(y)];
      const double* r0 = src.data() + static_cast<std::size_t>(sy.i0) * w;
      const double* r1 = src.data() + static_cast<std::size_t>(sy.i1) * w;
      double* row = dst.data() + static_cast<std::size_t>(y) * out_width;
      for (int x = 0; x < out_width; ++x) {
        const auto& sx = xs[static_cast<std::size_t>(x)];
        const double top = lerp(r0[sx.i0], r0[sx.i1], sx.t);
        const double bot = lerp(r1[sx.i0], r1[sx.i1], sx.t);
        row[x] = lerp(top, bot, sy.t);
      }
    }
  }
  return out;
}

RasterImage resample(const RasterImage& img, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("resample scale must be positive");
  const int w = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  return resample_to(img, w, h);
}

RasterImage resample_pyramid(const RasterImage& img, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) throw ArgumentError("resample target must be at least 1x1");
  RasterImage cur = img;
  while (2 * out_width <= cur.width() && 2 * out_height <= cur.height()) {
    const int hw = std::max(1, static_cast<int>(std::lround(cur.width() * 0.5)));
    const int hh = std::max(1, static_cast<int>(std::lround(cur.height() * 0.5)));
    cur = resample_to(cur, hw, hh);
  }
  return resample_to(cur, out_width, out_height);
}

namespace {

// Linear-RGB to XYZ (D65), the matrix most ACF implementations use.
constexpr double kRgbToXyz[3][3] = {{0.412453, 0.357580, 0.180423},
                                    {0.212671, 0.715160, 0.072169},
                                    {0.019334, 0.119193, 0.950227}};

void rgb_to_luv(double r, double g, double b, double& L, double& u, double& v) {
  const double X = kRgbToXyz[0][0] * r + kRgbToXyz[0][1] * g + kRgbToXyz[0][2] * b;
  const double Y = kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b;
  const double Z = kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b;
  // White point = image of RGB (1,1,1), so white maps to u = v = 0.
  constexpr double Xn = kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2];
  constexpr double Yn = kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2];
  constexpr double Zn = kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2];
  constexpr double dn = Xn + 15.0 * Yn + 3.0 * Zn;
  constexpr double un = 4.0 * Xn / dn;
  constexpr double vn = 9.0 * Yn / dn;
  constexpr double eps = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
  constexpr double kappa = (29.0 / 3.0) * (29.0 / 3.0) * (29.0 / 3.0);
  const double yr = Y / Yn;
  L = yr > eps ? 116.0 * std::cbrt(yr) - 16.0 : kappa * yr;
  const double d = X + 15.0 * Y + 3.0 * Z;
  if (d <= 0.0) {
    u = 0.0;
    v = 0.0;
    return;
  }
  u = 13.0 * L * (4.0 * X / d - un);
  v = 13.0 * L * (9.0 * Y / d - vn);
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) {
    h = 0.0;
    return;
  }
  double deg;
  if (mx == r)
    deg = 60.0 * std::fmod((g - b) / delta, 6.0);
  else if (mx == g)
    deg = 60.0 * ((b - r) / delta + 2.0);
  else
    deg = 60.0 * ((r - g) / delta + 4.0);
  if (deg < 0.0) deg += 360.0;
  h = deg;
}

}  // namespace

RasterImage to_color_space(const RasterImage& img, ColorSpace space) {
  if (img.channels() == 1) {
    if (space == ColorSpace::RGB) return img;
    throw ArgumentError("color conversion to " + std::string(to_string(space)) +
                        " needs a 3-channel image");
  }
  if (img.channels() != 3) throw ArgumentError("color conversion needs a 3-channel image");
  if (space == ColorSpace::RGB) return img;
  RasterImage out(img.width(), img.height(), 3);
  const auto R = img.plane(0), G = img.plane(1), B = img.plane(2);
  auto o0 = out.plane(0), o1 = out.plane(1), o2 = out.plane(2);
  for (std::size_t i = 0; i < img.plane_size(); ++i) {
    double a, b, c;
    if (space == ColorSpace::LUV) {
      rgb_to_luv(R[i], G[i], B[i], a, b, c);
      o0[i] = a / 100.0;
      o1[i] = (b + 134.0) / 354.0;
      o2[i] = (c + 140.0) / 262.0;
    } else {
      rgb_to_hsv(R[i], G[i], B[i], a, b, c);
      o0[i] = a / 360.0;
      o1[i] = b;
      o2[i] = c;
    }
  }
  return out;
}

GradientPair gradients(const RasterImage& channel) {
  if (channel.channels() != 1) throw ArgumentError("gradients need a single-channel raster");
  const int w = channel.width(), h = channel.height();
  GradientPair g{RasterImage(w, h, 1), RasterImage(w, h, 1)};
  for (int y = 0; y < h; ++y) {
    const int ym = clamp_index(y - 1, h), yp = clamp_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = clamp_index(x - 1, w), xp = clamp_index(x + 1, w);
      g.dx.at(0, x, y) = (channel.at(0, xp, y) - channel.at(0, xm, y)) / 2.0;
      g.dy.at(0, x, y) = (channel.at(0, x, yp) - channel.at(0, x, ym)) / 2.0;
    }
  }
  return g;
}

std::vector<double> binomial_taps(int radius) {
  if (radius < 0) throw ArgumentError("filter radius must be non-negative");
  std::vector<double> taps{1.0};
  for (int i = 0; i < 2 * radius; ++i) {
    std::vector<double> next(taps.size() + 1, 0.0);
    for (std::size_t k = 0; k < taps.size(); ++k) {
      next[k] += taps[k];
      next[k + 1] += taps[k];
    }
    taps = std::move(next);
  }
  return taps;
}

std::vector<double> triangle_taps(int radius) {
  if (radius < 0) throw ArgumentError("filter radius must be non-negative");
  std::vector<double> taps;
  for (int i = -radius; i <= radius; ++i) taps.push_back(radius + 1 - std::abs(i));
  return taps;
}

namespace {

// out(p) = in(p) + sum_t k_t (in(p - t) - in(p)) / K. Mathematically the plain
// normalised convolution; written this way constants come out bit-exact.
void filter_line(const double* in, double* out, int n, std::ptrdiff_t stride,
                 std::span<const double> taps, double norm) {
  const int r = static_cast<int>(taps.size() / 2);
  for (int i = 0; i < n; ++i) {
    const double centre = in[i * stride];
    double acc = 0.0;
    for (int t = -r; t <= r; ++t) {
      const double v = in[static_cast<std::ptrdiff_t>(reflect_index(i + t, n)) * stride];
      acc += taps[static_cast<std::size_t>(t + r)] * (v - centre);
    }
    out[i * stride] = centre + acc / norm;
  }
}

}  // namespace

RasterImage separable_filter(const RasterImage& img, std::span<const double> taps) {
  if (taps.size() <= 1) return img;
  double norm = 0.0;
  for (double t : taps) norm += t;
  const int w = img.width(), h = img.height();
  RasterImage tmp(w, h, img.channels());
  RasterImage out(w, h, img.channels());
  std::vector<double> line(static_cast<std::size_t>(std::max(w, h)));
  for (int c = 0; c < img.channels(); ++c) {
    const auto src = img.plane(c);
    auto mid = tmp.plane(c);
    auto dst = out.plane(c);
    for (int y = 0; y < h; ++y)
      filter_line(src.data() + static_cast<std::size_t>(y) * w,
                  mid.data() + static_cast<std::size_t>(y) * w, w, 1, taps, norm);
    for (int x = 0; x < w; ++x)
      filter_line(mid.data() + x, dst.data() + x, h, w, taps, norm);
  }
  return out;
}

RasterImage smooth(const RasterImage& img, int radius) {
  if (radius < 0) throw ArgumentError("smoothing radius must be non-negative");
  if (radius == 0) return img;
  const auto taps = binomial_taps(radius);
  return separable_filter(img, taps);
}

RasterImage triangle_smooth(const RasterImage& img, int radius) {
  if (radius < 0) throw ArgumentError("smoothing radius must be non-negative");
  if (radius == 0) return img;
  const auto taps = triangle_taps(radius);
  return separable_filter(img, taps);
}

RasterImage extract_channel(const RasterImage& img, int c) {
  if (c < 0 || c >= img.channels()) throw ArgumentError("channel index out of range");
  const auto p = img.plane(c);
  return RasterImage(img.width(), img.height(), 1, std::vector<double>(p.begin(), p.end()));
}

RasterImage flip_horizontal(const RasterImage& img) {
  RasterImage out(img.width(), img.height(), img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.at(c, img.width() - 1 - x, y) = img.at(c, x, y);
  return out;
}

RasterImage rotate90(const RasterImage& img, int quarter_turns) {
  int q = ((quarter_turns % 4) + 4) % 4;
  if (q == 0) return img;
  RasterImage cur = img;
  for (; q > 0; --q) {
    const int w = cur.width(), h = cur.height();
    RasterImage next(h, w, cur.channels());
    for (int c = 0; c < cur.channels(); ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) next.at(c, h - 1 - y, x) = cur.at(c, x, y);
    cur = std::move(next);
  }
  return cur;
}

RasterImage rotate_bilinear(const RasterImage& img, double degrees, double background) {
  const int w = img.width(), h = img.height();
  const double a = degrees * std::numbers::pi / 180.0;
  const double ca = std::cos(a), sa = std::sin(a);
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  RasterImage out(w, h, img.channels(), background);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse rotation of the destination pixel.
      const double dx = x - cx, dy = y - cy;
      const double sx = ca * dx + sa * dy + cx;
      const double sy = -sa * dx + ca * dy + cy;
      if (sx < 0.0 || sy < 0.0 || sx > w - 1 || sy > h - 1) continue;
      const int x0 = std::min(static_cast<int>(std::floor(sx)), w - 1);
      const int y0 = std::min(static_cast<int>(std::floor(sy)), h - 1);
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double tx = sx - x0, ty = sy - y0;
      for (int c = 0; c < img.channels(); ++c) {
        const double top = lerp(img.at(c, x0, y0), img.at(c, x1, y0), tx);
        const double bot = lerp(img.at(c, x0, y1), img.at(c, x1, y1), tx);
        out.at(c, x, y) = lerp(top, bot, ty);
      }
    }
  }
  return out;
}

RasterImage crop(const RasterImage& img, int x0, int y0, int width, int height) {
  RasterImage out(width, height, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < height; ++y) {
      const int sy = clamp_index(y0 + y, img.height());
      for (int x = 0; x < width; ++x) out.at(c, x, y) = img.at(c, clamp_index(x0 + x, img.width()), sy);
    }
  return out;
}

double plane_sum(std::span<const double> plane) {
  // Neumaier summation; conservation checks compare sums at 1e-9 relative.
  double sum = 0.0, comp = 0.0;
  for (double v : plane) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace orsim
