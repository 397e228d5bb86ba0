#include "orsim/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "orsim/errors.hpp"

namespace orsim {

ShapeKind parse_shape_kind(std::string_view name) {
  if (name == "plane") return ShapeKind::Plane;
  if (name == "car") return ShapeKind::Car;
  if (name == "blob") return ShapeKind::Blob;
  throw ArgumentError("unknown shape '" + std::string(name) + "' (plane, car, blob)");
}

std::string_view to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::Plane: return "plane";
    case ShapeKind::Car: return "car";
    case ShapeKind::Blob: return "blob";
  }
  return "?";
}

void SynthSpec::validate() const {
  if (count < 0) throw ArgumentError("synth count must be >= 0");
  if (width < 16 || height < 16) throw ArgumentError("synth images must be at least 16x16");
  if (objects_min < 0 || objects_max < objects_min) throw ArgumentError("bad object count range");
  if (!(size_min > 2.0) || size_max < size_min) throw ArgumentError("bad object size range");
  if (size_max > std::min(width, height) - 4) throw ArgumentError("objects larger than the image");
  if (rotation_max < rotation_min) throw ArgumentError("bad rotation range");
  if (!(noise >= 0.0)) throw ArgumentError("noise must be >= 0");
  if (distractors < 0) throw ArgumentError("distractor count must be >= 0");
}

namespace {

// Own transforms over the raw engine so output does not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(g_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() {
    const double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::uint64_t next() { return g_(); }

 private:
  std::mt19937_64 g_;
};

using Pt = std::array<double, 2>;

// One piece of a shape in unit-length object coordinates (u along the
// object's long axis, v across). tone 0 is the body colour, tone 1 the detail.
struct Prim {
  bool ellipse = false;
  double cu = 0, cv = 0, a = 0, b = 0;
  std::vector<Pt> poly;
  int tone = 0;
};

Prim ellipse(double cu, double cv, double a, double b, int tone = 0) { return {true, cu, cv, a, b, {}, tone}; }
Prim polygon(std::vector<Pt> pts, int tone = 0) { return {false, 0, 0, 0, 0, std::move(pts), tone}; }

std::vector<Prim> mirrored_pair(const std::vector<Pt>& half) {
  std::vector<Pt> other;
  for (const auto& p : half) other.push_back({p[0], -p[1]});
  return {polygon(half), polygon(other)};
}

std::vector<Prim> shape_model(ShapeKind k) {
  std::vector<Prim> s;
  switch (k) {
    case ShapeKind::Plane: {
      s.push_back(ellipse(0.0, 0.0, 0.5, 0.065));
      for (auto& p : mirrored_pair({{0.12, 0.04}, {-0.10, 0.48}, {-0.20, 0.48}, {-0.12, 0.04}})) s.push_back(p);
      for (auto& p : mirrored_pair({{-0.36, 0.02}, {-0.46, 0.18}, {-0.50, 0.18}, {-0.47, 0.02}})) s.push_back(p);
      break;
    }
    case ShapeKind::Car: {
      const double hl = 0.5, hw = 0.22, c = 0.06;
      s.push_back(polygon({{hl - c, -hw}, {hl, -hw + c}, {hl, hw - c}, {hl - c, hw}, {-hl + c, hw}, {-hl, hw - c},
                           {-hl, -hw + c}, {-hl + c, -hw}}));
      s.push_back(polygon({{0.22, -0.18}, {0.22, 0.18}, {0.08, 0.16}, {0.08, -0.16}}, 1));
      s.push_back(polygon({{-0.27, -0.17}, {-0.27, 0.17}, {-0.36, 0.16}, {-0.36, -0.16}}, 1));
      break;
    }
    case ShapeKind::Blob: s.push_back(ellipse(0.0, 0.0, 0.5, 0.3)); break;
  }
  return s;
}

struct Placed {
  std::vector<Prim> prims;
  double cx, cy, length, angle;  // angle in radians
  std::array<double, 3> body, detail;
};

bool inside(const Prim& p, double u, double v) {
  if (p.ellipse) {
    const double du = (u - p.cu) / p.a, dv = (v - p.cv) / p.b;
    return du * du + dv * dv <= 1.0;
  }
  bool in = false;
  const std::size_t n = p.poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Pt& a = p.poly[i];
    const Pt& b = p.poly[j];
    if ((a[1] > v) != (b[1] > v) && u < (b[0] - a[0]) * (v - a[1]) / (b[1] - a[1]) + a[0]) in = !in;
  }
  return in;
}

Box tight_box(const Placed& o) {
  const double c = std::cos(o.angle), s = std::sin(o.angle), L = o.length;
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  auto take = [&](double x, double y) {
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  };
  for (const auto& p : o.prims) {
    if (p.ellipse) {
      const double ex = L * std::hypot(p.a * c, p.b * s), ey = L * std::hypot(p.a * s, p.b * c);
      const double mx = o.cx + L * (p.cu * c - p.cv * s), my = o.cy + L * (p.cu * s + p.cv * c);
      take(mx - ex, my - ey);
      take(mx + ex, my + ey);
    } else {
      for (const auto& q : p.poly) take(o.cx + L * (q[0] * c - q[1] * s), o.cy + L * (q[0] * s + q[1] * c));
    }
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

// Anti-aliased paint with 4x4 subsamples per pixel; pixel (x, y) spans
// [x, x+1) x [y, y+1).
void paint(RasterImage& img, const Placed& o) {
  constexpr int kSub = 4;
  const Box b = tight_box(o);
  const int xa = std::max(0, static_cast<int>(std::floor(b.x)) - 1);
  const int ya = std::max(0, static_cast<int>(std::floor(b.y)) - 1);
  const int xb = std::min(img.width() - 1, static_cast<int>(std::ceil(b.x + b.w)) + 1);
  const int yb = std::min(img.height() - 1, static_cast<int>(std::ceil(b.y + b.h)) + 1);
  const double c = std::cos(o.angle), s = std::sin(o.angle);
  for (int y = ya; y <= yb; ++y)
    for (int x = xa; x <= xb; ++x) {
      int body = 0, detail = 0;
      for (int sy = 0; sy < kSub; ++sy)
        for (int sx = 0; sx < kSub; ++sx) {
          const double dx = x + (sx + 0.5) / kSub - o.cx, dy = y + (sy + 0.5) / kSub - o.cy;
          const double u = (dx * c + dy * s) / o.length, v = (-dx * s + dy * c) / o.length;
          bool in_body = false, in_detail = false;
          for (const auto& p : o.prims) {
            if (!inside(p, u, v)) continue;
            (p.tone == 0 ? in_body : in_detail) = true;
          }
          if (in_detail) ++detail;
          else if (in_body) ++body;
        }
      if (body + detail == 0) continue;
      const double ab = static_cast<double>(body) / (kSub * kSub), ad = static_cast<double>(detail) / (kSub * kSub);
      for (int ch = 0; ch < 3; ++ch) {
        double& px = img.at(ch, x, y);
        px = px * (1.0 - ab - ad) + o.body[static_cast<std::size_t>(ch)] * ab + o.detail[static_cast<std::size_t>(ch)] * ad;
      }
    }
}

std::array<double, 3> body_colour(ShapeKind k, Rng& rng) {
  switch (k) {
    case ShapeKind::Plane: {
      const double g = rng.uniform(0.6, 0.95);
      return {g, g, g * rng.uniform(0.97, 1.03)};
    }
    case ShapeKind::Car: {
      static constexpr std::array<std::array<double, 3>, 5> kPalette{
          {{0.75, 0.15, 0.12}, {0.15, 0.25, 0.65}, {0.88, 0.88, 0.86}, {0.12, 0.12, 0.13}, {0.62, 0.63, 0.66}}};
      return kPalette[static_cast<std::size_t>(rng.integer(0, 4))];
    }
    case ShapeKind::Blob: {
      const double g = rng.uniform(0.7, 0.9);
      return {g, g * 0.95, g * 0.6};
    }
  }
  return {1, 1, 1};
}

}  // namespace

std::vector<double> pink_noise(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(static_cast<std::size_t>(width) * height, 0.0);
  const int top = std::max(width, height);
  for (int cell = 2; cell <= top; cell *= 2) {
    const int gw = width / cell + 2, gh = height / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (double& g : grid) g = rng.normal();
    const double amp = static_cast<double>(cell);
    for (int y = 0; y < height; ++y) {
      const double fy = static_cast<double>(y) / cell;
      const int iy = static_cast<int>(fy);
      const double ty = fy - iy;
      for (int x = 0; x < width; ++x) {
        const double fx = static_cast<double>(x) / cell;
        const int ix = static_cast<int>(fx);
        const double tx = fx - ix;
        auto g = [&](int gx, int gy) { return grid[static_cast<std::size_t>(gy) * gw + gx]; };
        const double top_row = g(ix, iy) + tx * (g(ix + 1, iy) - g(ix, iy));
        const double bot_row = g(ix, iy + 1) + tx * (g(ix + 1, iy + 1) - g(ix, iy + 1));
        out[static_cast<std::size_t>(y) * width + x] += amp * (top_row + ty * (bot_row - top_row));
      }
    }
  }
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  for (double& v : out) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return out;
}

SynthCorpus synth_corpus(const SynthSpec& spec) {
  spec.validate();
  SynthCorpus corpus;
  Rng master(spec.seed);
  for (int n = 0; n < spec.count; ++n) {
    Rng rng(master.next());
    char id[64];
    std::snprintf(id, sizeof id, "%s%04d", spec.id_prefix.c_str(), n);
    const int W = spec.width, H = spec.height;

    RasterImage img(W, H, 3);
    const std::array<double, 3> ground{rng.uniform(0.30, 0.45), rng.uniform(0.32, 0.47), rng.uniform(0.28, 0.40)};
    const std::vector<double> tex = pink_noise(W, H, rng.next());
    const std::vector<double> grain = pink_noise(W, H, rng.next());
    for (int c = 0; c < 3; ++c) {
      auto p = img.plane(c);
      for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = ground[static_cast<std::size_t>(c)] + 0.06 * tex[i] * (1.0 - 0.05 * c) + 0.015 * grain[i];
    }

    std::vector<Placed> objects;
    std::vector<Box> taken;
    const int n_obj = rng.integer(spec.objects_min, spec.objects_max);
    for (int k = 0; k < n_obj; ++k) {
      for (int attempt = 0; attempt < 100; ++attempt) {
        Placed o;
        o.prims = shape_model(spec.shape);
        o.length = rng.uniform(spec.size_min, spec.size_max);
        o.angle = rng.uniform(spec.rotation_min, spec.rotation_max) * std::numbers::pi / 180.0;
        o.cx = rng.uniform(0.0, W);
        o.cy = rng.uniform(0.0, H);
        o.body = body_colour(spec.shape, rng);
        o.detail = {0.12, 0.13, 0.16};
        const Box b = tight_box(o);
        if (b.x < 2 || b.y < 2 || b.x + b.w > W - 2 || b.y + b.h > H - 2) continue;
        const Box grown{b.x - 4, b.y - 4, b.w + 8, b.h + 8};
        if (std::any_of(taken.begin(), taken.end(), [&](const Box& t) { return intersection(grown, t) > 0.0; }))
          continue;
        taken.push_back(b);
        objects.push_back(std::move(o));
        break;
      }
    }

    // Clutter kept off the objects: buildings, trees, and bright bars,
    // ellipses and crosses that look like plane parts.
    const double ref = 0.5 * (spec.size_min + spec.size_max);
    for (int k = 0; k < spec.distractors; ++k) {
      for (int attempt = 0; attempt < 50; ++attempt) {
        Placed d;
        const double kind = rng.uniform();
        const double bright = rng.uniform(0.6, 0.95);
        if (kind < 0.35) {
          const double aspect = rng.uniform(0.5, 1.0);
          d.prims = {polygon({{0.5, -0.5 * aspect}, {0.5, 0.5 * aspect}, {-0.5, 0.5 * aspect}, {-0.5, -0.5 * aspect}})};
          d.length = ref * rng.uniform(0.5, 1.2);
          const double g = rng.uniform(0.3, 0.9);
          d.body = {g, g * rng.uniform(0.9, 1.05), g * rng.uniform(0.85, 1.05)};
        } else if (kind < 0.55) {
          d.prims = {ellipse(0.0, 0.0, 0.5, rng.uniform(0.3, 0.5))};
          d.length = ref * rng.uniform(0.2, 0.5);
          const double g = rng.uniform(0.08, 0.25);
          d.body = {g * 0.8, g, g * 0.7};
        } else if (kind < 0.75) {
          const double hw = rng.uniform(0.04, 0.08);
          d.prims = {polygon({{0.5, -hw}, {0.5, hw}, {-0.5, hw}, {-0.5, -hw}})};
          d.length = ref * rng.uniform(0.6, 1.1);
          d.body = {bright, bright, bright};
        } else if (kind < 0.9) {
          d.prims = {ellipse(0.0, 0.0, 0.5, rng.uniform(0.08, 0.14))};
          d.length = ref * rng.uniform(0.6, 1.0);
          d.body = {bright, bright, bright};
        } else {
          const double hw = rng.uniform(0.04, 0.07);
          d.prims = {polygon({{0.5, -hw}, {0.5, hw}, {-0.5, hw}, {-0.5, -hw}}),
                     polygon({{hw, -0.5}, {hw, 0.5}, {-hw, 0.5}, {-hw, -0.5}})};
          d.length = ref * rng.uniform(0.6, 1.0);
          d.body = {bright, bright, bright};
        }
        d.angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        d.cx = rng.uniform(0.0, W);
        d.cy = rng.uniform(0.0, H);
        d.detail = d.body;
        const Box b = tight_box(d);
        if (std::any_of(taken.begin(), taken.end(), [&](const Box& t) { return intersection(b, t) > 0.0; })) continue;
        paint(img, d);
        break;
      }
    }
    for (const auto& o : objects) {
      paint(img, o);
      const Box b = tight_box(o);
      corpus.truths.push_back({id, b.x, b.y, b.w, b.h, std::string(to_string(spec.shape))});
    }
    if (spec.noise > 0.0)
      for (double& v : img.data()) v += spec.noise * rng.normal();
    for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
    corpus.ids.push_back(id);
    corpus.images.push_back(std::move(img));
  }
  return corpus;
}

}  // namespace orsim
