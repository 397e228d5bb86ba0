#include "orsim/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "orsim/errors.hpp"

namespace orsim {

namespace {

bool parse_double(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0' && std::isfinite(out);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<AnnotatedBox> parse_annotations(std::istream& in) {
  std::vector<AnnotatedBox> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    std::vector<std::string> tok;
    for (std::string w; ss >> w;) tok.push_back(w);
    if (tok.size() != 6) throw ParseError("expected `image_id x y w h label`, got " + std::to_string(tok.size()) + " fields", lineno);
    AnnotatedBox b;
    b.image_id = tok[0];
    if (!parse_double(tok[1], b.x) || !parse_double(tok[2], b.y) || !parse_double(tok[3], b.w) ||
        !parse_double(tok[4], b.h))
      throw ParseError("box coordinates must be numbers", lineno);
    if (!(b.w > 0.0) || !(b.h > 0.0)) throw ParseError("box width and height must be positive", lineno);
    b.label = tok[5];
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<AnnotatedBox> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotations " + path.string());
  return parse_annotations(in);
}

void save_annotations(const std::filesystem::path& path, const std::vector<AnnotatedBox>& boxes,
                      const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& h : header) out << "# " << h << '\n';
  char buf[128];
  for (const auto& b : boxes) {
    std::snprintf(buf, sizeof buf, " %.2f %.2f %.2f %.2f ", b.x, b.y, b.w, b.h);
    out << b.image_id << buf << b.label << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void sort_records(std::vector<DetectionRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const DetectionRecord& a, const DetectionRecord& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    if (a.score != b.score) return a.score > b.score;
    if (a.box.x != b.box.x) return a.box.x < b.box.x;
    return a.box.y < b.box.y;
  });
}

void save_detections(const std::filesystem::path& path, std::vector<DetectionRecord> records,
                     const std::vector<std::string>& header) {
  sort_records(records);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& h : header) out << "# " << h << '\n';
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, " %.2f %.2f %.2f %.2f %.4f", r.box.x, r.box.y, r.box.w, r.box.h, r.score);
    out << r.image_id << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open detections " + path.string());
  std::vector<DetectionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    std::vector<std::string> tok;
    for (std::string w; ss >> w;) tok.push_back(w);
    if (tok.size() != 6) throw ParseError("expected `image_id x y w h score`", lineno);
    DetectionRecord r;
    r.image_id = tok[0];
    if (!parse_double(tok[1], r.box.x) || !parse_double(tok[2], r.box.y) || !parse_double(tok[3], r.box.w) ||
        !parse_double(tok[4], r.box.h) || !parse_double(tok[5], r.score))
      throw ParseError("detection fields must be numbers", lineno);
    if (!(r.box.w > 0.0) || !(r.box.h > 0.0)) throw ParseError("box width and height must be positive", lineno);
    out.push_back(std::move(r));
  }
  return out;
}

MatchResult match_detections(const std::vector<ScoredBox>& dets, const std::vector<Box>& truths,
                             double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) throw ArgumentError("IoU threshold must lie in (0, 1)");
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const ScoredBox& p = dets[a];
    const ScoredBox& q = dets[b];
    if (p.score != q.score) return p.score > q.score;
    if (p.box.x != q.box.x) return p.box.x < q.box.x;
    return p.box.y < q.box.y;
  });
  MatchResult m{std::vector<bool>(dets.size(), false), std::vector<bool>(truths.size(), false)};
  for (std::size_t d : order) {
    double best = -1.0;
    std::size_t best_t = truths.size();
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (m.truth_matched[t]) continue;
      const double o = iou(dets[d].box, truths[t]);
      if (o > best) {
        best = o;
        best_t = t;
      }
    }
    if (best_t < truths.size() && best > iou_threshold) {
      m.tp[d] = true;
      m.truth_matched[best_t] = true;
    }
  }
  return m;
}

PRCurve pr_metrics(const std::vector<ScoredFlag>& flags, std::size_t n_truths) {
  if (n_truths == 0) throw ArgumentError("pr_metrics needs at least one ground-truth box");
  PRCurve c;
  c.n_truths = n_truths;
  if (flags.empty()) {
    c.no_detections = true;
    return c;
  }
  std::vector<ScoredFlag> f = flags;
  std::stable_sort(f.begin(), f.end(), [](const ScoredFlag& a, const ScoredFlag& b) { return a.score > b.score; });
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    (f[i].tp ? tp : fp) += 1;
    if (i + 1 < f.size() && f[i + 1].score == f[i].score) continue;
    c.points.push_back({f[i].score, static_cast<double>(tp) / static_cast<double>(n_truths),
                        static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  // Envelope from the high-recall end, then sum precision over recall steps.
  std::vector<double> env(c.points.size());
  double run = 0.0;
  for (std::size_t i = c.points.size(); i-- > 0;) {
    run = std::max(run, c.points[i].precision);
    env[i] = run;
  }
  double prev_r = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    c.ap += (c.points[i].recall - prev_r) * env[i];
    prev_r = c.points[i].recall;
  }
  double best_f1 = -1.0;
  for (const auto& p : c.points) {
    const double f1 = p.precision + p.recall > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    if (f1 > best_f1) {
      best_f1 = f1;
      c.af = f1;
      c.ar = p.recall;
      c.best_threshold = p.threshold;
    }
  }
  return c;
}

PRCurve evaluate(const std::vector<DetectionRecord>& dets, const std::vector<AnnotatedBox>& truths,
                 double iou_threshold) {
  std::map<std::string, std::pair<std::vector<ScoredBox>, std::vector<Box>>> per_image;
  for (const auto& d : dets) per_image[d.image_id].first.push_back({d.box, d.score});
  for (const auto& t : truths) per_image[t.image_id].second.push_back(t.box());
  std::vector<ScoredFlag> flags;
  for (const auto& [id, pair] : per_image) {
    const MatchResult m = match_detections(pair.first, pair.second, iou_threshold);
    for (std::size_t i = 0; i < pair.first.size(); ++i) flags.push_back({pair.first[i].score, m.tp[i]});
  }
  return pr_metrics(flags, truths.size());
}

void write_pr_csv(const std::filesystem::path& path, const PRCurve& curve, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& h : header) out << "# " << h << '\n';
  char buf[128];
  out << "threshold,recall,precision\n";
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.4f,%.6f,%.6f\n", p.threshold, p.recall, p.precision);
    out << buf;
  }
  out << "AP,AR,AF\n";
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", curve.ap, curve.ar, curve.af);
  out << buf;
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<RasterImage> mirror_augment(const std::vector<RasterImage>& windows) {
  std::vector<RasterImage> out = windows;
  out.reserve(windows.size() * 2);
  for (const auto& w : windows) out.push_back(flip_horizontal(w));
  return out;
}

std::vector<Fold> kfold_split(std::size_t n_items, int k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("k-fold needs k >= 2");
  if (n_items < static_cast<std::size_t>(k)) throw ArgumentError("fewer items than folds");
  std::vector<std::size_t> perm(n_items);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n_items; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t p = 0; p < n_items; ++p) {
    const std::size_t f = p % static_cast<std::size_t>(k);
    for (std::size_t g = 0; g < folds.size(); ++g) (g == f ? folds[g].test : folds[g].train).push_back(perm[p]);
  }
  for (auto& f : folds) {
    std::sort(f.train.begin(), f.train.end());
    std::sort(f.test.begin(), f.test.end());
  }
  return folds;
}

}  // namespace orsim
