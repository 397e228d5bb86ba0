#include "orsim/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "orsim/errors.hpp"

namespace orsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_real(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') throw ConfigError("`" + v + "` is not a number");
  return d;
}

long long to_int(const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') throw ConfigError("`" + v + "` is not an integer");
  return i;
}

std::uint64_t to_u64(const std::string& v) {
  char* end = nullptr;
  if (v.empty() || v[0] == '-') throw ConfigError("`" + v + "` is not a non-negative integer");
  const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
  if (*end != '\0') throw ConfigError("`" + v + "` is not a non-negative integer");
  return i;
}

bool to_bool(const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("`" + v + "` is not on/off");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty item in list `" + v + "`");
    out.push_back(item);
  }
  return out;
}

struct Key {
  const char* name;
  bool tunable;  // part of the canonical form
  std::function<void(RunConfig&, const std::string&, const std::filesystem::path&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename F>
Key path_key(const char* name, F member) {
  return {name, false,
          [member](RunConfig& c, const std::string& v, const std::filesystem::path& base) {
            std::filesystem::path p(v);
            c.*member = p.is_relative() && !base.empty() ? base / p : p;
          },
          [member](const RunConfig& c) { return (c.*member).string(); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"color", true, [](RunConfig& c, const std::string& v, auto&) {
         try {
           c.channels.color = parse_color_space(v);
         } catch (const Error& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return std::string(to_string(c.channels.color)); }},
      {"families", true,
       [](RunConfig& c, const std::string& v, auto&) {
         c.channels.use_color = c.channels.use_gradient = c.channels.use_frequency = false;
         for (const auto& f : split_list(v)) {
           if (f == "color")
             c.channels.use_color = true;
           else if (f == "gradient")
             c.channels.use_gradient = true;
           else if (f == "frequency")
             c.channels.use_frequency = true;
           else
             throw ConfigError("unknown channel family `" + f + "`");
         }
       },
       [](const RunConfig& c) {
         std::vector<std::string> f;
         if (c.channels.use_color) f.push_back("color");
         if (c.channels.use_gradient) f.push_back("gradient");
         if (c.channels.use_frequency) f.push_back("frequency");
         std::string s;
         for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + f[i];
         return s;
       }},
      {"frequency_families", true,
       [](RunConfig& c, const std::string& v, auto&) {
         auto& f = c.channels.frequency;
         f.use_f1 = f.use_f2 = f.use_f3 = false;
         for (const auto& x : split_list(v)) {
           if (x == "F1")
             f.use_f1 = true;
           else if (x == "F2")
             f.use_f2 = true;
           else if (x == "F3")
             f.use_f3 = true;
           else
             throw ConfigError("unknown frequency family `" + x + "`");
         }
       },
       [](const RunConfig& c) {
         const auto& f = c.channels.frequency;
         std::string s;
         for (auto [on, name] : {std::pair{f.use_f1, "F1"}, {f.use_f2, "F2"}, {f.use_f3, "F3"}})
           if (on) s += (s.empty() ? "" : ",") + std::string(name);
         return s;
       }},
      {"sigma", true,
       [](RunConfig& c, const std::string& v, auto&) {
         const long long s = to_int(v);
         const int m = c.channels.frequency.max_order;
         const double floor = c.channels.frequency.f3_floor;
         const auto fams = std::tuple{c.channels.frequency.use_f1, c.channels.frequency.use_f2, c.channels.frequency.use_f3};
         c.channels.frequency = FrequencyFeatureConfig::standard(static_cast<double>(s), m);
         c.channels.frequency.f3_floor = floor;
         std::tie(c.channels.frequency.use_f1, c.channels.frequency.use_f2, c.channels.frequency.use_f3) = fams;
       },
       [](const RunConfig& c) { return fmt(c.channels.frequency.sigma); }},
      {"max_order", true,
       [](RunConfig& c, const std::string& v, auto&) { c.channels.frequency.max_order = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.channels.frequency.max_order); }},
      {"f3_floor", true, [](RunConfig& c, const std::string& v, auto&) { c.channels.frequency.f3_floor = to_real(v); },
       [](const RunConfig& c) { return fmt(c.channels.frequency.f3_floor); }},
      {"shrink", true,
       [](RunConfig& c, const std::string& v, auto&) {
         c.channels.shrink = static_cast<int>(to_int(v));
         c.window.shrink = c.channels.shrink;
       },
       [](const RunConfig& c) { return std::to_string(c.channels.shrink); }},
      {"pre_smooth", true, [](RunConfig& c, const std::string& v, auto&) { c.channels.pre_smooth = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.channels.pre_smooth); }},
      {"post_smooth", true, [](RunConfig& c, const std::string& v, auto&) { c.channels.post_smooth = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.channels.post_smooth); }},
      {"region_radius", true,
       [](RunConfig& c, const std::string& v, auto&) { c.channels.region_radius = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.channels.region_radius); }},
      {"window_width", true, [](RunConfig& c, const std::string& v, auto&) { c.window.width = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.window.width); }},
      {"window_height", true, [](RunConfig& c, const std::string& v, auto&) { c.window.height = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.window.height); }},
      {"n_per_oct", true, [](RunConfig& c, const std::string& v, auto&) { c.n_per_oct = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.n_per_oct); }},
      {"octaves_up", true, [](RunConfig& c, const std::string& v, auto&) { c.octaves_up = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.octaves_up); }},
      {"calibration_octaves", true,
       [](RunConfig& c, const std::string& v, auto&) { c.calibration_octaves = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.calibration_octaves); }},
      {"calibration_per_octave", true,
       [](RunConfig& c, const std::string& v, auto&) { c.calibration_per_octave = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.calibration_per_octave); }},
      {"schedule", true,
       [](RunConfig& c, const std::string& v, auto&) {
         c.schedule.clear();
         for (const auto& x : split_list(v)) c.schedule.push_back(static_cast<int>(to_int(x)));
       },
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.schedule.size(); ++i) s += (i ? "," : "") + std::to_string(c.schedule[i]);
         return s;
       }},
      {"random_negatives", true,
       [](RunConfig& c, const std::string& v, auto&) { c.random_negatives = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.random_negatives); }},
      {"hard_negative_cap", true,
       [](RunConfig& c, const std::string& v, auto&) { c.hard_negative_cap = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.hard_negative_cap); }},
      {"cascade_margin", true, [](RunConfig& c, const std::string& v, auto&) { c.cascade_margin = to_real(v); },
       [](const RunConfig& c) { return fmt(c.cascade_margin); }},
      {"mirror", true, [](RunConfig& c, const std::string& v, auto&) { c.mirror = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.mirror ? "on" : "off"); }},
      {"positive_sources", true,
       [](RunConfig& c, const std::string& v, auto&) { c.positive_sources = split_list(v); },
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.positive_sources.size(); ++i) s += (i ? "," : "") + c.positive_sources[i];
         return s;
       }},
      {"stride", true, [](RunConfig& c, const std::string& v, auto&) { c.stride = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.stride); }},
      {"score_threshold", true, [](RunConfig& c, const std::string& v, auto&) { c.score_threshold = to_real(v); },
       [](const RunConfig& c) { return fmt(c.score_threshold); }},
      {"nms_overlap", true, [](RunConfig& c, const std::string& v, auto&) { c.nms_overlap = to_real(v); },
       [](const RunConfig& c) { return fmt(c.nms_overlap); }},
      {"nms_containment", true, [](RunConfig& c, const std::string& v, auto&) { c.nms_containment = to_real(v); },
       [](const RunConfig& c) { return fmt(c.nms_containment); }},
      {"two_step_nms", true, [](RunConfig& c, const std::string& v, auto&) { c.two_step_nms = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.two_step_nms ? "on" : "off"); }},
      {"iou_threshold", true, [](RunConfig& c, const std::string& v, auto&) { c.iou_threshold = to_real(v); },
       [](const RunConfig& c) { return fmt(c.iou_threshold); }},
      {"seed", true, [](RunConfig& c, const std::string& v, auto&) { c.seed = to_u64(v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"threads", false, [](RunConfig& c, const std::string& v, auto&) { c.threads = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.threads); }},
      {"synth_shape", true,
       [](RunConfig& c, const std::string& v, auto&) {
         try {
           c.synth.shape = parse_shape_kind(v);
         } catch (const Error& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return std::string(to_string(c.synth.shape)); }},
      {"synth_count", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.count = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.count); }},
      {"synth_width", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.width = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.width); }},
      {"synth_height", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.height = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.height); }},
      {"synth_objects_min", true,
       [](RunConfig& c, const std::string& v, auto&) { c.synth.objects_min = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.objects_min); }},
      {"synth_objects_max", true,
       [](RunConfig& c, const std::string& v, auto&) { c.synth.objects_max = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.objects_max); }},
      {"synth_size_min", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.size_min = to_real(v); },
       [](const RunConfig& c) { return fmt(c.synth.size_min); }},
      {"synth_size_max", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.size_max = to_real(v); },
       [](const RunConfig& c) { return fmt(c.synth.size_max); }},
      {"synth_rotation_min", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.rotation_min = to_real(v); },
       [](const RunConfig& c) { return fmt(c.synth.rotation_min); }},
      {"synth_rotation_max", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.rotation_max = to_real(v); },
       [](const RunConfig& c) { return fmt(c.synth.rotation_max); }},
      {"synth_noise", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.noise = to_real(v); },
       [](const RunConfig& c) { return fmt(c.synth.noise); }},
      {"synth_distractors", true,
       [](RunConfig& c, const std::string& v, auto&) { c.synth.distractors = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.distractors); }},
      {"synth_prefix", true, [](RunConfig& c, const std::string& v, auto&) { c.synth.id_prefix = v; },
       [](const RunConfig& c) { return c.synth.id_prefix; }},
      path_key("calibration_images", &RunConfig::calibration_images),
      path_key("train_images", &RunConfig::train_images),
      path_key("train_annotations", &RunConfig::train_annotations),
      path_key("negative_images", &RunConfig::negative_images),
      path_key("lambda_table", &RunConfig::lambda_table),
      path_key("model", &RunConfig::model),
      path_key("test_images", &RunConfig::test_images),
      path_key("detections", &RunConfig::detections),
      path_key("annotations", &RunConfig::annotations),
      path_key("report", &RunConfig::report),
  };
  return k;
}

}  // namespace

RunConfig RunConfig::parse(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig c;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  // Keys are applied in table order so that sigma keeps max_order, f3_floor
  // and the frequency families whatever order the file lists them in.
  std::vector<std::pair<std::string, std::size_t>> values(keys().size());
  std::vector<bool> present(keys().size(), false);
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected `key = value`");
    const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": expected `key = value`");
    const auto it = std::find_if(keys().begin(), keys().end(), [&](const Key& k) { return key == k.name; });
    if (it == keys().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key `" + key + "`");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": repeated key `" + key + "`");
    const auto k = static_cast<std::size_t>(it - keys().begin());
    values[k] = {value, lineno};
    present[k] = true;
  }
  // sigma resets the frequency block, so it goes first.
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < keys().size(); ++k)
    if (std::string(keys()[k].name) == "sigma") order.insert(order.begin(), k);
    else order.push_back(k);
  for (std::size_t k : order) {
    if (!present[k]) continue;
    try {
      keys()[k].set(c, values[k].first, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(values[k].second) + ": " + keys()[k].name + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in, path.parent_path());
}

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  const auto& f = channels.frequency;
  need(f.sigma >= 3 && f.sigma <= 8 && f.sigma == std::floor(f.sigma), "sigma must be one of 3..8");
  need(f.max_order >= 2 && f.max_order <= 5, "max_order must be one of 2..5");
  need(f.f3_floor >= 0.0 && f.f3_floor <= 1.0, "f3_floor must lie in [0, 1]");
  need(channels.pre_smooth >= 0 && channels.pre_smooth <= 3, "pre_smooth must be one of 0..3");
  need(channels.post_smooth >= 0 && channels.post_smooth <= 3, "post_smooth must be one of 0..3");
  need(channels.region_radius >= 1 && channels.region_radius <= 16, "region_radius must be in 1..16");
  static const std::vector<std::pair<int, int>> kWindows = {{28, 24}, {32, 28}, {40, 36}, {44, 40}, {40, 40},
                                                            {56, 56}, {64, 64}, {72, 72}, {80, 80}, {88, 88}};
  need(std::find(kWindows.begin(), kWindows.end(), std::pair{window.width, window.height}) != kWindows.end(),
       "window must be one of 28x24, 32x28, 40x36, 44x40, 40x40, 56x56, 64x64, 72x72, 80x80, 88x88");
  need(window.shrink == channels.shrink, "window shrink differs from channel shrink");
  try {
    channels.validate();
    window.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  need(n_per_oct >= 1 && n_per_oct <= 16, "n_per_oct must be in 1..16");
  need(octaves_up >= 0 && octaves_up <= 2, "octaves_up must be in 0..2");
  need(calibration_octaves >= 1 && calibration_octaves <= 3, "calibration_octaves must be in 1..3");
  need(calibration_per_octave >= 2 && calibration_per_octave <= 8, "calibration_per_octave must be in 2..8");
  need(!schedule.empty(), "schedule must not be empty");
  for (std::size_t i = 0; i < schedule.size(); ++i)
    need(schedule[i] >= 1 && schedule[i] <= 4096 && (i == 0 || schedule[i] > schedule[i - 1]),
         "schedule must be increasing weak counts in 1..4096");
  need(random_negatives >= 1, "random_negatives must be >= 1");
  need(hard_negative_cap >= 0, "hard_negative_cap must be >= 0");
  need(cascade_margin >= 0.0, "cascade_margin must be >= 0");
  {
    const auto& ps = positive_sources;
    const bool crop_only = ps.size() == 1 && ps[0] == "crop";
    const bool pyramids = !ps.empty() && ps.size() <= 2 &&
                          std::all_of(ps.begin(), ps.end(), [](const auto& x) { return x == "fast" || x == "exact"; }) &&
                          (ps.size() == 1 || ps[0] != ps[1]);
    need(crop_only || pyramids, "positive_sources must be `crop` or a list of distinct `fast`, `exact`");
  }
  need(stride >= 1, "stride must be >= 1");
  need(std::isfinite(score_threshold), "score_threshold must be finite");
  need(nms_overlap > 0.0 && nms_overlap < 1.0, "nms_overlap must lie in (0, 1)");
  need(nms_containment > 0.0 && nms_containment <= 1.0, "nms_containment must lie in (0, 1]");
  need(iou_threshold > 0.0 && iou_threshold < 1.0, "iou_threshold must lie in (0, 1)");
  need(threads >= 1 && threads <= 256, "threads must be in 1..256");
  try {
    synth.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("synth: ") + e.what());
  }
}

std::string RunConfig::canonical() const {
  std::string s;
  for (const auto& k : keys())
    if (k.tunable) s += std::string(k.name) + " = " + k.get(*this) + "\n";
  return s;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

BoostedModel RunConfig::base_model(const LambdaTable& lambda) const {
  BoostedModel m;
  m.window = window;
  m.channels = channels;
  m.lambda = lambda;
  m.config_hash = hash();
  m.seed = seed;
  return m;
}

PyramidOptions RunConfig::pyramid_options() const {
  PyramidOptions p;
  p.n_per_oct = n_per_oct;
  p.octaves_up = octaves_up;
  p.threads = threads;
  return p;
}

DetectOptions RunConfig::detect_options() const {
  DetectOptions d;
  d.stride_cells = stride;
  d.score_threshold = score_threshold;
  d.pyramid = pyramid_options();
  return d;
}

PositiveSampling RunConfig::positive_sampling() const {
  PositiveSampling p;
  p.pyramids.clear();
  for (const auto& src : positive_sources) {
    if (src == "crop") continue;
    PyramidOptions o = pyramid_options();
    o.force_exact = src == "exact";
    p.pyramids.push_back(o);
  }
  p.mirror = mirror;
  p.threads = threads;
  return p;
}

TrainOptions RunConfig::train_options() const {
  TrainOptions t;
  t.schedule = schedule;
  t.random_negatives = random_negatives;
  t.hard_negative_cap = hard_negative_cap;
  t.cascade_margin = cascade_margin;
  t.score_threshold = score_threshold;
  t.mirror = mirror;
  t.mining = detect_options();
  t.seed = seed;
  t.threads = threads;
  return t;
}

}  // namespace orsim
