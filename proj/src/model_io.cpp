#include "orsim/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "orsim/errors.hpp"

namespace orsim {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // Tokens of the next non-empty line; ParseError at end of input.
  std::vector<std::string> next(const char* expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::istringstream ss(line);
      std::vector<std::string> tok;
      for (std::string w; ss >> w;) tok.push_back(w);
      if (!tok.empty()) return tok;
    }
    throw ParseError(std::string("unexpected end of model, expected ") + expected, line_ + 1);
  }

  std::vector<std::string> expect(const char* key, std::size_t n_values) {
    auto tok = next(key);
    if (tok[0] != key) throw ParseError(std::string("expected `") + key + "`, got `" + tok[0] + "`", line_);
    if (tok.size() != n_values + 1)
      throw ParseError(std::string("`") + key + "` takes " + std::to_string(n_values) + " values", line_);
    return tok;
  }

  double real(const std::string& s) const {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError("not a number: `" + s + "`", line_);
    return v;
  }

  float single(const std::string& s) const {
    char* end = nullptr;
    const float v = std::strtof(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError("not a number: `" + s + "`", line_);
    return v;
  }

  long long integer(const std::string& s) const {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw ParseError("not an integer: `" + s + "`", line_);
    return v;
  }

  bool flag(const std::string& s) const {
    if (s == "0") return false;
    if (s == "1") return true;
    throw ParseError("expected 0 or 1, got `" + s + "`", line_);
  }

  std::size_t line() const { return line_; }

 private:
  std::istringstream in_;
  std::size_t line_ = 0;
};

}  // namespace

std::string model_to_string(const BoostedModel& m) {
  if (m.alphas.size() != m.trees.size() || m.thresholds.size() != m.trees.size())
    throw ArgumentError("model needs one alpha and one threshold per tree");
  std::ostringstream o;
  const ChannelConfig& c = m.channels;
  const FrequencyFeatureConfig& f = c.frequency;
  o << kModelHeader << '\n';
  o << "config_hash " << (m.config_hash.empty() ? "-" : m.config_hash) << '\n';
  o << "seed " << m.seed << '\n';
  o << "window " << m.window.width << ' ' << m.window.height << ' ' << m.window.shrink << '\n';
  o << "color " << to_string(c.color) << '\n';
  o << "families " << c.use_color << ' ' << c.use_gradient << ' ' << c.use_frequency << '\n';
  o << "smoothing " << c.pre_smooth << ' ' << c.post_smooth << ' ' << c.region_radius << '\n';
  o << "gradient_norm " << c.gm_norm_radius << ' ' << fmt_double(c.gm_epsilon) << '\n';
  o << "frequency " << f.max_order << ' ' << fmt_double(f.sigma) << ' ' << f.use_f1 << ' ' << f.use_f2 << ' '
    << f.use_f3 << ' ' << fmt_double(f.f3_floor) << '\n';
  o << "radii " << f.radii.size();
  for (double r : f.radii) o << ' ' << fmt_double(r);
  o << '\n';
  const ChannelLayout layout = channel_layout(c);
  o << "channels " << layout.names.size() << '\n';
  for (std::size_t i = 0; i < layout.names.size(); ++i)
    o << i << ' ' << to_string(layout.groups[i]) << ' ' << layout.names[i] << '\n';
  for (int g = 0; g < kChannelGroupCount; ++g)
    o << "lambda " << to_string(static_cast<ChannelGroup>(g)) << ' ' << fmt_double(m.lambda.lambda[static_cast<std::size_t>(g)])
      << ' ' << fmt_double(m.lambda.r2[static_cast<std::size_t>(g)]) << '\n';
  o << "trees " << m.trees.size() << '\n';
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    const DecisionTree& tree = m.trees[t];
    o << "tree " << t << ' ' << fmt_double(m.alphas[t]) << ' ' << fmt_double(m.thresholds[t]) << ' '
      << tree.nodes.size() << '\n';
    for (const auto& n : tree.nodes) {
      if (n.is_leaf())
        o << "leaf " << n.value << ' ' << fmt_double(n.confidence) << '\n';
      else
        o << "split " << n.feature << ' ' << fmt_float(n.threshold) << ' ' << n.left << ' ' << n.right << '\n';
    }
  }
  o << "end\n";
  return o.str();
}

BoostedModel model_from_string(const std::string& text) {
  LineReader r(text);
  {
    const auto tok = r.next("header");
    std::string joined;
    for (std::size_t i = 0; i < tok.size(); ++i) joined += (i ? " " : "") + tok[i];
    if (joined != kModelHeader) throw FormatError("not an orsim model (header `" + joined + "`)");
  }
  BoostedModel m;
  auto tok = r.expect("config_hash", 1);
  m.config_hash = tok[1] == "-" ? "" : tok[1];
  tok = r.expect("seed", 1);
  {
    char* end = nullptr;
    m.seed = std::strtoull(tok[1].c_str(), &end, 10);
    if (*end != '\0' || tok[1][0] == '-') throw ParseError("bad seed", r.line());
  }
  tok = r.expect("window", 3);
  m.window.width = static_cast<int>(r.integer(tok[1]));
  m.window.height = static_cast<int>(r.integer(tok[2]));
  m.window.shrink = static_cast<int>(r.integer(tok[3]));
  ChannelConfig& c = m.channels;
  FrequencyFeatureConfig& f = c.frequency;
  tok = r.expect("color", 1);
  try {
    c.color = parse_color_space(tok[1]);
  } catch (const Error& e) {
    throw ParseError(e.what(), r.line());
  }
  tok = r.expect("families", 3);
  c.use_color = r.flag(tok[1]);
  c.use_gradient = r.flag(tok[2]);
  c.use_frequency = r.flag(tok[3]);
  tok = r.expect("smoothing", 3);
  c.pre_smooth = static_cast<int>(r.integer(tok[1]));
  c.post_smooth = static_cast<int>(r.integer(tok[2]));
  c.region_radius = static_cast<int>(r.integer(tok[3]));
  tok = r.expect("gradient_norm", 2);
  c.gm_norm_radius = static_cast<int>(r.integer(tok[1]));
  c.gm_epsilon = r.real(tok[2]);
  tok = r.expect("frequency", 6);
  f.max_order = static_cast<int>(r.integer(tok[1]));
  f.sigma = r.real(tok[2]);
  f.use_f1 = r.flag(tok[3]);
  f.use_f2 = r.flag(tok[4]);
  f.use_f3 = r.flag(tok[5]);
  f.f3_floor = r.real(tok[6]);
  tok = r.next("radii");
  if (tok[0] != "radii" || tok.size() < 2) throw ParseError("expected `radii`", r.line());
  const auto nr = static_cast<std::size_t>(r.integer(tok[1]));
  if (tok.size() != nr + 2) throw ParseError("radius count mismatch", r.line());
  f.radii.clear();
  for (std::size_t i = 0; i < nr; ++i) f.radii.push_back(r.real(tok[i + 2]));
  try {
    m.window.validate();
    c.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid model configuration: ") + e.what());
  }

  const ChannelLayout layout = channel_layout(c);
  tok = r.expect("channels", 1);
  const auto nc = static_cast<std::size_t>(r.integer(tok[1]));
  if (nc != layout.names.size())
    throw FormatError("model lists " + std::to_string(nc) + " channels, configuration gives " +
                      std::to_string(layout.names.size()));
  for (std::size_t i = 0; i < nc; ++i) {
    tok = r.next("channel");
    if (tok.size() != 3 || r.integer(tok[0]) != static_cast<long long>(i))
      throw ParseError("expected `index group name`", r.line());
    if (tok[1] != to_string(layout.groups[i]) || tok[2] != layout.names[i])
      throw FormatError("channel " + std::to_string(i) + " is `" + tok[2] + "`, configuration gives `" +
                        layout.names[i] + "`");
  }
  for (int g = 0; g < kChannelGroupCount; ++g) {
    tok = r.expect("lambda", 3);
    if (tok[1] != to_string(static_cast<ChannelGroup>(g))) throw ParseError("lambda groups out of order", r.line());
    m.lambda.lambda[static_cast<std::size_t>(g)] = r.real(tok[2]);
    m.lambda.r2[static_cast<std::size_t>(g)] = r.real(tok[3]);
  }
  tok = r.expect("trees", 1);
  const long long nt = r.integer(tok[1]);
  if (nt < 0) throw ParseError("negative tree count", r.line());
  const std::size_t len = m.feature_length();
  for (long long t = 0; t < nt; ++t) {
    tok = r.expect("tree", 4);
    if (r.integer(tok[1]) != t) throw ParseError("trees out of order", r.line());
    m.alphas.push_back(r.real(tok[2]));
    m.thresholds.push_back(r.real(tok[3]));
    const long long nn = r.integer(tok[4]);
    if (nn < 1) throw ParseError("tree needs at least one node", r.line());
    DecisionTree tree;
    for (long long k = 0; k < nn; ++k) {
      tok = r.next("node");
      TreeNode n;
      if (tok[0] == "leaf" && tok.size() == 3) {
        n.value = static_cast<int>(r.integer(tok[1]));
        if (n.value != 1 && n.value != -1) throw ParseError("leaf value must be +1 or -1", r.line());
        n.confidence = r.real(tok[2]);
      } else if (tok[0] == "split" && tok.size() == 5) {
        n.feature = static_cast<int>(r.integer(tok[1]));
        n.threshold = r.single(tok[2]);
        n.left = static_cast<int>(r.integer(tok[3]));
        n.right = static_cast<int>(r.integer(tok[4]));
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= len)
          throw ParseError("feature index out of range", r.line());
        if (n.left <= k || n.left >= nn || n.right <= k || n.right >= nn)
          throw ParseError("child index out of range", r.line());
      } else {
        throw ParseError("expected `leaf v conf` or `split f thr left right`", r.line());
      }
      tree.nodes.push_back(n);
    }
    if (tree.depth() > kMaxTreeDepth) throw FormatError("tree deeper than " + std::to_string(kMaxTreeDepth));
    m.trees.push_back(std::move(tree));
  }
  r.expect("end", 0);
  return m;
}

void save_model(const std::filesystem::path& path, const BoostedModel& model) {
  const std::string s = model_to_string(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << s;
  if (!out) throw IoError("write failed: " + path.string());
}

BoostedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_string(ss.str());
}

void save_lambda_table(const std::filesystem::path& path, const CalibrationReport& report,
                       const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& h : header) out << "# " << h << '\n';
  out << "# scales";
  for (double s : report.scales) out << ' ' << fmt_double(s);
  out << '\n';
  out << "group lambda r2 mu\n";
  for (int g = 0; g < kChannelGroupCount; ++g) {
    const GroupFit& fit = report.groups[static_cast<std::size_t>(g)];
    if (!fit.present) continue;
    out << to_string(static_cast<ChannelGroup>(g)) << ' ' << fmt_double(fit.lambda) << ' ' << fmt_double(fit.r2);
    for (double mu : fit.mu) out << ' ' << fmt_double(mu);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

LambdaTable load_lambda_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lambda table " + path.string());
  LambdaTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string w; ss >> w;) tok.push_back(w);
    if (tok.empty() || tok[0][0] == '#' || tok[0] == "group") continue;
    if (tok.size() < 3) throw ParseError("expected `group lambda r2 ...`", lineno);
    ChannelGroup g;
    try {
      g = parse_channel_group(tok[0]);
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno);
    }
    char* end = nullptr;
    const double lambda = std::strtod(tok[1].c_str(), &end);
    if (*end != '\0') throw ParseError("bad lambda", lineno);
    const double r2 = std::strtod(tok[2].c_str(), &end);
    if (*end != '\0') throw ParseError("bad r2", lineno);
    t.lambda[static_cast<std::size_t>(g)] = lambda;
    t.r2[static_cast<std::size_t>(g)] = r2;
  }
  return t;
}

}  // namespace orsim
