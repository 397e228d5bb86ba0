#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "orsim/detector.hpp"
#include "orsim/errors.hpp"
#include "orsim/evalkit.hpp"
#include "orsim/image_io.hpp"
#include "orsim/model_io.hpp"
#include "orsim/parallel.hpp"
#include "orsim/run_config.hpp"
#include "orsim/synth.hpp"
#include "orsim/training.hpp"

namespace fs = std::filesystem;
using namespace orsim;

namespace {

constexpr int kOk = 0, kUsage = 2, kCalibration = 3, kTrainingData = 4;

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string two_step;
  std::optional<int> threads;
  std::vector<std::string> inputs;
};

RunConfig load_config(const Args& a) {
  RunConfig c = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.threads) c.threads = *a.threads;
  if (a.two_step == "on") c.two_step_nms = true;
  if (a.two_step == "off") c.two_step_nms = false;
  c.validate();
  return c;
}

std::vector<std::string> header(const std::string& cmd, const RunConfig& c) {
  return {"orsim " + cmd, "config_hash " + c.hash(), "seed " + std::to_string(c.seed)};
}

fs::path output(const Args& a, const fs::path& configured, const char* what) {
  if (!a.out.empty()) return a.out;
  if (configured.empty()) throw ConfigError(std::string("no output path: set `") + what + "` or pass --out");
  return configured;
}

const fs::path& required(const fs::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string("`") + key + "` is not set");
  return p;
}

struct Corpus {
  std::vector<std::string> ids;
  std::vector<RasterImage> images;
};

Corpus load_dir(const fs::path& dir, int threads) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  const auto files = list_images(dir);
  Corpus c;
  c.images.resize(files.size());
  for (const auto& f : files) c.ids.push_back(f.stem().string());
  parallel_for(files.size(), threads, [&](std::size_t i) { c.images[i] = load_image(files[i]); });
  return c;
}

int cmd_synth(const Args& a) {
  RunConfig c = load_config(a);
  SynthSpec spec = c.synth;
  spec.seed = c.seed;
  const fs::path dir = output(a, {}, "--out");
  const SynthCorpus corpus = synth_corpus(spec);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < corpus.images.size(); ++i) save_image(dir / (corpus.ids[i] + ".png"), corpus.images[i]);
  save_annotations(dir / "annotations.txt", corpus.truths, header("synth", c));
  std::printf("wrote %zu images, %zu objects to %s\n", corpus.images.size(), corpus.truths.size(), dir.c_str());
  return kOk;
}

int cmd_calibrate(const Args& a) {
  const RunConfig c = load_config(a);
  const fs::path out = output(a, c.lambda_table, "lambda_table");
  const Corpus corpus = load_dir(required(c.calibration_images, "calibration_images"), c.threads);
  if (corpus.images.empty()) throw IoError("no images in " + c.calibration_images.string());
  const FeaturePipeline pipeline(c.channels);
  const auto scales = default_calibration_scales(c.calibration_octaves, c.calibration_per_octave);
  const CalibrationReport rep = calibration_report(corpus.images, scales, pipeline, c.threads);
  for (std::size_t g = 0; g < kChannelGroupCount; ++g) {
    const GroupFit& f = rep.groups[g];
    if (!f.present) continue;
    const auto name = to_string(static_cast<ChannelGroup>(g));
    if (f.degenerate)
      throw CalibrationError("degenerate power-law fit for channel group " + std::string(name) +
                             ": mean channel magnitude is zero");
    std::printf("%-8s lambda %.4f  r2 %.4f\n", std::string(name).c_str(), f.lambda, f.r2);
  }
  save_lambda_table(out, rep, header("calibrate", c));
  return kOk;
}

int cmd_train(const Args& a) {
  const RunConfig c = load_config(a);
  const fs::path out = output(a, c.model, "model");
  const LambdaTable lambda = load_lambda_table(required(c.lambda_table, "lambda_table"));
  const Corpus train = load_dir(required(c.train_images, "train_images"), c.threads);
  const auto truths = load_annotations(required(c.train_annotations, "train_annotations"));
  const Corpus neg = load_dir(required(c.negative_images, "negative_images"), c.threads);
  const BoostedModel base = c.base_model(lambda);
  const FeaturePipeline pipeline(c.channels);
  auto log = [](const std::string& s) { std::printf("%s\n", s.c_str()), std::fflush(stdout); };

  TrainResult res;
  const TrainOptions opts = c.train_options();
  if (c.positive_sources == std::vector<std::string>{"crop"}) {
    const auto crops = positive_crops(train.ids, train.images, truths, c.window, pipeline.context_pixels());
    if (crops.empty()) throw DegenerateDataError("no positive windows in the training annotations");
    res = train_detector(crops, neg.images, base, opts, log);
  } else {
    const auto pos = pyramid_positives(train.ids, train.images, truths, pipeline, lambda, c.window,
                                       c.positive_sampling());
    if (pos.empty()) throw DegenerateDataError("no positive windows in the training annotations");
    res = train_detector(pos, neg.images, base, opts, log);
  }
  save_model(out, res.model);
  std::printf("model: %zu trees -> %s\n", res.model.trees.size(), out.c_str());
  return kOk;
}

int cmd_detect(const Args& a) {
  const RunConfig c = load_config(a);
  const fs::path out = output(a, c.detections, "detections");
  const Detector det(load_model(required(c.model, "model")));
  Corpus corpus;
  if (a.inputs.empty()) {
    corpus = load_dir(required(c.test_images, "test_images"), c.threads);
  } else {
    for (const auto& p : a.inputs) {
      corpus.ids.push_back(fs::path(p).stem().string());
      corpus.images.push_back(load_image(p));
    }
  }
  DetectOptions opts = c.detect_options();
  opts.pyramid.threads = 1;
  std::vector<std::vector<DetectionRecord>> per(corpus.images.size());
  parallel_for(corpus.images.size(), c.threads, [&](std::size_t i) {
    auto d = det.detect(corpus.images[i], opts);
    d = c.two_step_nms ? two_step_nms(std::move(d), c.nms_overlap, c.nms_containment) : nms(std::move(d), c.nms_overlap);
    for (const auto& x : d) per[i].push_back({corpus.ids[i], x.box(), x.score});
  });
  std::vector<DetectionRecord> all;
  for (auto& v : per) all.insert(all.end(), v.begin(), v.end());
  auto h = header("detect", c);
  h.push_back("model_config_hash " + (det.model().config_hash.empty() ? "-" : det.model().config_hash));
  h.push_back(std::string("two_step_nms ") + (c.two_step_nms ? "on" : "off"));
  save_detections(out, all, h);
  std::printf("%zu detections in %zu images -> %s\n", all.size(), corpus.images.size(), out.c_str());
  return kOk;
}

int cmd_eval(const Args& a) {
  const RunConfig c = load_config(a);
  const fs::path out = output(a, c.report, "report");
  const auto dets = load_detections(required(c.detections, "detections"));
  const auto truths = load_annotations(required(c.annotations, "annotations"));
  if (truths.empty()) throw ArgumentError("annotation file has no boxes");
  const PRCurve pr = evaluate(dets, truths, c.iou_threshold);
  const auto h = header("eval", c);
  std::ofstream o(out);
  if (!o) throw IoError("cannot write " + out.string());
  for (const auto& l : h) o << "# " << l << '\n';
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "iou_threshold %.4f\ntruths %zu\ndetections %zu\nno_detections %d\nAP %.6f\nAR %.6f\nAF %.6f\n"
                "best_threshold %.4f\n",
                c.iou_threshold, pr.n_truths, dets.size(), pr.no_detections ? 1 : 0, pr.ap, pr.ar, pr.af,
                pr.best_threshold);
  o << buf;
  if (!o) throw IoError("write failed: " + out.string());
  fs::path csv = out;
  csv.replace_extension(".csv");
  write_pr_csv(csv, pr, h);
  std::printf("AP %.4f  AR %.4f  AF %.4f  (IoU > %.2f)\n", pr.ap, pr.ar, pr.af, c.iou_threshold);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation-robust object detector for overhead imagery"};
  app.require_subcommand(1);
  Args args;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "Run configuration file");
    sub->add_option("--seed", args.seed, "Override the configured seed");
    sub->add_option("--out", args.out, "Output path (directory for synth)");
    sub->add_option("--two-step-nms", args.two_step, "Two-step suppression")->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--threads", args.threads, "Worker threads")->check(CLI::Range(1, 256));
  };
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const Args&);
  };
  const Cmd cmds[] = {{"synth", "Write a synthetic corpus", cmd_synth},
                      {"calibrate", "Fit the channel scaling exponents", cmd_calibrate},
                      {"train", "Train a boosted detector", cmd_train},
                      {"detect", "Run a model over images", cmd_detect},
                      {"eval", "Score detections against annotations", cmd_eval}};
  const Cmd* chosen = nullptr;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    common(sub);
    if (std::string(c.name) == "detect") sub->add_option("images", args.inputs, "Images (default: test_images)");
    sub->callback([&chosen, &c] { chosen = &c; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return chosen->run(args);
  } catch (const CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << '\n';
    return kCalibration;
  } catch (const DegenerateDataError& e) {
    std::cerr << "training data error: " << e.what() << '\n';
    return kTrainingData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
