#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "orsim/evalkit.hpp"
#include "orsim/imaging.hpp"

namespace orsim {

enum class ShapeKind { Plane, Car, Blob };

ShapeKind parse_shape_kind(std::string_view name);
std::string_view to_string(ShapeKind k);

// Parametric scenes: anti-aliased shapes on pink-noise ground with clutter.
struct SynthSpec {
  ShapeKind shape = ShapeKind::Plane;
  int count = 10;  // images
  int width = 192;
  int height = 192;
  int objects_min = 1;
  int objects_max = 2;
  double size_min = 40.0;  // object length in pixels
  double size_max = 56.0;
  double rotation_min = 0.0;  // degrees
  double rotation_max = 360.0;
  double noise = 0.02;  // std-dev of additive pixel noise
  int distractors = 6;  // clutter shapes per image
  std::uint64_t seed = 1;
  std::string id_prefix = "img";

  void validate() const;  // ArgumentError
};

struct SynthCorpus {
  std::vector<std::string> ids;
  std::vector<RasterImage> images;
  std::vector<AnnotatedBox> truths;  // tight boxes of every object
};

// Fully determined by the spec; the label of every box is the shape name.
SynthCorpus synth_corpus(const SynthSpec& spec);

// Zero-mean, unit-variance 1/f texture built from octaves of interpolated
// lattice noise.
std::vector<double> pink_noise(int width, int height, std::uint64_t seed);

}  // namespace orsim
