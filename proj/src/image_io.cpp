#include "orsim/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "orsim/errors.hpp"

namespace orsim {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

RasterImage from_interleaved(const std::vector<unsigned char>& buf, int w, int h, int channels) {
  RasterImage img(w, h, channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(c, x, y) =
            buf[(static_cast<std::size_t>(y) * w + x) * channels + c] / 255.0;
  return img;
}

unsigned char quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

struct PngPixels {
  std::vector<unsigned char> buf;
  int w = 0, h = 0, channels = 0;
  bool bad_depth = false;
};

// Keeps setjmp in a frame whose locals are not modified after the jump point.
bool read_png(png_structp png, png_infop info, FILE* f, PngPixels& out) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, f);
  png_read_info(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth == 16) {
    out.bad_depth = true;
    return true;
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  out.w = static_cast<int>(png_get_image_width(png, info));
  out.h = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.buf.resize(static_cast<std::size_t>(out.w) * out.h * out.channels);
  std::vector<png_bytep> rows(static_cast<std::size_t>(out.h));
  for (int y = 0; y < out.h; ++y)
    rows[static_cast<std::size_t>(y)] = out.buf.data() + static_cast<std::size_t>(y) * out.w * out.channels;
  png_read_image(png, rows.data());
  return true;
}

RasterImage load_png(const fs::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  PngPixels px;
  const bool ok = read_png(png, info, f.get(), px);
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw FormatError("corrupt PNG: " + path.string());
  if (px.bad_depth) throw FormatError("unsupported PNG bit depth 16: " + path.string());
  if (px.channels != 1 && px.channels != 3) throw FormatError("unsupported PNG channel layout: " + path.string());
  return from_interleaved(px.buf, px.w, px.h, px.channels);
}

// Reads the next whitespace-delimited PNM header token, skipping comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

RasterImage load_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = pnm_token(in);
  int channels;
  if (magic == "P6")
    channels = 3;
  else if (magic == "P5")
    channels = 1;
  else
    throw FormatError("not a binary PPM/PGM: " + path.string());
  int w, h, maxval;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    throw FormatError("bad PNM header: " + path.string());
  }
  if (w < 1 || h < 1) throw FormatError("bad PNM dimensions: " + path.string());
  if (maxval != 255) throw FormatError("unsupported PNM bit depth (maxval " + std::to_string(maxval) + "): " + path.string());
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw IoError("truncated PNM: " + path.string());
  return from_interleaved(buf, w, h, channels);
}

void save_png(const fs::path& path, const std::vector<unsigned char>& buf, int w, int h, int channels) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y)
    png_write_row(png, buf.data() + static_cast<std::size_t>(y) * w * channels);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RasterImage load_image(const fs::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  const auto got = probe.gcount();
  probe.close();
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) return load_png(path);
  if (got >= 2 && sig[0] == 'P') return load_pnm(path);
  throw FormatError("unsupported image format: " + path.string());
}

void save_image(const fs::path& path, const RasterImage& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw ArgumentError("only 1- or 3-channel images can be saved");
  const int w = img.width(), h = img.height(), n = img.channels();
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * n);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < n; ++c)
        buf[(static_cast<std::size_t>(y) * w + x) * n + c] = quantize(img.at(c, x, y));
  const std::string ext = lower_ext(path);
  if (ext == ".png") {
    save_png(path, buf, w, h, n);
    return;
  }
  if ((ext == ".ppm" && n != 3) || (ext == ".pgm" && n != 1) || (ext != ".ppm" && ext != ".pgm"))
    throw ArgumentError("extension does not match channel count: " + path.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (n == 3 ? "P6" : "P5") << '\n' << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_pgm(const fs::path& path, std::span<const double> plane, int width, int height) {
  if (plane.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ArgumentError("plane size does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (double v : plane) out.put(static_cast<char>(std::lround(std::clamp(v * 255.0, 0.0, 255.0))));
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = lower_ext(e.path());
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace orsim
