#include "vot/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "vot/errors.hpp"

namespace vot::data {

namespace fs = std::filesystem;

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& path) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  if (token.empty()) throw ParseError(path + ": truncated header");
  return token;
}

std::size_t header_number(std::istream& in, const std::string& path) {
  const std::string t = header_token(in, path);
  char* end = nullptr;
  const unsigned long v = std::strtoul(t.c_str(), &end, 10);
  if (end == t.c_str() || *end != '\0' || v == 0) {
    throw ParseError(path + ": bad header value '" + t + "'");
  }
  return v;
}

}  // namespace

Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path + "'");
  const std::string magic = header_token(in, path);
  std::size_t channels;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw ParseError(path + ": unsupported image type '" + magic +
                     "' (expected binary PGM P5 or PPM P6)");
  }
  const std::size_t width = header_number(in, path);
  const std::size_t height = header_number(in, path);
  const std::size_t maxval = header_number(in, path);
  if (maxval > 65535) throw ParseError(path + ": maxval above 65535");
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  Image img(height, width, channels);
  std::vector<unsigned char> raw(img.pixels.size() * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw ParseError(path + ": truncated pixel data");
  }
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const unsigned v = bytes == 2 ? (raw[2 * i] << 8) | raw[2 * i + 1] : raw[i];
    img.pixels[i] = std::min(1.0, v * scale);
  }
  return img;
}

void write_pnm(const Image& image, const std::string& path, unsigned maxval) {
  if (image.channels != 1 && image.channels != 3) {
    throw InvalidArgumentError("write_pnm: images must have 1 or 3 channels, got " +
                               std::to_string(image.channels));
  }
  if (maxval == 0 || maxval > 65535) {
    throw InvalidArgumentError("write_pnm: maxval must be in [1, 65535]");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image '" + path + "'");
  out << (image.channels == 1 ? "P5" : "P6") << '\n'
      << image.width << ' ' << image.height << '\n'
      << maxval << '\n';
  const bool wide = maxval > 255;
  std::vector<unsigned char> raw;
  raw.reserve(image.pixels.size() * (wide ? 2 : 1));
  for (double p : image.pixels) {
    const auto v = static_cast<unsigned>(std::lround(std::clamp(p, 0.0, 1.0) * maxval));
    if (wide) raw.push_back(static_cast<unsigned char>(v >> 8));
    raw.push_back(static_cast<unsigned char>(v & 0xff));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

// Overlap weights of destination cells of size in/out with unit source cells.
std::vector<std::vector<std::pair<std::size_t, double>>> area_weights(
    std::size_t in, std::size_t out) {
  std::vector<std::vector<std::pair<std::size_t, double>>> w(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double lo = o * scale, hi = (o + 1) * scale;
    for (auto i = static_cast<std::size_t>(std::floor(lo));
         i < in && static_cast<double>(i) < hi; ++i) {
      const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      if (overlap > 0) w[o].emplace_back(i, overlap / scale);
    }
  }
  return w;
}

}  // namespace

Image resize_area(const Image& image, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw InvalidArgumentError("resize_area: target size must be positive");
  }
  if (image.height == height && image.width == width) return image;
  const auto wr = area_weights(image.height, height);
  const auto wc = area_weights(image.width, width);
  Image out(height, width, image.channels);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t ch = 0; ch < image.channels; ++ch) {
        double acc = 0.0;
        for (const auto& [ir, a] : wr[r]) {
          for (const auto& [ic, b] : wc[c]) acc += a * b * image.at(ir, ic, ch);
        }
        out.at(r, c, ch) = acc;
      }
    }
  }
  return out;
}

Image to_grayscale(const Image& image) {
  if (image.channels == 1) return image;
  Image out(image.height, image.width, 1);
  for (std::size_t i = 0; i < image.height * image.width; ++i) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < image.channels; ++ch) {
      acc += image.pixels[i * image.channels + ch];
    }
    out.pixels[i] = acc / static_cast<double>(image.channels);
  }
  return out;
}

std::string timestamp_stem(double timestamp) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", timestamp);
  return buf;
}

ImageSequence load_image_sequence(const std::string& dir, std::size_t height,
                                  std::size_t width) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: '" + dir + "'");
  std::vector<std::pair<double, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext != ".pgm" && ext != ".ppm") continue;
    const std::string stem = entry.path().stem().string();
    char* end = nullptr;
    errno = 0;
    const double t = std::strtod(stem.c_str(), &end);
    if (end == stem.c_str() || *end != '\0' || errno == ERANGE) {
      throw ParseError("image name '" + entry.path().filename().string() +
                       "' is not <timestamp>.pgm or <timestamp>.ppm");
    }
    files.emplace_back(t, entry.path());
  }
  std::sort(files.begin(), files.end());
  ImageSequence seq;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (i > 0 && files[i].first == files[i - 1].first) {
      throw InvalidArgumentError("duplicate timestamp in '" + dir + "': " +
                                 files[i].second.filename().string());
    }
    Image img = read_pnm(files[i].second.string());
    if (!seq.frames.empty() && img.channels != seq.frames.front().channels) {
      throw InvalidArgumentError("mixed channel counts in '" + dir + "': " +
                                 files[i].second.filename().string() + " has " +
                                 std::to_string(img.channels) + ", expected " +
                                 std::to_string(seq.frames.front().channels));
    }
    if (height != 0 && width != 0) img = resize_area(img, height, width);
    seq.frames.push_back(std::move(img));
    seq.timestamps.push_back(files[i].first);
  }
  return seq;
}

}  // namespace vot::data
