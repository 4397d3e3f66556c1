#pragma once

#include <cstddef>
#include <vector>

namespace vot {

/// Row-major H x W x C raster with intensities nominally in [0, 1].
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
      : height(h), width(w), channels(c), pixels(h * w * c, fill) {}

  double& at(std::size_t row, std::size_t col, std::size_t ch = 0) {
    return pixels[(row * width + col) * channels + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
    return pixels[(row * width + col) * channels + ch];
  }
  bool empty() const { return pixels.empty(); }
};

}  // namespace vot
