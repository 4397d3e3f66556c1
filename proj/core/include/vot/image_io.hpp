#pragma once

#include <string>
#include <vector>

#include "vot/image.hpp"

namespace vot::data {

/// Binary PGM (P5, one channel) or PPM (P6, three channels) with maxval up to
/// 65535. Pixel values are scaled to [0, 1]. Throws vot::IoError when the
/// file cannot be opened and vot::ParseError on a malformed header or
/// truncated data.
Image read_pnm(const std::string& path);

/// Writes P5 for one channel and P6 for three, with 16-bit samples by
/// default. Values are clamped to [0, 1] before quantization.
void write_pnm(const Image& image, const std::string& path, unsigned maxval = 65535);

/// Area-averaging resample: each output pixel is the overlap-weighted mean of
/// the input pixels it covers.
Image resize_area(const Image& image, std::size_t height, std::size_t width);

/// Mean over channels.
Image to_grayscale(const Image& image);

struct ImageSequence {
  std::vector<Image> frames;
  std::vector<double> timestamps;
};

/// Loads every `<timestamp>.pgm` / `<timestamp>.ppm` in `dir`, sorted by
/// timestamp. With non-zero height and width, frames are resized by area
/// averaging. An empty directory gives an empty sequence. Throws
/// vot::IoError for a missing directory or unreadable file,
/// vot::ParseError for a file name that is not a number, and
/// vot::InvalidArgumentError when frames have different channel counts.
ImageSequence load_image_sequence(const std::string& dir, std::size_t height = 0,
                                  std::size_t width = 0);

/// Formats a timestamp as a file stem that sorts and parses back exactly.
std::string timestamp_stem(double timestamp);

}  // namespace vot::data
