#include "plot.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "vot/errors.hpp"
#include "vot/image_io.hpp"

namespace vot::tools {

namespace {

constexpr double kCanvas = 640.0;
constexpr double kMargin = 40.0;

struct Frame {
  double min_x, min_z, scale;
  double px(double x) const { return kMargin + (x - min_x) * scale; }
  // SVG y grows downward; +z is drawn upward.
  double py(double z) const { return kCanvas - kMargin - (z - min_z) * scale; }
};

std::string polyline(const geometry::Trajectory& t, const Frame& f, const char* style) {
  std::ostringstream out;
  out << "  <polyline fill=\"none\" " << style << " points=\"";
  for (const auto& p : t.poses) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", f.px(p.translation.x()), f.py(p.translation.z()));
    out << buf;
  }
  out << "\"/>\n";
  return out.str();
}

}  // namespace

std::string trajectory_svg(const geometry::Trajectory& gt, const geometry::Trajectory* est) {
  if (gt.poses.empty()) throw InvalidArgumentError("cannot plot an empty trajectory");
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
  double lo_z = lo_x, hi_z = -lo_x;
  auto extend = [&](const geometry::Trajectory& t) {
    for (const auto& p : t.poses) {
      lo_x = std::min(lo_x, p.translation.x());
      hi_x = std::max(hi_x, p.translation.x());
      lo_z = std::min(lo_z, p.translation.z());
      hi_z = std::max(hi_z, p.translation.z());
    }
  };
  extend(gt);
  if (est != nullptr) extend(*est);
  const double span = std::max({hi_x - lo_x, hi_z - lo_z, 1e-6});
  const Frame f{lo_x - (span - (hi_x - lo_x)) / 2, lo_z - (span - (hi_z - lo_z)) / 2,
                (kCanvas - 2 * kMargin) / span};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\""
      << kCanvas << "\" viewBox=\"0 0 " << kCanvas << ' ' << kCanvas << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << polyline(gt, f, "stroke=\"#222222\" stroke-width=\"2\"");
  if (est != nullptr) {
    svg << polyline(*est, f, "stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6,4\"");
  }
  const auto& s = gt.poses.front().translation;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "  <circle cx=\"%.2f\" cy=\"%.2f\" r=\"5\" fill=\"#1f77b4\"/>\n", f.px(s.x()),
                f.py(s.z()));
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "  <text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\">"
                "x-z view, %.3g m across</text>\n",
                kMargin, kMargin / 2, span);
  svg << buf;
  svg << "  <text x=\"" << kMargin << "\" y=\"" << kCanvas - kMargin / 3
      << "\" font-family=\"sans-serif\" font-size=\"12\">ground truth: solid"
      << (est != nullptr ? ", estimate: dashed" : "") << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::string> write_attention_maps(const std::vector<decoder::AttentionMap>& maps,
                                              std::size_t grid_h, std::size_t grid_w,
                                              std::size_t zoom, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& m : maps) {
    if (m.weights.size() != grid_h * grid_w + 1) {
      throw ShapeError("attention map has " + std::to_string(m.weights.size()) +
                       " weights, expected " + std::to_string(grid_h * grid_w + 1));
    }
    double peak = 0.0;
    for (std::size_t k = 1; k < m.weights.size(); ++k) peak = std::max(peak, m.weights[k]);
    Image img(grid_h * zoom, grid_w * zoom, 1);
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        const double w = m.weights[1 + (r / zoom) * grid_w + c / zoom];
        img.at(r, c) = peak > 0.0 ? w / peak : 0.0;
      }
    }
    char name[64];
    std::snprintf(name, sizeof name, "attn_l%02zu_h%02zu_f%02zu.pgm", m.layer, m.head, m.frame);
    const std::string path = (fs::path(dir) / name).string();
    data::write_pnm(img, path, 255);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace vot::tools
