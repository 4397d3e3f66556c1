#include <algorithm>
#include <cmath>
#include <random>

#include "vot/data.hpp"
#include "vot/errors.hpp"

namespace vot::data {

using geometry::Vec3;

Intrinsics intrinsics_profile(const std::string& name, std::size_t height,
                              std::size_t width) {
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  Intrinsics k{w, w, w / 2.0, h / 2.0};
  if (name == "default") return k;
  if (name == "wide") {
    k.fx = k.fy = 0.7 * w;
    return k;
  }
  if (name == "narrow") {
    k.fx = k.fy = 1.4 * w;
    return k;
  }
  if (name == "offset") {
    k.cx += w / 16.0;
    k.cy -= h / 16.0;
    return k;
  }
  throw InvalidArgumentError("unknown intrinsics profile '" + name + "'");
}

std::vector<std::string> intrinsics_profile_names() {
  return {"default", "wide", "narrow", "offset"};
}

namespace {

WorldPoint random_point(const Vec3& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> intensity(0.3, 1.0);
  std::uniform_real_distribution<double> radius(3.0, 9.0);
  return {p, intensity(rng), radius(rng)};
}

void add_room(World& w, std::mt19937_64& rng) {
  constexpr double half = 4.0;
  std::uniform_real_distribution<double> u(-half, half);
  std::uniform_int_distribution<int> face(0, 5);
  for (int i = 0; i < 700; ++i) {
    Vec3 p(u(rng), u(rng), u(rng));
    const int f = face(rng);
    p[f / 2] = (f % 2 == 0) ? -half : half;
    w.points.push_back(random_point(p, rng));
  }
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  while (w.points.size() < 850) {
    const Vec3 p(c(rng), c(rng), c(rng));
    if (p.norm() < 1.5) continue;
    w.points.push_back(random_point(p, rng));
  }
}

void add_street(World& w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> along(-10.0, 400.0);
  std::uniform_real_distribution<double> height(-4.0, 1.6);
  std::uniform_real_distribution<double> across(-5.0, 5.0);
  for (int i = 0; i < 3000; ++i) {
    const double z = along(rng);
    switch (i % 3) {
      case 0:
        w.points.push_back(random_point(Vec3(-5.0, height(rng), z), rng));
        break;
      case 1:
        w.points.push_back(random_point(Vec3(5.0, height(rng), z), rng));
        break;
      default:
        w.points.push_back(random_point(Vec3(across(rng), 1.6, z), rng));
        break;
    }
  }
}

}  // namespace

World make_world(std::uint64_t seed, WorldKind kind) {
  World w;
  w.seed = seed;
  w.kind = kind;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> bg(0.05, 0.15);
  w.background = bg(rng);
  if (kind == WorldKind::kRoom) {
    add_room(w, rng);
  } else {
    add_street(w, rng);
  }
  const auto in_volume = std::count_if(
      w.points.begin(), w.points.end(), [](const WorldPoint& p) {
        return p.position.cwiseAbs().maxCoeff() <= 400.0;
      });
  if (static_cast<std::size_t>(in_volume) < kMinWorldPoints) {
    throw InvalidArgumentError("world has fewer than 50 points in its volume");
  }
  return w;
}

Image render(const World& world, const geometry::Pose& camera,
             const Intrinsics& k, std::size_t height, std::size_t width) {
  Image img(height, width, 1, 0.0);
  const geometry::Mat3 rt = camera.rotation.matrix().transpose();
  const long h = static_cast<long>(height), w = static_cast<long>(width);
  for (const auto& pt : world.points) {
    const Vec3 pc = rt * (pt.position - camera.translation);
    if (pc.z() <= kCullDepth) continue;
    const double u = k.fx * pc.x() / pc.z() + k.cx;
    const double v = k.fy * pc.y() / pc.z() + k.cy;
    const double sigma = pt.radius / pc.z();
    const double reach = 3.0 * sigma;
    const long c0 = std::max(0L, static_cast<long>(std::ceil(u - reach)));
    const long c1 = std::min(w - 1, static_cast<long>(std::floor(u + reach)));
    const long r0 = std::max(0L, static_cast<long>(std::ceil(v - reach)));
    const long r1 = std::min(h - 1, static_cast<long>(std::floor(v + reach)));
    if (c0 > c1 || r0 > r1) continue;
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (long r = r0; r <= r1; ++r) {
      const double dv = static_cast<double>(r) - v;
      for (long c = c0; c <= c1; ++c) {
        const double du = static_cast<double>(c) - u;
        img.at(r, c) += pt.intensity * std::exp(-(du * du + dv * dv) * inv);
      }
    }
  }
  for (auto& p : img.pixels) p = std::clamp(p + world.background, 0.0, 1.0);
  return img;
}

}  // namespace vot::data
