#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "vot/data.hpp"
#include "vot/errors.hpp"
#include "vot/image_io.hpp"
#include "vot/manifest.hpp"
#include "vot/tum.hpp"

using namespace vot;
using namespace vot::data;
using geometry::Pose;
using geometry::Rotation;
using geometry::Vec3;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("vot_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::pair<std::size_t, std::size_t> argmax(const Image& img) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < img.pixels.size(); ++i) {
    if (img.pixels[i] > img.pixels[best]) best = i;
  }
  return {best / img.width, best % img.width};
}

World single_point(const Vec3& p) {
  World w;
  w.background = 0.1;
  w.points.push_back({p, 0.8, 2.0});
  return w;
}

}  // namespace

TEST(Intrinsics, Profiles) {
  const auto k = intrinsics_profile("default", 48, 64);
  EXPECT_EQ(k.fx, 64.0);
  EXPECT_EQ(k.fy, 64.0);
  EXPECT_EQ(k.cx, 32.0);
  EXPECT_EQ(k.cy, 24.0);
  EXPECT_DOUBLE_EQ(intrinsics_profile("wide", 64, 64).fx, 0.7 * 64);
  EXPECT_DOUBLE_EQ(intrinsics_profile("narrow", 64, 64).fx, 1.4 * 64);
  EXPECT_NE(intrinsics_profile("offset", 64, 64).cx, 32.0);
  EXPECT_THROW(intrinsics_profile("fisheye", 64, 64), InvalidArgumentError);
  EXPECT_EQ(intrinsics_profile_names().size(), 4u);
}

TEST(Render, NoVisiblePointsGivesBackground) {
  const World w = single_point(Vec3(0, 0, -3));  // behind the camera
  const Image img = render(w, Pose::identity(), intrinsics_profile("default", 32, 32), 32, 32);
  for (double p : img.pixels) EXPECT_EQ(p, 0.1);
  World empty;
  empty.background = 0.3;
  for (double p : render(empty, Pose::identity(), intrinsics_profile("default", 8, 8), 8, 8).pixels) {
    EXPECT_EQ(p, 0.3);
  }
}

TEST(Render, CullsPointsNearTheCameraPlane) {
  const World w = single_point(Vec3(0, 0, 0.05));
  const Image img = render(w, Pose::identity(), intrinsics_profile("default", 16, 16), 16, 16);
  for (double p : img.pixels) EXPECT_EQ(p, 0.1);
}

TEST(Render, OpticalAxisPointPeaksAtPrincipalPoint) {
  const auto k = intrinsics_profile("default", 64, 64);
  const Image img = render(single_point(Vec3(0, 0, 2)), Pose::identity(), k, 64, 64);
  const auto [r, c] = argmax(img);
  EXPECT_EQ(r, static_cast<std::size_t>(k.cy));
  EXPECT_EQ(c, static_cast<std::size_t>(k.cx));
  for (double p : img.pixels) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Render, CameraTranslationShiftsPeak) {
  const auto k = intrinsics_profile("default", 64, 64);
  const double z = 2.0, delta = 0.125;
  const Image a = render(single_point(Vec3(0, 0, z)), Pose::identity(), k, 64, 64);
  const Image b = render(single_point(Vec3(0, 0, z)), Pose{Rotation(), Vec3(delta, 0, 0)}, k, 64, 64);
  const auto pa = argmax(a), pb = argmax(b);
  EXPECT_EQ(static_cast<double>(pb.second) - static_cast<double>(pa.second), -k.fx * delta / z);
  EXPECT_EQ(pa.first, pb.first);
}

TEST(Render, RigidMotionEquivariance) {
  const World w = make_world(3);
  const auto k = intrinsics_profile("default", 32, 32);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) {
    const Pose s{geometry::random_rotation(rng, kPi), Vec3(0.3 * i, -1.0, 2.0)};
    const Pose p{geometry::random_rotation(rng, 0.3), Vec3(0.1, 0.2, -0.1)};
    World moved = w;
    for (auto& pt : moved.points) pt.position = s * pt.position;
    const Image a = render(w, p, k, 32, 32);
    const Image b = render(moved, s * p, k, 32, 32);
    for (std::size_t j = 0; j < a.pixels.size(); ++j) EXPECT_NEAR(a.pixels[j], b.pixels[j], 1e-9);
  }
}

TEST(Render, Deterministic) {
  const auto k = intrinsics_profile("default", 32, 32);
  const Image a = render(make_world(5), Pose::identity(), k, 32, 32);
  const Image b = render(make_world(5), Pose::identity(), k, 32, 32);
  EXPECT_EQ(a.pixels, b.pixels);
}

TEST(World, HasEnoughPoints) {
  for (auto kind : {WorldKind::kRoom, WorldKind::kStreet}) {
    EXPECT_GE(make_world(9, kind).points.size(), kMinWorldPoints);
  }
}

TEST(Trajectory, LengthOneIsIdentity) {
  for (auto kind : {MotionKind::kIndoorWander, MotionKind::kForwardDominant}) {
    const auto t = sample_trajectory(kind, 1, 3);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].translation.norm(), 0.0);
    EXPECT_EQ((t[0].rotation.matrix() - geometry::Mat3::Identity()).norm(), 0.0);
  }
  EXPECT_THROW(sample_trajectory(MotionKind::kIndoorWander, 0, 1), InvalidArgumentError);
}

TEST(Trajectory, IndoorStepBounds) {
  const auto t = sample_trajectory(MotionKind::kIndoorWander, 2000, 11);
  const auto rel = geometry::relative_poses(t);
  for (const auto& r : rel) {
    EXPECT_LE(r.translation.norm(), kIndoorMaxStepTranslation + 1e-12);
    EXPECT_LE(r.rotation.angle(), kIndoorMaxStepAngle + 1e-12);
    const auto& m = r.rotation.matrix();
    EXPECT_LT((m.transpose() * m - geometry::Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  }
  // Smoothness: bounded second differences of position.
  for (std::size_t i = 2; i < t.size(); ++i) {
    const Vec3 acc = t[i].translation - 2.0 * t[i - 1].translation + t[i - 2].translation;
    EXPECT_LT(acc.norm(), 0.15);
  }
}

TEST(Trajectory, ForwardDominantMeanStep) {
  const auto t = sample_trajectory(MotionKind::kForwardDominant, 10001, 12);
  const auto rel = geometry::relative_poses(t);
  double mean_z = 0.0;
  for (const auto& r : rel) {
    mean_z += r.translation.z() / static_cast<double>(rel.size());
    EXPECT_GE(r.translation.norm(), 0.5 - 1e-9);
    EXPECT_LE(r.translation.norm(), 1.5 + 0.06);
  }
  EXPECT_GE(mean_z, 0.5);
  EXPECT_LE(mean_z, 1.5);
}

TEST(Trajectory, DeterministicPerSeed) {
  const auto a = sample_trajectory(MotionKind::kIndoorWander, 50, 3);
  const auto b = sample_trajectory(MotionKind::kIndoorWander, 50, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].translation, b[i].translation);
    EXPECT_EQ(a[i].rotation.matrix(), b[i].rotation.matrix());
  }
}

TEST(Sequence, StrideOneMatchesConsecutiveRelative) {
  const World w = make_world(1);
  const auto traj = sample_trajectory(MotionKind::kIndoorWander, 10, 2);
  const auto k = intrinsics_profile("default", 16, 16);
  const auto s = make_sequence(w, traj, 2, 1, 4, k, 16, 16);
  ASSERT_TRUE(s.has_value());
  ASSERT_EQ(s->rel_poses_gt.size(), 1u);
  const Pose expected = traj[4].inverse() * traj[5];
  EXPECT_LT((s->rel_poses_gt[0].translation - expected.translation).norm(), 1e-12);
  EXPECT_LT((s->rel_poses_gt[0].rotation.matrix() - expected.rotation.matrix()).norm(), 1e-12);
}

TEST(Sequence, StrideThreeSpansTwentyTwoSteps) {
  const World w = make_world(1);
  const auto traj = sample_trajectory(MotionKind::kIndoorWander, 23, 2);
  const auto k = intrinsics_profile("default", 16, 16);
  const auto s = make_sequence(w, traj, 8, 3, 1, k, 16, 16);
  EXPECT_THROW(make_sequence(w, traj, 8, 3, 1, k, 16, 16).value().frames.at(8), std::out_of_range);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->frames.size(), 8u);
  EXPECT_EQ(s->abs_poses_gt.back().translation, traj[22].translation);
  EXPECT_THROW(make_sequence(w, traj, 8, 3, 2, k, 16, 16), InvalidArgumentError);
}

TEST(Sequence, RejectsLargeJump) {
  const World w = make_world(1);
  std::vector<Pose> traj(4);
  traj[2].translation = Vec3(2.0, 0, 0);
  traj[3].translation = Vec3(2.0, 0, 0);
  const auto k = intrinsics_profile("default", 16, 16);
  EXPECT_FALSE(make_sequence(w, traj, 4, 1, 0, k, 16, 16).has_value());
  traj[2].translation = Vec3(1.0, 0, 0);
  traj[3].translation = Vec3(2.0, 0, 0);
  EXPECT_TRUE(make_sequence(w, traj, 4, 1, 0, k, 16, 16).has_value());
}

TEST(Dataset, SamplesSatisfyInvariants) {
  DatasetSpec spec;
  spec.sequences = 6;
  spec.height = spec.width = 32;
  const Dataset d = generate_dataset(spec);
  ASSERT_EQ(d.samples.size(), 6u);
  for (const auto& s : d.samples) {
    ASSERT_EQ(s.frames.size(), spec.views);
    const auto t = geometry::compose_relative(s.abs_poses_gt[0], s.rel_poses_gt);
    for (std::size_t i = 0; i < s.abs_poses_gt.size(); ++i) {
      EXPECT_LT((t.poses[i].translation - s.abs_poses_gt[i].translation).norm(), 1e-9);
      EXPECT_LT((t.poses[i].rotation.matrix() - s.abs_poses_gt[i].rotation.matrix()).norm(), 1e-9);
    }
    for (const auto& r : s.rel_poses_gt) EXPECT_LE(r.translation.norm(), kMaxStepTranslation);
  }
}

TEST(Dataset, DeterministicAndRegenerable) {
  DatasetSpec spec;
  spec.sequences = 3;
  spec.height = spec.width = 16;
  const Dataset a = generate_dataset(spec), b = generate_dataset(spec);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < spec.views; ++k) {
      EXPECT_EQ(a.samples[i].frames[k].pixels, b.samples[i].frames[k].pixels);
    }
    const auto r = regenerate(a.info[i], spec);
    EXPECT_EQ(r.frames.back().pixels, a.samples[i].frames.back().pixels);
  }
}

TEST(Dataset, ForwardMotionNeedsSmallStride) {
  DatasetSpec spec;
  spec.motion = MotionKind::kForwardDominant;
  spec.sequences = 2;
  spec.height = spec.width = 16;
  spec.stride = 1;
  EXPECT_EQ(generate_dataset(spec).samples.size(), 2u);
  spec.stride = 3;  // three steps of at least 0.5 m each
  EXPECT_THROW(generate_dataset(spec), InvalidArgumentError);
}

TEST(Tum, SingleIdentityLine) {
  std::istringstream in("0.0 0 0 0 0 0 0 1\n");
  const auto t = parse_tum_trajectory(in);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.timestamps[0], 0.0);
  EXPECT_EQ(t.poses[0].translation.norm(), 0.0);
  EXPECT_EQ((t.poses[0].rotation.matrix() - geometry::Mat3::Identity()).norm(), 0.0);
}

TEST(Tum, SkipsCommentsAndBlankLines) {
  std::istringstream in("# header\n\n  # indented\n1 1 2 3 0 0 0 1\n2 0 0 0 0 0 1 0\n");
  const auto t = parse_tum_trajectory(in);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.poses[0].translation, Vec3(1, 2, 3));
  EXPECT_NEAR(t.poses[1].rotation.angle(), kPi, 1e-12);
}

TEST(Tum, SevenFieldsNamesLineOne) {
  std::istringstream in("0.0 0 0 0 0 0 1\n");
  try {
    (void)parse_tum_trajectory(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(Tum, RejectsBadInput) {
  std::istringstream non_monotone("1 0 0 0 0 0 0 1\n# c\n1 0 0 0 0 0 0 1\n");
  try {
    (void)parse_tum_trajectory(non_monotone);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream junk("0 0 0 x 0 0 0 1\n");
  EXPECT_THROW(parse_tum_trajectory(junk), ParseError);
  std::istringstream zero_q("0 0 0 0 0 0 0 0\n");
  EXPECT_THROW(parse_tum_trajectory(zero_q), ParseError);
  EXPECT_THROW(load_tum_trajectory("/nonexistent/gt.txt"), IoError);
}

TEST(Tum, RoundTripOfRandomPoses) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 10.0);
  geometry::Trajectory t;
  for (int i = 0; i < 100; ++i) {
    t.poses.push_back({geometry::random_rotation(rng, kPi), Vec3(n(rng), n(rng), n(rng))});
    t.timestamps.push_back(1e9 + 0.033 * i);
  }
  TempDir dir;
  const std::string path = (dir.path / "traj.txt").string();
  write_tum_trajectory(t, path);
  const auto back = load_tum_trajectory(path);
  ASSERT_EQ(back.size(), t.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    worst = std::max(worst, (back.poses[i].translation - t.poses[i].translation).cwiseAbs().maxCoeff());
    worst = std::max(worst, (back.poses[i].rotation.matrix() - t.poses[i].rotation.matrix()).cwiseAbs().maxCoeff());
    EXPECT_EQ(back.timestamps[i], t.timestamps[i]);
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(ImageIo, PgmAndPpmRoundTrip) {
  TempDir dir;
  Image g(3, 5, 1), c(2, 2, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& p : g.pixels) p = u(rng);
  for (auto& p : c.pixels) p = u(rng);
  write_pnm(g, (dir.path / "g.pgm").string());
  write_pnm(c, (dir.path / "c.ppm").string(), 255);
  const Image g2 = read_pnm((dir.path / "g.pgm").string());
  const Image c2 = read_pnm((dir.path / "c.ppm").string());
  ASSERT_EQ(g2.height, 3u);
  ASSERT_EQ(g2.width, 5u);
  ASSERT_EQ(c2.channels, 3u);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) EXPECT_NEAR(g2.pixels[i], g.pixels[i], 0.5 / 65535);
  for (std::size_t i = 0; i < c.pixels.size(); ++i) EXPECT_NEAR(c2.pixels[i], c.pixels[i], 0.5 / 255);
}

TEST(ImageIo, ReadsCommentsInHeader) {
  TempDir dir;
  const auto path = (dir.path / "x.pgm").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# made by hand\n2 1\n255\n";
    out.put(static_cast<char>(0));
    out.put(static_cast<char>(255));
  }
  const Image img = read_pnm(path);
  EXPECT_EQ(img.pixels, (std::vector<double>{0.0, 1.0}));
}

TEST(ImageIo, Errors) {
  TempDir dir;
  EXPECT_THROW(read_pnm((dir.path / "missing.pgm").string()), IoError);
  const auto bad = (dir.path / "bad.pgm").string();
  {
    std::ofstream out(bad);
    out << "P2\n1 1\n255\n0\n";
  }
  EXPECT_THROW(read_pnm(bad), ParseError);
  const auto truncated = (dir.path / "t.pgm").string();
  {
    std::ofstream out(truncated, std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.put('a');
  }
  EXPECT_THROW(read_pnm(truncated), ParseError);
}

TEST(ImageIo, CheckerboardAreaAverage) {
  Image img(4, 4, 1);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) img.at(r, c) = (r + c) % 2 == 0 ? 1.0 : 0.0;
  }
  const Image small = resize_area(img, 2, 2);
  for (double p : small.pixels) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(ImageIo, AreaAveragePreservesMean) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(7, 10, 1);
  for (auto& p : img.pixels) p = u(rng);
  const Image out = resize_area(img, 3, 4);
  double a = 0.0, b = 0.0;
  for (double p : img.pixels) a += p / img.pixels.size();
  for (double p : out.pixels) b += p / out.pixels.size();
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(ImageSequence, EmptyDirectoryIsValid) {
  TempDir dir;
  const auto seq = load_image_sequence(dir.path.string());
  EXPECT_TRUE(seq.frames.empty());
  EXPECT_TRUE(seq.timestamps.empty());
  EXPECT_THROW(load_image_sequence((dir.path / "nope").string()), IoError);
}

TEST(ImageSequence, SortedByTimestamp) {
  TempDir dir;
  for (int t : {2, 1, 3}) {
    write_pnm(Image(2, 2, 1, t / 10.0), (dir.path / (std::to_string(t) + ".pgm")).string(), 255);
  }
  const auto seq = load_image_sequence(dir.path.string());
  ASSERT_EQ(seq.timestamps, (std::vector<double>{1, 2, 3}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(seq.frames[i].pixels[0], (i + 1) / 10.0, 0.5 / 255);
}

TEST(ImageSequence, ResizesAndRejectsMixedChannels) {
  TempDir dir;
  write_pnm(Image(8, 8, 1, 0.5), (dir.path / "0.5.pgm").string());
  auto seq = load_image_sequence(dir.path.string(), 4, 4);
  EXPECT_EQ(seq.frames[0].height, 4u);
  write_pnm(Image(8, 8, 3, 0.5), (dir.path / "1.ppm").string());
  EXPECT_THROW(load_image_sequence(dir.path.string()), InvalidArgumentError);
  std::ofstream((dir.path / "frame.pgm").string()) << "x";
  EXPECT_THROW(load_image_sequence(dir.path.string()), ParseError);
}

TEST(Manifest, SpecParsingRejectsUnknownKeys) {
  const auto s = dataset_spec_from_json(R"({"sequences": 3, "motion": "forward_dominant"})");
  EXPECT_EQ(s.sequences, 3u);
  EXPECT_EQ(s.motion, MotionKind::kForwardDominant);
  EXPECT_EQ(s.views, DatasetSpec{}.views);
  EXPECT_THROW(dataset_spec_from_json(R"({"sequencez": 3})"), ConfigError);
  EXPECT_THROW(dataset_spec_from_json(R"({"intrinsics": "fisheye"})"), ConfigError);
  EXPECT_THROW(dataset_spec_from_json("{"), ConfigError);
  const auto again = dataset_spec_from_json(dataset_spec_to_json(s));
  EXPECT_EQ(again.sequences, s.sequences);
}

TEST(Manifest, DatasetDirectoryRoundTrip) {
  TempDir dir;
  DatasetSpec spec;
  spec.sequences = 2;
  spec.height = spec.width = 16;
  const Dataset d = generate_dataset(spec);
  write_dataset(d, dir.path.string());
  const Dataset back = load_dataset(dir.path.string());
  ASSERT_EQ(back.samples.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.info[i].id, d.info[i].id);
    EXPECT_EQ(back.info[i].world_seed, d.info[i].world_seed);
    const auto& a = d.samples[i];
    const auto& b = back.samples[i];
    ASSERT_EQ(b.frames.size(), a.frames.size());
    for (std::size_t k = 0; k < a.frames.size(); ++k) {
      for (std::size_t j = 0; j < a.frames[k].pixels.size(); ++j) {
        EXPECT_NEAR(b.frames[k].pixels[j], a.frames[k].pixels[j], 0.5 / 65535);
      }
    }
    for (std::size_t k = 0; k < a.rel_poses_gt.size(); ++k) {
      EXPECT_LT((b.rel_poses_gt[k].translation - a.rel_poses_gt[k].translation).norm(), 1e-9);
    }
    // Stored ground truth starts at the identity.
    EXPECT_LT(b.abs_poses_gt[0].translation.norm(), 1e-12);
  }
  EXPECT_NO_THROW(load_sequence(dir.path.string(), d.info[1].id));
  EXPECT_THROW(load_sequence(dir.path.string(), "seq_999"), InvalidArgumentError);
}
