#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "support/naive_metrics.hpp"
#include "vot/errors.hpp"
#include "vot/eval.hpp"

using namespace vot;
using namespace vot::eval;
using geometry::Pose;
using geometry::Rotation;
using geometry::Vec3;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Trajectory make(std::vector<Pose> poses) {
  Trajectory t;
  t.poses = std::move(poses);
  for (std::size_t i = 0; i < t.poses.size(); ++i) t.timestamps.push_back(static_cast<double>(i));
  return t;
}

Trajectory transformed(const Trajectory& t, const Pose& left) {
  Trajectory out = t;
  for (auto& p : out.poses) p = left * p;
  return out;
}

}  // namespace

TEST(Ate, Examples) {
  std::mt19937_64 rng(1);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 10);
  EXPECT_EQ(ate(gt, gt), 0.0);
  Trajectory shifted = gt;
  for (auto& p : shifted.poses) p.translation += Vec3(1, 0, 0);
  EXPECT_NEAR(ate(gt, shifted), 1.0, 1e-12);
  Trajectory alternating = gt;
  for (std::size_t i = 0; i < gt.size(); i += 2) alternating.poses[i].translation += Vec3(1, 0, 0);
  EXPECT_NEAR(ate(gt, alternating), std::sqrt(0.5), 1e-12);
}

TEST(Ate, Errors) {
  std::mt19937_64 rng(1);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 5);
  Trajectory shorter = est;
  shorter.poses.pop_back();
  shorter.timestamps.pop_back();
  EXPECT_THROW(ate(gt, shorter), EvalError);
  EXPECT_THROW(are(gt, shorter), EvalError);
  EXPECT_THROW(ate(Trajectory{}, Trajectory{}), EvalError);
}

TEST(Are, Examples) {
  std::mt19937_64 rng(2);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 8);
  EXPECT_EQ(are(gt, gt), 0.0);
  const Rotation rz = Rotation::about_axis(Vec3::UnitZ(), 10.0 * kDeg);
  Trajectory rotated = gt;
  for (auto& p : rotated.poses) p.rotation = p.rotation * rz;
  EXPECT_NEAR(are(gt, rotated), 10.0, 1e-9);
  Trajectory half = gt;
  for (std::size_t i = 0; i < gt.size(); i += 2) half.poses[i].rotation = half.poses[i].rotation * rz;
  EXPECT_NEAR(are(gt, half), 10.0 / std::sqrt(2.0), 1e-9);
}

TEST(AbsoluteMetrics, Symmetric) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 12);
    EXPECT_NEAR(ate(gt, est), ate(est, gt), 1e-12);
    EXPECT_NEAR(are(gt, est), are(est, gt), 1e-9);
  }
}

TEST(RelativeMetrics, IdenticalIsZero) {
  std::mt19937_64 rng(4);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 20);
  for (const auto seg : {Segment::per_frame_pair(), Segment::per_meter(0.5)}) {
    const auto r = rte_rre(gt, gt, seg);
    EXPECT_NEAR(r.rte_m, 0.0, 1e-12);
    EXPECT_NEAR(r.rre_deg, 0.0, 1e-6);
  }
}

TEST(RelativeMetrics, GlobalOffsetDoesNotMatter) {
  std::mt19937_64 rng(5);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 15);
  const Pose offset{Rotation::about_axis(Vec3(1, 2, 3).normalized(), 0.7), Vec3(4, -1, 2)};
  const auto r = rte_rre(gt, transformed(gt, offset), Segment::per_frame_pair());
  EXPECT_NEAR(r.rte_m, 0.0, 1e-12);
  EXPECT_NEAR(r.rre_deg, 0.0, 1e-6);
  // Same left transform on both chains leaves the errors unchanged.
  const auto a = rte_rre(gt, est, Segment::per_frame_pair());
  const auto b = rte_rre(transformed(gt, offset), transformed(est, offset), Segment::per_frame_pair());
  EXPECT_NEAR(a.rte_m, b.rte_m, 1e-12);
  EXPECT_NEAR(a.rre_deg, b.rre_deg, 1e-9);
}

TEST(RelativeMetrics, StraightLineScaleError) {
  std::vector<Pose> g, e;
  for (int i = 0; i < 60; ++i) {
    g.push_back({Rotation(), Vec3(0, 0, 0.1 * i)});
    e.push_back({Rotation(), Vec3(0, 0, 0.101 * i)});
  }
  const Trajectory gt = make(g), est = make(e);
  const auto r = rte_rre(gt, est, Segment::per_meter(1.0));
  const auto oracle = vot::testing::naive_metrics(gt, est, true, 1.0);
  EXPECT_NEAR(r.rte_m, oracle.rte, 1e-12);
  EXPECT_NEAR(r.rte_m, 0.01, 1.5e-3);
  EXPECT_EQ(r.rre_deg, 0.0);
}

TEST(RelativeMetrics, TooShortForASegment) {
  const Trajectory gt = make({Pose(), Pose{Rotation(), Vec3(0.1, 0, 0)}});
  EXPECT_THROW(rte_rre(gt, gt, Segment::per_meter(1.0)), EvalError);
  EXPECT_THROW(rte_rre(make({Pose()}), make({Pose()}), Segment::per_frame_pair()), EvalError);
  EXPECT_NO_THROW(rte_rre(gt, gt, Segment::per_frame_pair()));
}

TEST(RelativeMetrics, TimestampScalingIrrelevant) {
  std::mt19937_64 rng(6);
  auto [gt, est] = vot::testing::random_trajectory_pair(rng, 20);
  const auto before = evaluate(gt, est);
  for (auto& t : gt.timestamps) t *= 1000.0;
  for (auto& t : est.timestamps) t *= 1000.0;
  EXPECT_EQ(evaluate(gt, est), before);
}

TEST(Segment, DescribeAndParse) {
  EXPECT_EQ(Segment::per_frame_pair().describe(), "per_frame_pair");
  EXPECT_EQ(Segment::per_meter(1.0).describe(), "per_meter(1)");
  EXPECT_EQ(Segment::parse("per_meter").length, 1.0);
  EXPECT_EQ(Segment::parse("per_meter(2.5)").length, 2.5);
  EXPECT_EQ(Segment::parse("per_frame_pair").kind, Segment::Kind::kPerFramePair);
  EXPECT_THROW(Segment::parse("per_second"), InvalidArgumentError);
  EXPECT_THROW(Segment::parse("per_meter(-1)"), InvalidArgumentError);
}

TEST(Umeyama, RecoversRigidTransform) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10; ++k) {
    const auto [gt, unused] = vot::testing::random_trajectory_pair(rng, 10);
    const Pose s{geometry::random_rotation(rng, std::numbers::pi), Vec3(1.0 * k, 2.0, -3.0)};
    const Trajectory est = transformed(gt, s);
    const auto al = umeyama_align(gt, est, AlignMode::kSe3);
    const Pose inv = s.inverse();
    EXPECT_LT((al.transform.rotation - inv.rotation.matrix()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((al.transform.translation - inv.translation).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(al.transform.scale, 1.0, 1e-12);
    EXPECT_LT(ate(gt, al.aligned), 1e-9);
    EXPECT_LT(are(gt, al.aligned), 1e-5);
  }
}

TEST(Umeyama, RecoversScale) {
  std::mt19937_64 rng(8);
  const auto [gt, unused] = vot::testing::random_trajectory_pair(rng, 10);
  Trajectory est = gt;
  for (auto& p : est.poses) p.translation *= 2.0;
  const auto al = umeyama_align(gt, est, AlignMode::kSim3);
  EXPECT_NEAR(al.transform.scale, 0.5, 1e-9);
  const auto back = umeyama_align(est, gt, AlignMode::kSim3);
  EXPECT_NEAR(back.transform.scale, 2.0, 1e-9);
  EXPECT_LT(ate(gt, al.aligned), 1e-9);
}

TEST(Umeyama, NeverIncreasesAte) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 12);
    const double raw = ate(gt, est);
    EXPECT_LE(ate(gt, umeyama_align(gt, est, AlignMode::kSe3).aligned), raw + 1e-12);
    EXPECT_LE(ate(gt, umeyama_align(gt, est, AlignMode::kSim3).aligned), raw + 1e-12);
  }
}

TEST(Umeyama, RigidModePreservesDistances) {
  std::mt19937_64 rng(10);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 12);
  const auto al = umeyama_align(gt, est, AlignMode::kSe3);
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      EXPECT_NEAR((al.aligned.poses[i].translation - al.aligned.poses[j].translation).norm(),
                  (est.poses[i].translation - est.poses[j].translation).norm(), 1e-9);
    }
  }
}

TEST(Umeyama, DegenerateInputs) {
  std::vector<Pose> line;
  for (int i = 0; i < 5; ++i) line.push_back({Rotation(), Vec3(i, 2.0 * i, 0)});
  EXPECT_THROW(umeyama_align(make(line), make(line), AlignMode::kSim3), DegenerateInputError);
  std::vector<Pose> same(4, Pose{Rotation(), Vec3(1, 1, 1)});
  EXPECT_THROW(umeyama_align(make(same), make(same), AlignMode::kSe3), DegenerateInputError);
  EXPECT_THROW(umeyama_align(make({Pose(), Pose{Rotation(), Vec3(1, 0, 0)}}),
                             make({Pose(), Pose{Rotation(), Vec3(1, 0, 0)}}), AlignMode::kSe3),
               DegenerateInputError);
}

TEST(Evaluate, IdenticalIsAllZeros) {
  std::mt19937_64 rng(11);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 30);
  const auto r = evaluate(gt, gt, {std::nullopt, Segment::per_frame_pair()});
  EXPECT_EQ(r.ate_m, 0.0);
  EXPECT_EQ(r.are_deg, 0.0);
  EXPECT_NEAR(r.rte_m, 0.0, 1e-12);
  EXPECT_NEAR(r.rre_deg, 0.0, 1e-6);
  EXPECT_FALSE(r.aligned);
  EXPECT_EQ(r.segment_definition, "per_frame_pair");
}

TEST(Evaluate, MatchesNaiveOracle) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 25);
    for (bool per_meter : {false, true}) {
      const auto seg = per_meter ? Segment::per_meter(1.0) : Segment::per_frame_pair();
      const auto r = evaluate(gt, est, {std::nullopt, seg});
      const auto o = vot::testing::naive_metrics(gt, est, per_meter, 1.0);
      EXPECT_NEAR(r.ate_m, o.ate, 1e-9);
      EXPECT_NEAR(r.are_deg, o.are, 1e-9);
      EXPECT_NEAR(r.rte_m, o.rte, 1e-9);
      EXPECT_NEAR(r.rre_deg, o.rre, 1e-9);
    }
  }
}

TEST(Evaluate, AlignedReport) {
  std::mt19937_64 rng(13);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 20);
  const auto r = evaluate(gt, est, {AlignMode::kSim3, Segment::per_meter()});
  EXPECT_TRUE(r.aligned);
  EXPECT_EQ(r.alignment, "sim3");
  EXPECT_LE(r.ate_m, evaluate(gt, est).ate_m + 1e-12);
}

TEST(MetricReport, JsonRoundTrip) {
  std::mt19937_64 rng(14);
  const auto [gt, est] = vot::testing::random_trajectory_pair(rng, 20);
  const auto r = evaluate(gt, est, {AlignMode::kSe3, Segment::per_meter(0.5)});
  EXPECT_EQ(MetricReport::from_json(r.to_json()), r);
  EXPECT_THROW(MetricReport::from_json("{\"ate_m\": 1}"), ParseError);
  EXPECT_THROW(MetricReport::from_json("not json"), ParseError);
}

TEST(MetricReport, CsvColumns) {
  std::ostringstream out;
  MetricReport r;
  r.segment_definition = "per_meter(1)";
  write_metrics_csv(out, {{"seq_000", r}});
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "name,ATE[m],ARE[deg],RTE[m],RRE[deg],aligned,segment");
  EXPECT_NE(s.find("seq_000,"), std::string::npos);
}
