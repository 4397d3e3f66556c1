#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vot/geometry.hpp"

/// Trajectory error metrics. Trajectories are compared frame by frame by
/// index; timestamps are ignored. Rotation errors are reported in degrees.
namespace vot::eval {

using geometry::Trajectory;

/// sqrt(mean ‖t_gt - t_est‖²) in meters. Throws vot::EvalError when the
/// lengths differ or a trajectory is empty.
double ate(const Trajectory& gt, const Trajectory& est);

/// sqrt(mean geodesic_angle(R_gt, R_est)²) in degrees.
double are(const Trajectory& gt, const Trajectory& est);

/// How relative errors are grouped.
///  * per_frame_pair: every consecutive pair (i, i+1).
///  * per_meter(L): for each start frame i, the first later frame j whose
///    ground-truth path length from i exceeds L; starts with no such j are
///    skipped.
struct Segment {
  enum class Kind { kPerFramePair, kPerMeter };
  Kind kind = Kind::kPerMeter;
  double length = 1.0;

  static Segment per_frame_pair() { return {Kind::kPerFramePair, 0.0}; }
  static Segment per_meter(double length = 1.0) { return {Kind::kPerMeter, length}; }

  /// "per_frame_pair" or "per_meter(<L>)".
  std::string describe() const;
  /// Accepts describe() output and the bare name "per_meter" (L = 1).
  static Segment parse(const std::string& s);
};

struct RelativeErrors {
  double rte_m = 0.0;
  double rre_deg = 0.0;
  std::size_t segments = 0;
};

/// RMSE over segments of ‖trans(E)‖ and angle(E), with
/// E = (gt_i⁻¹ gt_j)⁻¹ (est_i⁻¹ est_j). Throws vot::EvalError with code
/// "eval" when no segment fits in the trajectory.
RelativeErrors rte_rre(const Trajectory& gt, const Trajectory& est,
                       const Segment& segment = Segment::per_meter());

enum class AlignMode { kSe3, kSim3 };
std::string to_string(AlignMode m);
AlignMode align_mode_from_string(const std::string& s);

/// x ↦ scale * rotation * x + translation, applied to estimated poses as
/// (R, t) ↦ (rotation R, scale * rotation t + translation).
struct Similarity {
  geometry::Mat3 rotation = geometry::Mat3::Identity();
  geometry::Vec3 translation = geometry::Vec3::Zero();
  double scale = 1.0;

  geometry::Pose apply(const geometry::Pose& p) const;
};

struct Alignment {
  Trajectory aligned;
  Similarity transform;
};

/// Least-squares fit of the estimated positions onto the ground truth
/// (Umeyama). se3 fixes the scale at 1. Throws vot::DegenerateInputError
/// when fewer than three positions are given or they are collinear or
/// coincident.
Alignment umeyama_align(const Trajectory& gt, const Trajectory& est, AlignMode mode);

struct EvalOptions {
  std::optional<AlignMode> align;  // unaligned by default
  Segment segment = Segment::per_meter();
};

struct MetricReport {
  double ate_m = 0.0;
  double are_deg = 0.0;
  double rte_m = 0.0;
  double rre_deg = 0.0;
  bool aligned = false;
  std::string alignment = "none";
  std::string segment_definition;

  std::string to_json() const;
  /// Throws vot::ParseError on malformed input.
  static MetricReport from_json(const std::string& text);
  bool operator==(const MetricReport&) const = default;
};

/// All four metrics. Throws vot::EvalError if any result is not finite.
MetricReport evaluate(const Trajectory& gt, const Trajectory& est,
                      const EvalOptions& options = {});

/// CSV with columns name,ATE[m],ARE[deg],RTE[m],RRE[deg],aligned,segment.
void write_metrics_csv(std::ostream& out,
                       const std::vector<std::pair<std::string, MetricReport>>& rows);

}  // namespace vot::eval
