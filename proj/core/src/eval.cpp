#include "vot/eval.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <ostream>

#include "vot/errors.hpp"
#include "vot/numerics/svd3.hpp"

namespace vot::eval {

using geometry::Mat3;
using geometry::Pose;
using geometry::Vec3;

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

void check_pair(const Trajectory& gt, const Trajectory& est) {
  if (gt.size() == 0) throw EvalError("empty ground-truth trajectory");
  if (gt.size() != est.size()) {
    throw EvalError("trajectory lengths differ: ground truth has " +
                    std::to_string(gt.size()) + " poses, estimate has " +
                    std::to_string(est.size()));
  }
}

}  // namespace

double ate(const Trajectory& gt, const Trajectory& est) {
  check_pair(gt, est);
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    acc += (gt.poses[i].translation - est.poses[i].translation).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(gt.size()));
}

double are(const Trajectory& gt, const Trajectory& est) {
  check_pair(gt, est);
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double a = geometry::geodesic_angle(gt.poses[i].rotation, est.poses[i].rotation);
    acc += a * a;
  }
  return std::sqrt(acc / static_cast<double>(gt.size())) * kRadToDeg;
}

std::string Segment::describe() const {
  if (kind == Kind::kPerFramePair) return "per_frame_pair";
  char buf[64];
  std::snprintf(buf, sizeof buf, "per_meter(%g)", length);
  return buf;
}

Segment Segment::parse(const std::string& s) {
  if (s == "per_frame_pair") return per_frame_pair();
  if (s == "per_meter") return per_meter();
  const std::string prefix = "per_meter(";
  if (s.size() > prefix.size() + 1 && s.compare(0, prefix.size(), prefix) == 0 &&
      s.back() == ')') {
    const std::string num = s.substr(prefix.size(), s.size() - prefix.size() - 1);
    char* end = nullptr;
    const double l = std::strtod(num.c_str(), &end);
    if (end != num.c_str() && *end == '\0' && l > 0 && std::isfinite(l)) {
      return per_meter(l);
    }
  }
  throw InvalidArgumentError("unknown segment '" + s +
                             "' (expected per_frame_pair or per_meter(<L>))");
}

RelativeErrors rte_rre(const Trajectory& gt, const Trajectory& est,
                       const Segment& segment) {
  check_pair(gt, est);
  if (segment.kind == Segment::Kind::kPerMeter && !(segment.length > 0)) {
    throw InvalidArgumentError("segment length must be positive");
  }
  const std::size_t n = gt.size();
  std::vector<double> step(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    step[i] = (gt.poses[i].translation - gt.poses[i - 1].translation).norm();
  }
  RelativeErrors out;
  double t_acc = 0.0, r_acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + 1;
    if (segment.kind == Segment::Kind::kPerMeter) {
      double path = step[j];
      while (!(path > segment.length) && ++j < n) path += step[j];
      if (j == n) break;
    }
    const Pose rel_gt = gt.poses[i].inverse() * gt.poses[j];
    const Pose rel_est = est.poses[i].inverse() * est.poses[j];
    // E = rel_gt⁻¹ rel_est, written so that equal inputs give exactly zero.
    t_acc += (rel_gt.rotation.matrix().transpose() * (rel_est.translation - rel_gt.translation))
                 .squaredNorm();
    const double a = geometry::geodesic_angle(rel_gt.rotation, rel_est.rotation);
    r_acc += a * a;
    ++out.segments;
  }
  if (out.segments == 0) {
    throw EvalError("trajectory is shorter than one " + segment.describe() +
                    " segment (empty segment set)");
  }
  out.rte_m = std::sqrt(t_acc / static_cast<double>(out.segments));
  out.rre_deg = std::sqrt(r_acc / static_cast<double>(out.segments)) * kRadToDeg;
  return out;
}

std::string to_string(AlignMode m) { return m == AlignMode::kSe3 ? "se3" : "sim3"; }

AlignMode align_mode_from_string(const std::string& s) {
  if (s == "se3") return AlignMode::kSe3;
  if (s == "sim3") return AlignMode::kSim3;
  throw InvalidArgumentError("unknown alignment '" + s + "' (expected se3 or sim3)");
}

Pose Similarity::apply(const Pose& p) const {
  Pose out;
  out.rotation = geometry::Rotation::from_matrix_unchecked(rotation * p.rotation.matrix());
  out.translation = scale * (rotation * p.translation) + translation;
  return out;
}

Alignment umeyama_align(const Trajectory& gt, const Trajectory& est, AlignMode mode) {
  check_pair(gt, est);
  const std::size_t n = gt.size();
  if (n < 3) {
    throw DegenerateInputError("alignment needs at least 3 poses, got " +
                               std::to_string(n));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Vec3 mu_x = Vec3::Zero(), mu_y = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_x += est.poses[i].translation;
    mu_y += gt.poses[i].translation;
  }
  mu_x *= inv_n;
  mu_y *= inv_n;
  Mat3 sigma = Mat3::Zero(), cov_x = Mat3::Zero();
  double var_x = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 dx = est.poses[i].translation - mu_x;
    const Vec3 dy = gt.poses[i].translation - mu_y;
    sigma += dy * dx.transpose();
    cov_x += dx * dx.transpose();
    var_x += dx.squaredNorm();
  }
  sigma *= inv_n;
  cov_x *= inv_n;
  var_x *= inv_n;
  const Vec3 ev = Eigen::SelfAdjointEigenSolver<Mat3>(cov_x).eigenvalues();
  if (!(ev[2] > 1e-18) || ev[1] <= 1e-10 * ev[2]) {
    throw DegenerateInputError("alignment input positions are collinear or coincident");
  }
  const auto svd = numerics::svd3(sigma);
  Mat3 s = Mat3::Identity();
  if (svd.u.determinant() * svd.v.determinant() < 0) s(2, 2) = -1.0;
  Similarity t;
  t.rotation = svd.u * s * svd.v.transpose();
  if (mode == AlignMode::kSim3) {
    t.scale = (svd.singular_values.asDiagonal() * s).trace() / var_x;
  }
  t.translation = mu_y - t.scale * t.rotation * mu_x;
  Alignment out;
  out.transform = t;
  out.aligned.timestamps = est.timestamps;
  for (const auto& p : est.poses) out.aligned.poses.push_back(t.apply(p));
  return out;
}

MetricReport evaluate(const Trajectory& gt, const Trajectory& est,
                      const EvalOptions& options) {
  check_pair(gt, est);
  MetricReport r;
  const Trajectory* e = &est;
  Alignment aligned;
  if (options.align) {
    aligned = umeyama_align(gt, est, *options.align);
    e = &aligned.aligned;
    r.aligned = true;
    r.alignment = to_string(*options.align);
  }
  r.ate_m = ate(gt, *e);
  r.are_deg = are(gt, *e);
  const auto rel = rte_rre(gt, *e, options.segment);
  r.rte_m = rel.rte_m;
  r.rre_deg = rel.rre_deg;
  r.segment_definition = options.segment.describe();
  for (double v : {r.ate_m, r.are_deg, r.rte_m, r.rre_deg}) {
    if (!std::isfinite(v)) throw EvalError("non-finite metric value");
  }
  return r;
}

std::string MetricReport::to_json() const {
  const nlohmann::json j = {{"ate_m", ate_m},
                            {"are_deg", are_deg},
                            {"rte_m", rte_m},
                            {"rre_deg", rre_deg},
                            {"aligned", aligned},
                            {"alignment", alignment},
                            {"segment_definition", segment_definition}};
  return j.dump(2) + "\n";
}

MetricReport MetricReport::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricReport r;
    r.ate_m = j.at("ate_m").get<double>();
    r.are_deg = j.at("are_deg").get<double>();
    r.rte_m = j.at("rte_m").get<double>();
    r.rre_deg = j.at("rre_deg").get<double>();
    r.aligned = j.at("aligned").get<bool>();
    r.alignment = j.at("alignment").get<std::string>();
    r.segment_definition = j.at("segment_definition").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metric report: ") + e.what());
  }
}

void write_metrics_csv(std::ostream& out,
                       const std::vector<std::pair<std::string, MetricReport>>& rows) {
  out << "name,ATE[m],ARE[deg],RTE[m],RRE[deg],aligned,segment\n";
  char buf[256];
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", r.ate_m, r.are_deg,
                  r.rte_m, r.rre_deg);
    out << name << ',' << buf << ',' << (r.aligned ? r.alignment : "none") << ','
        << r.segment_definition << '\n';
  }
}

}  // namespace vot::eval
