#include "vot/tum.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "vot/errors.hpp"

namespace vot::data {

using geometry::Pose;
using geometry::Trajectory;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> fields;
  std::string f;
  while (ss >> f) fields.push_back(f);
  return fields;
}

double parse_number(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": '" + s +
                         "' is not a finite number",
                     line);
  }
  return v;
}

}  // namespace

Trajectory parse_tum_trajectory(std::istream& in) {
  Trajectory traj;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != 8) {
      throw ParseError("line " + std::to_string(number) + ": expected 8 fields " +
                           "(timestamp tx ty tz qx qy qz qw), got " +
                           std::to_string(fields.size()),
                       number);
    }
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = parse_number(fields[i], number);
    if (!traj.timestamps.empty() && v[0] <= traj.timestamps.back()) {
      throw ParseError("line " + std::to_string(number) + ": timestamp " +
                           fields[0] + " does not increase",
                       number);
    }
    Pose p;
    p.translation = geometry::Vec3(v[1], v[2], v[3]);
    try {
      p.rotation = geometry::quat_to_rot({v[7], v[4], v[5], v[6]}).rotation;
    } catch (const DegenerateInputError&) {
      throw ParseError("line " + std::to_string(number) + ": zero quaternion",
                       number);
    }
    traj.poses.push_back(p);
    traj.timestamps.push_back(v[0]);
  }
  return traj;
}

Trajectory load_tum_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file '" + path + "'");
  try {
    return parse_tum_trajectory(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

void write_tum_trajectory(const Trajectory& traj, std::ostream& out) {
  traj.validate();
  char buf[512];
  out << "# timestamp tx ty tz qx qy qz qw\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& t = traj.poses[i].translation;
    const auto q = geometry::rot_to_quat(traj.poses[i].rotation);
    std::snprintf(buf, sizeof buf,
                  "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  traj.timestamps[i], t.x(), t.y(), t.z(), q.x, q.y, q.z, q.w);
    out << buf;
  }
}

void write_tum_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trajectory file '" + path + "'");
  write_tum_trajectory(traj, out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace vot::data
