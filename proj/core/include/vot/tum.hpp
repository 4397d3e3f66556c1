#pragma once

#include <iosfwd>
#include <string>

#include "vot/geometry.hpp"

namespace vot::data {

/// Reads `timestamp tx ty tz qx qy qz qw` lines. Blank lines and lines whose
/// first non-space character is '#' are skipped. Throws vot::ParseError
/// (carrying the 1-based line number) on a malformed line or a timestamp that
/// does not strictly increase, and vot::IoError when the file cannot be read.
geometry::Trajectory load_tum_trajectory(const std::string& path);
geometry::Trajectory parse_tum_trajectory(std::istream& in);

/// Writes with 17 significant digits so that a reload reproduces every pose
/// to within 1e-9.
void write_tum_trajectory(const geometry::Trajectory& traj, const std::string& path);
void write_tum_trajectory(const geometry::Trajectory& traj, std::ostream& out);

}  // namespace vot::data
