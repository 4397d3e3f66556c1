#pragma once

#include <string>
#include <vector>

#include "vot/decoder.hpp"
#include "vot/geometry.hpp"

namespace vot::tools {

/// Top-down (x, z) SVG of one or two trajectories: ground truth as a solid
/// dark line, the estimate dashed, and a circle at the first ground-truth
/// position.
std::string trajectory_svg(const geometry::Trajectory& gt, const geometry::Trajectory* est);

/// Writes one PGM per attention map, showing the camera token's attention
/// over the patch grid, scaled up by `zoom` and normalized to its maximum.
/// Returns the written paths.
std::vector<std::string> write_attention_maps(const std::vector<decoder::AttentionMap>& maps,
                                              std::size_t grid_h, std::size_t grid_w,
                                              std::size_t zoom, const std::string& dir);

}  // namespace vot::tools
