#pragma once

#include "kf/flow.hpp"
#include "kf/kahler.hpp"
#include "kf/monotonicity.hpp"

#include <filesystem>
#include <string>

namespace kf {

// KF-TRAJ v1 checkpoint layout (one directory per trajectory):
//   manifest.kft   header, termination reason, config echo, snapshot index
//   snap_NNNNNN.kfm  one KF-MESH v1 file per snapshot
//   summary.csv    t, area, max_A2, min_cos_alpha, max_H, remesh_flag
// s_axis marks stacks whose time axis is the rescaled s variable.
struct TrajectoryBundle {
  FlowTrajectory traj;
  std::string config_echo;
  bool s_axis = false;
};

void write_trajectory(const std::filesystem::path& dir, const FlowTrajectory& traj,
                      const std::string& config_echo, bool s_axis = false);
TrajectoryBundle read_trajectory(const std::filesystem::path& dir);

void write_summary_csv(const std::filesystem::path& path, const FlowTrajectory& traj);

// Trace CSV: s, phi, term_shrinker, term_grad, under_resolved_flag.
void write_trace_csv(const std::filesystem::path& path, const DensityTrace& trace);

// Angle CSV: face_id, cos_alpha, beta, branch_flag.
void write_angles_csv(const std::filesystem::path& path, const AngleField& angles);

}  // namespace kf
