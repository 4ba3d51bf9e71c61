//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "comove/detections.hpp"
#include "comove/geometry.hpp"
#include "comove/timing.hpp"

namespace comove {

struct DltOptions {
  // Isotropic pixel conditioning before solving (off by default: the rig
  // is a well-conditioned two-view problem).
  bool normalize = false;
};

// Linear two-view triangulation: the right singular vector of the stacked
// 4x4 system for the smallest singular value, dehomogenized.
//
// Throws kDegenerateGeometry when the two viewing rays are parallel within
// 1e-10 rad and kBehindCamera when the solution has negative depth in
// either camera.
Vec3 triangulate_dlt(const Mat34& P_left, const Mat34& P_right, const Vec2& q_left,
                     const Vec2& q_right, const DltOptions& options = {});

// Same, with the image points given as homogeneous 3-vectors.
Vec3 triangulate_dlt(const Mat34& P_left, const Mat34& P_right, const Vec3& q_left,
                     const Vec3& q_right, const DltOptions& options = {});

// Depth of a point for a rig with zero pitch and roll:
//   Z = focal * baseline / (disparity - (yaw_diff + stage_diff) * focal)
// with disparity = u_L - u_R, yaw_diff = yaw_R - yaw_L and
// stage_diff = phi_R - phi_L. First order in the angles.
double z_closed_form(double focal_px, double baseline_m, double disparity_px,
                     double yaw_diff_rad, double stage_diff_rad);

struct Trajectory3D {
  int target_id = 0;
  std::vector<std::int64_t> frames;
  std::vector<double> times_s;
  std::vector<Vec3> points_m;

  std::size_t size() const { return frames.size(); }
};

struct ReconstructOptions {
  bool undistort = true;
  DltOptions dlt;
};

// Frame-by-frame triangulation with per-frame stage angles interpolated at
// the camera times. Targets seen by one camera only are skipped for that
// frame. Errors carry the frame and target that caused them.
std::vector<Trajectory3D> reconstruct_sequence(const DetectionSet& detections,
                                               const RigConfig& rig,
                                               const StageLog& left_log,
                                               const StageLog& right_log,
                                               const TimingConfig& timing,
                                               const ReconstructOptions& options = {});

struct PairReport {
  int target_a = 0;
  int target_b = 0;
  double measured_m = 0.0;
  std::vector<std::int64_t> frames;
  std::vector<double> times_s;
  std::vector<double> reconstructed_m;
  std::vector<double> rel_err;  // (reconstructed - measured) / measured
  double zbar_m = 0.0;          // mean over frames of the pair's mean Z
  double mean_rel_err = 0.0;
  double std_rel_err = 0.0;     // sample standard deviation over frames

  std::size_t n_frames() const { return frames.size(); }
};

struct DistanceReport {
  std::vector<PairReport> pairs;  // ordered by (target_a, target_b)

  double max_abs_mean_rel_err() const;
};

// All unordered target pairs with common frames. Throws kMissingTruth when a
// pair has no measured distance.
DistanceReport pairwise_report(const std::vector<Trajectory3D>& trajectories,
                               const std::map<std::pair<int, int>, double>& measured_m);

}  // namespace comove
