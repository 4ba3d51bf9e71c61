//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "comove/detections.hpp"
#include "comove/geometry.hpp"
#include "comove/timing.hpp"

namespace comove {

enum class MotionMode { kStill, kConstantSpeed, kPeriodic, kSinusoid };

// Kinematic stage motion. Periodic sweeps between +amplitude and -amplitude
// with a trapezoidal velocity profile; Sinusoid uses amplitude and v_max to
// set the angular frequency. Every mode holds home (0 rad) for lead_still_s
// before moving.
struct MotionProfile {
  MotionMode mode = MotionMode::kStill;
  double amplitude_rad = 0.0;
  double v_max_rad_s = 0.0;
  double a_max_rad_s2 = 0.0;
  double speed_rad_s = 0.0;  // kConstantSpeed only
  double lead_still_s = 0.0;

  static MotionProfile Still();
  static MotionProfile ConstantSpeed(double speed_rad_s, double lead_still_s = 0.0);
  static MotionProfile Periodic(double amplitude_rad, double v_max_rad_s,
                                double a_max_rad_s2, double lead_still_s = 0.0);
  static MotionProfile Sinusoid(double amplitude_rad, double v_max_rad_s,
                                double lead_still_s = 0.0);
  // "slow", "moderate" or "fast"; throws kConfig otherwise.
  static MotionProfile Preset(const std::string& name, double lead_still_s = 0.0);

  // Duration of one full oscillation (0 for non-periodic modes).
  double period_s() const;
  // Time at which the first positive maximum is reached.
  double first_peak_s() const;

  void Validate() const;
};

// Exact angle of the profile at time t (stage clock, t = 0 at the first
// stage sample).
double profile_angle(const MotionProfile& profile, double t);

// Samples the profile at `rate_hz` over [0, duration_s]. Periodic modes need
// at least one period of motion.
StageLog generate_profile(const MotionProfile& profile, double rate_hz,
                          double duration_s,
                          const std::string& stage_id = "stage");

struct Target {
  int id = 0;
  Vec3 position_m = Vec3::Zero();
};

struct Scene {
  std::vector<Target> targets;
  RigConfig rig;
  TimingConfig timing;
  MotionProfile left_motion;
  MotionProfile right_motion;
  double noise_sigma_px = 0.1;
  // Standard deviation of the camera trigger time around its nominal value.
  double frame_jitter_s = 0.0;
  double duration_s = 1.0;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Calibration errors: the difference between what the reconstruction
// believes and what the simulator used.
struct ErrorInjection {
  double delta_baseline_m = 0.0;
  double delta_yaw_rad = 0.0;  // added to the right camera's yaw
  double delta_focal_left_px = 0.0;
  double delta_focal_right_px = 0.0;
  double delta_offset_s = 0.0;
  // Random home position error of each stage, drawn once per acquisition.
  double home_jitter_sigma_rad = 0.0;

  void Validate() const;
};

using PairKey = std::pair<int, int>;

struct GroundTruth {
  std::vector<Target> targets;
  // Laser-style measurement: unordered pairs (a < b), quantized to 1 mm.
  std::map<PairKey, double> distances_m;
};

struct SimulationResult {
  DetectionSet detections;
  StageLog left_log;
  StageLog right_log;
  GroundTruth truth;
  // Actual home angle of each stage during the acquisition.
  double left_home_rad = 0.0;
  double right_home_rad = 0.0;
};

// Believed rig and timing handed to the reconstruction.
std::pair<RigConfig, TimingConfig> apply_injection(const RigConfig& rig,
                                                   const TimingConfig& timing,
                                                   const ErrorInjection& inject);

// Projects every target through the true rig at every camera frame, applies
// distortion and seeded Gaussian pixel noise. Throws kTargetOutOfView with
// the frame index when a target leaves either sensor.
SimulationResult synth_detections(const Scene& scene,
                                  const ErrorInjection& inject = {});

GroundTruth make_ground_truth(const std::vector<Target>& targets);

// `count` targets with depths evenly spread over [z_min_m, z_max_m], laid
// along the ray from the world origin that bisects the two home optical
// axes, with small alternating lateral offsets.
std::vector<Target> default_targets(const RigConfig& rig, int count,
                                    double z_min_m, double z_max_m,
                                    double lateral_m = 0.25);

// One still image of the targets per snapshot, each taken after re-homing
// the stage of camera `side` with Gaussian home error `home_jitter_sigma_rad`.
using Snapshot = std::map<int, Vec2>;
std::vector<Snapshot> synth_home_snapshots(const Scene& scene, Side side,
                                           int count,
                                           double home_jitter_sigma_rad);

// Planar checkerboard fixed on a stage and facing a still camera, with the
// stage axis on the optical axis.
struct CheckerboardScene {
  int rows = 13;
  int cols = 19;
  double square_m = 0.03;
  double distance_m = 2.0;
  CameraIntrinsics intrinsics;
  TimingConfig timing;
  MotionProfile motion;
  double noise_sigma_px = 0.05;
  double frame_jitter_s = 0.0;
  double duration_s = 10.0;
  std::uint64_t seed = 1;
};

struct CheckerboardSequence {
  StageLog log;
  std::vector<std::int64_t> frames;
  std::vector<std::vector<Vec2>> corners;  // per frame, fixed corner order
  std::vector<double> true_angle_rad;      // per frame
};

CheckerboardSequence synth_checkerboard(const CheckerboardScene& scene);

// Named test configurations reused by examples, tests and the CLI.
namespace presets {

// Baseline 10.7 m, yaw +/-0.11 rad, focal lengths of the calibrated rig.
RigConfig test_rig(double pitch_rad = 0.0);

// Checkerboard on a stage running the "slow", "moderate" or "fast" motion
// preset: 0.5 s at home, then one excursion to +amplitude and back to
// -amplitude.
CheckerboardScene checkerboard(const std::string& motion_preset);

}  // namespace presets

}  // namespace comove
