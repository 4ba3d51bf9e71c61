//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "comove/error.hpp"

namespace comove {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
// Stage logs produced by the simulator extend this far on both sides of the
// camera acquisition so that small believed offsets stay inside the log.
constexpr double kLogPadding_s = 0.05;

// Independent, reproducible stream per (seed, index, purpose).
std::mt19937_64 make_rng(std::uint64_t seed, std::int64_t index, unsigned stream) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32),
                    stream};
  return std::mt19937_64(seq);
}

enum Stream : unsigned { kPixelNoise = 0, kFrameJitter = 1, kHome = 2 };

// Trapezoidal move over `distance` starting and ending at rest.
struct Leg {
  double distance = 0.0;
  double v_peak = 0.0;
  double t_ramp = 0.0;
  double t_cruise = 0.0;

  Leg(double d, double v_max, double a_max) : distance(d) {
    v_peak = std::min(v_max, std::sqrt(a_max * d));
    t_ramp = v_peak / a_max;
    const double d_ramp = 0.5 * v_peak * t_ramp;
    t_cruise = std::max(0.0, (d - 2.0 * d_ramp) / v_peak);
  }
  double duration() const { return 2.0 * t_ramp + t_cruise; }
  double position(double tau, double a_max) const {
    tau = std::clamp(tau, 0.0, duration());
    if (tau < t_ramp) {
      return 0.5 * a_max * tau * tau;
    }
    if (tau < t_ramp + t_cruise) {
      return 0.5 * v_peak * t_ramp + v_peak * (tau - t_ramp);
    }
    const double rest = duration() - tau;
    return distance - 0.5 * a_max * rest * rest;
  }
};

}  // namespace

MotionProfile MotionProfile::Still() { return {}; }

MotionProfile MotionProfile::ConstantSpeed(double speed_rad_s, double lead_still_s) {
  MotionProfile p;
  p.mode = MotionMode::kConstantSpeed;
  p.speed_rad_s = speed_rad_s;
  p.v_max_rad_s = std::abs(speed_rad_s);
  p.lead_still_s = lead_still_s;
  return p;
}

MotionProfile MotionProfile::Periodic(double amplitude_rad, double v_max_rad_s,
                                      double a_max_rad_s2, double lead_still_s) {
  MotionProfile p;
  p.mode = MotionMode::kPeriodic;
  p.amplitude_rad = amplitude_rad;
  p.v_max_rad_s = v_max_rad_s;
  p.a_max_rad_s2 = a_max_rad_s2;
  p.lead_still_s = lead_still_s;
  return p;
}

MotionProfile MotionProfile::Sinusoid(double amplitude_rad, double v_max_rad_s,
                                      double lead_still_s) {
  MotionProfile p;
  p.mode = MotionMode::kSinusoid;
  p.amplitude_rad = amplitude_rad;
  p.v_max_rad_s = v_max_rad_s;
  p.a_max_rad_s2 = v_max_rad_s * v_max_rad_s / amplitude_rad;
  p.lead_still_s = lead_still_s;
  return p;
}

MotionProfile MotionProfile::Preset(const std::string& name, double lead_still_s) {
  if (name == "slow") return Periodic(2.0 * kDeg, 1.0 * kDeg, 0.5 * kDeg, lead_still_s);
  if (name == "moderate") return Periodic(10.0 * kDeg, 10.0 * kDeg, 10.0 * kDeg, lead_still_s);
  if (name == "fast") return Periodic(18.0 * kDeg, 36.0 * kDeg, 72.0 * kDeg, lead_still_s);
  Fail(ErrorCode::kConfig, "unknown motion preset '" + name + "'");
}

void MotionProfile::Validate() const {
  if (!std::isfinite(lead_still_s) || lead_still_s < 0.0) {
    Fail(ErrorCode::kInvalidInput, "lead_still must be non-negative");
  }
  switch (mode) {
    case MotionMode::kStill:
      return;
    case MotionMode::kConstantSpeed:
      if (!std::isfinite(speed_rad_s)) {
        Fail(ErrorCode::kInvalidInput, "constant speed must be finite");
      }
      return;
    case MotionMode::kPeriodic:
    case MotionMode::kSinusoid:
      break;
  }
  if (!(amplitude_rad > 0.0) || !(v_max_rad_s > 0.0) || !(a_max_rad_s2 > 0.0)) {
    Fail(ErrorCode::kInvalidInput,
         "periodic motion needs positive amplitude, v_max and a_max");
  }
  if (mode == MotionMode::kPeriodic &&
      v_max_rad_s * v_max_rad_s / a_max_rad_s2 > 2.0 * amplitude_rad * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "v_max^2/a_max = " << v_max_rad_s * v_max_rad_s / a_max_rad_s2
        << " rad exceeds the sweep 2*amplitude = " << 2.0 * amplitude_rad << " rad";
    Fail(ErrorCode::kInfeasibleProfile, msg.str());
  }
  if (mode == MotionMode::kSinusoid &&
      v_max_rad_s * v_max_rad_s / amplitude_rad > a_max_rad_s2 * (1.0 + 1e-12)) {
    Fail(ErrorCode::kInfeasibleProfile,
         "sinusoid with this amplitude and v_max exceeds a_max");
  }
}

double MotionProfile::period_s() const {
  switch (mode) {
    case MotionMode::kPeriodic:
      return 2.0 * Leg(2.0 * amplitude_rad, v_max_rad_s, a_max_rad_s2).duration();
    case MotionMode::kSinusoid:
      return 2.0 * std::numbers::pi * amplitude_rad / v_max_rad_s;
    default:
      return 0.0;
  }
}

double MotionProfile::first_peak_s() const {
  switch (mode) {
    case MotionMode::kPeriodic:
      return lead_still_s + Leg(amplitude_rad, v_max_rad_s, a_max_rad_s2).duration();
    case MotionMode::kSinusoid:
      return lead_still_s + 0.25 * period_s();
    default:
      return lead_still_s;
  }
}

double profile_angle(const MotionProfile& p, double t) {
  const double tau = t - p.lead_still_s;
  if (tau <= 0.0) {
    return 0.0;
  }
  switch (p.mode) {
    case MotionMode::kStill:
      return 0.0;
    case MotionMode::kConstantSpeed:
      return p.speed_rad_s * tau;
    case MotionMode::kSinusoid:
      return p.amplitude_rad * std::sin(p.v_max_rad_s / p.amplitude_rad * tau);
    case MotionMode::kPeriodic:
      break;
  }
  const double a = p.a_max_rad_s2;
  const Leg first(p.amplitude_rad, p.v_max_rad_s, a);
  if (tau <= first.duration()) {
    return first.position(tau, a);
  }
  const Leg sweep(2.0 * p.amplitude_rad, p.v_max_rad_s, a);
  const double since = tau - first.duration();
  const double legs = std::floor(since / sweep.duration());
  const double within = since - legs * sweep.duration();
  const bool downward = static_cast<long long>(legs) % 2 == 0;
  const double moved = sweep.position(within, a);
  return downward ? p.amplitude_rad - moved : -p.amplitude_rad + moved;
}

StageLog generate_profile(const MotionProfile& profile, double rate_hz,
                          double duration_s, const std::string& stage_id) {
  profile.Validate();
  if (!(rate_hz > 0.0) || !(duration_s > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "rate and duration must be positive");
  }
  const double period = profile.period_s();
  if (period > 0.0 && duration_s - profile.lead_still_s < period) {
    std::ostringstream msg;
    msg << "duration " << duration_s << " s shorter than one period (" << period
        << " s) after the still lead-in";
    Fail(ErrorCode::kInvalidInput, msg.str());
  }
  StageLog log;
  log.stage_id = stage_id;
  log.rate_hz = rate_hz;
  const auto n = static_cast<std::size_t>(std::floor(duration_s * rate_hz + 1e-9)) + 1;
  log.angles.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    log.angles[j] = profile_angle(profile, static_cast<double>(j) / rate_hz);
  }
  return log;
}

void Scene::Validate() const {
  rig.Validate();
  timing.Validate();
  left_motion.Validate();
  right_motion.Validate();
  if (targets.empty()) {
    Fail(ErrorCode::kInvalidInput, "scene has no targets");
  }
  std::set<int> ids;
  for (const Target& t : targets) {
    if (!ids.insert(t.id).second) {
      Fail(ErrorCode::kInvalidInput, "duplicate target id " + std::to_string(t.id));
    }
    if (!t.position_m.allFinite()) {
      Fail(ErrorCode::kInvalidInput, "target " + std::to_string(t.id) + " is not finite");
    }
  }
  if (!(noise_sigma_px >= 0.0) || !(frame_jitter_s >= 0.0)) {
    Fail(ErrorCode::kInvalidInput, "noise levels must be non-negative");
  }
  if (!(duration_s > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "duration must be positive");
  }
}

void ErrorInjection::Validate() const {
  for (const double v : {delta_baseline_m, delta_yaw_rad, delta_focal_left_px,
                         delta_focal_right_px, delta_offset_s, home_jitter_sigma_rad}) {
    if (!std::isfinite(v)) {
      Fail(ErrorCode::kInvalidInput, "injected errors must be finite");
    }
  }
  if (home_jitter_sigma_rad < 0.0) {
    Fail(ErrorCode::kInvalidInput, "home jitter must be non-negative");
  }
}

std::pair<RigConfig, TimingConfig> apply_injection(const RigConfig& rig,
                                                   const TimingConfig& timing,
                                                   const ErrorInjection& inject) {
  RigConfig believed = rig;
  believed.baseline_m += inject.delta_baseline_m;
  believed.right.pose.yaw_rad += inject.delta_yaw_rad;
  believed.left.intrinsics.focal_px += inject.delta_focal_left_px;
  believed.right.intrinsics.focal_px += inject.delta_focal_right_px;
  TimingConfig believed_timing = timing;
  believed_timing.offset += inject.delta_offset_s;
  return {believed, believed_timing};
}

GroundTruth make_ground_truth(const std::vector<Target>& targets) {
  GroundTruth truth;
  truth.targets = targets;
  std::sort(truth.targets.begin(), truth.targets.end(),
            [](const Target& a, const Target& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < truth.targets.size(); ++i) {
    for (std::size_t j = i + 1; j < truth.targets.size(); ++j) {
      const double d = (truth.targets[i].position_m - truth.targets[j].position_m).norm();
      truth.distances_m[{truth.targets[i].id, truth.targets[j].id}] =
          std::round(d * 1000.0) / 1000.0;
    }
  }
  return truth;
}

namespace {

StageLog sample_padded_log(const MotionProfile& motion, double rate_hz,
                           double duration_s, const std::string& id) {
  StageLog log;
  log.stage_id = id;
  log.rate_hz = rate_hz;
  const auto pad = static_cast<std::int64_t>(std::ceil(kLogPadding_s * rate_hz));
  const auto last = static_cast<std::int64_t>(std::floor(duration_s * rate_hz + 1e-9)) + pad;
  log.first_index = -pad;
  log.angles.reserve(static_cast<std::size_t>(last + pad + 1));
  for (std::int64_t j = -pad; j <= last; ++j) {
    log.angles.push_back(profile_angle(motion, static_cast<double>(j) / rate_hz));
  }
  return log;
}

[[noreturn]] void out_of_view(std::int64_t frame, int target, Side side) {
  std::ostringstream msg;
  msg << "target " << target << " outside the " << SideName(side)
      << " sensor at frame " << frame;
  Fail(ErrorCode::kTargetOutOfView, msg.str());
}

// Distorted image of `point`, or out_of_view() when it cannot be seen.
Vec2 observe(const Mat34& P, const CameraIntrinsics& intr, const Vec3& point,
             std::int64_t frame, int target, Side side) {
  const Vec3 q = P * point.homogeneous();
  if (!(q.z() > 1e-12)) {
    out_of_view(frame, target, side);
  }
  const Vec2 px = distort(intr, q.head<2>() / q.z());
  if (!inside_sensor(intr, px)) {
    out_of_view(frame, target, side);
  }
  return px;
}

}  // namespace

SimulationResult synth_detections(const Scene& scene, const ErrorInjection& inject) {
  scene.Validate();
  inject.Validate();
  const RigConfig& rig = scene.rig;
  const TimingConfig& timing = scene.timing;
  const double stage_rate = 1.0 / timing.dt_stage;

  SimulationResult result;
  result.left_log = sample_padded_log(scene.left_motion, stage_rate, scene.duration_s, "left");
  result.right_log = sample_padded_log(scene.right_motion, stage_rate, scene.duration_s, "right");
  result.truth = make_ground_truth(scene.targets);

  {
    auto rng = make_rng(scene.seed, -1, kHome);
    std::normal_distribution<double> home(0.0, 1.0);
    result.left_home_rad = inject.home_jitter_sigma_rad * home(rng);
    result.right_home_rad = inject.home_jitter_sigma_rad * home(rng);
  }

  const std::vector<Target>& targets = result.truth.targets;
  const auto first = static_cast<std::int64_t>(std::ceil(-timing.offset / timing.dt_camera - 1e-9));
  for (std::int64_t i = std::max<std::int64_t>(0, first);; ++i) {
    const double t_nominal = camera_time(i, timing);
    if (t_nominal > scene.duration_s + 1e-12) {
      break;
    }
    double t = t_nominal;
    if (scene.frame_jitter_s > 0.0) {
      auto rng = make_rng(scene.seed, i, kFrameJitter);
      t += scene.frame_jitter_s * std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    const Mat34 p_left = projection_matrix(
        rig, Side::kLeft, profile_angle(scene.left_motion, t) + result.left_home_rad);
    const Mat34 p_right = projection_matrix(
        rig, Side::kRight, profile_angle(scene.right_motion, t) + result.right_home_rad);

    auto rng = make_rng(scene.seed, i, kPixelNoise);
    std::normal_distribution<double> noise(0.0, 1.0);
    FrameDetections& frame = result.detections.at_frame(i);
    for (const Target& target : targets) {
      Vec2 l = observe(p_left, rig.left.intrinsics, target.position_m, i, target.id, Side::kLeft);
      Vec2 r = observe(p_right, rig.right.intrinsics, target.position_m, i, target.id, Side::kRight);
      if (scene.noise_sigma_px > 0.0) {
        l += scene.noise_sigma_px * Vec2(noise(rng), noise(rng));
        r += scene.noise_sigma_px * Vec2(noise(rng), noise(rng));
      }
      frame.left[target.id] = l;
      frame.right[target.id] = r;
    }
  }
  return result;
}

std::vector<Target> default_targets(const RigConfig& rig, int count, double z_min_m,
                                    double z_max_m, double lateral_m) {
  if (count < 1 || !(z_max_m >= z_min_m) || !(z_min_m > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "invalid target layout");
  }
  const Vec3 axis = (optical_axis_world(rotation_static(rig.left.pose)) +
                     optical_axis_world(rotation_static(rig.right.pose)))
                        .normalized();
  std::vector<Target> targets;
  for (int k = 0; k < count; ++k) {
    const double z = count == 1 ? z_min_m
                                : z_min_m + (z_max_m - z_min_m) * k / (count - 1);
    const double sx = (k % 2 == 0) ? 1.0 : -1.0;
    const double sy = ((k / 2) % 2 == 0) ? 0.5 : -0.5;
    Vec3 p = axis * (z / axis.z());
    p.x() += sx * lateral_m;
    p.y() += sy * lateral_m;
    targets.push_back({k + 1, p});
  }
  return targets;
}

std::vector<Snapshot> synth_home_snapshots(const Scene& scene, Side side, int count,
                                           double home_jitter_sigma_rad) {
  scene.Validate();
  if (count < 1 || !(home_jitter_sigma_rad >= 0.0)) {
    Fail(ErrorCode::kInvalidInput, "invalid snapshot request");
  }
  const CameraIntrinsics& intr = scene.rig.camera(side).intrinsics;
  std::vector<Snapshot> snapshots;
  snapshots.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    auto home_rng = make_rng(scene.seed, s, kHome);
    const double home = home_jitter_sigma_rad *
                        std::normal_distribution<double>(0.0, 1.0)(home_rng);
    const Mat34 P = projection_matrix(scene.rig, side, home);
    auto rng = make_rng(scene.seed, s, kPixelNoise);
    std::normal_distribution<double> noise(0.0, 1.0);
    Snapshot snap;
    for (const Target& t : scene.targets) {
      Vec2 px = observe(P, intr, t.position_m, s, t.id, side);
      px += scene.noise_sigma_px * Vec2(noise(rng), noise(rng));
      snap[t.id] = px;
    }
    snapshots.push_back(std::move(snap));
  }
  return snapshots;
}

CheckerboardSequence synth_checkerboard(const CheckerboardScene& scene) {
  scene.intrinsics.Validate();
  scene.timing.Validate();
  if (scene.rows < 2 || scene.cols < 2 || !(scene.square_m > 0.0) ||
      !(scene.distance_m > 0.0) || !(scene.duration_s > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "invalid checkerboard scene");
  }
  CheckerboardSequence seq;
  seq.log = sample_padded_log(scene.motion, 1.0 / scene.timing.dt_stage, scene.duration_s,
                              "stage");
  std::vector<Vec3> board;
  for (int r = 0; r < scene.rows; ++r) {
    for (int c = 0; c < scene.cols; ++c) {
      board.emplace_back((c - 0.5 * (scene.cols - 1)) * scene.square_m,
                         (r - 0.5 * (scene.rows - 1)) * scene.square_m, 0.0);
    }
  }
  const CameraStaticPose still{};
  const Mat34 P = projection_matrix(scene.intrinsics, still, 0.0, Vec3::Zero());
  const Vec3 stage_center(0.0, 0.0, scene.distance_m);
  for (std::int64_t i = 0;; ++i) {
    const double t_nominal = camera_time(i, scene.timing);
    if (t_nominal > scene.duration_s + 1e-12) {
      break;
    }
    if (t_nominal < 0.0) {
      continue;
    }
    double t = t_nominal;
    if (scene.frame_jitter_s > 0.0) {
      auto rng = make_rng(scene.seed, i, kFrameJitter);
      t += scene.frame_jitter_s * std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    const double angle = profile_angle(scene.motion, t);
    const Mat3 spin = rot_z(angle);
    auto rng = make_rng(scene.seed, i, kPixelNoise);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<Vec2> corners;
    corners.reserve(board.size());
    for (std::size_t k = 0; k < board.size(); ++k) {
      Vec2 px = observe(P, scene.intrinsics, spin * board[k] + stage_center, i,
                        static_cast<int>(k), Side::kLeft);
      px += scene.noise_sigma_px * Vec2(noise(rng), noise(rng));
      corners.push_back(px);
    }
    seq.frames.push_back(i);
    seq.corners.push_back(std::move(corners));
    seq.true_angle_rad.push_back(angle);
  }
  return seq;
}

namespace presets {

RigConfig test_rig(double pitch_rad) {
  RigConfig rig;
  rig.baseline_m = 10.7;
  rig.left.pose = {0.11, pitch_rad, 0.0};
  rig.right.pose = {-0.11, pitch_rad, 0.0};
  rig.left.intrinsics.focal_px = 6314.8;
  rig.right.intrinsics.focal_px = 6300.29;
  return rig;
}

CheckerboardScene checkerboard(const std::string& motion_preset) {
  CheckerboardScene scene;
  scene.motion = MotionProfile::Preset(motion_preset, 0.5);
  scene.duration_s = scene.motion.first_peak_s() + 0.5 * scene.motion.period_s();
  scene.noise_sigma_px = 0.05;
  scene.frame_jitter_s = 5e-5;
  return scene;
}

}  // namespace presets

}  // namespace comove
