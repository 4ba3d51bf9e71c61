//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "comove/error.hpp"

namespace comove {

const char* SideName(Side side) {
  return side == Side::kLeft ? "left" : "right";
}

void CameraIntrinsics::Validate() const {
  if (!(focal_px > 0.0) || !std::isfinite(focal_px)) {
    Fail(ErrorCode::kInvalidInput, "focal length must be positive and finite");
  }
  if (!(sensor_px.x() > 0.0 && sensor_px.y() > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "sensor size must be positive");
  }
  if (!center_px.allFinite() || std::abs(center_px.x()) > 0.5 * sensor_px.x() ||
      std::abs(center_px.y()) > 0.5 * sensor_px.y()) {
    Fail(ErrorCode::kInvalidInput, "principal point outside the sensor");
  }
  if (!std::isfinite(k1)) {
    Fail(ErrorCode::kInvalidInput, "distortion coefficient must be finite");
  }
}

void CameraStaticPose::Validate() const {
  constexpr double kLimit = std::numbers::pi / 2.0;
  for (const double a : {yaw_rad, pitch_rad, roll_rad}) {
    if (!std::isfinite(a) || std::abs(a) >= kLimit) {
      std::ostringstream msg;
      msg << "static angle " << a << " rad outside (-pi/2, pi/2)";
      Fail(ErrorCode::kInvalidInput, msg.str());
    }
  }
}

Vec3 RigConfig::center(Side side) const {
  const double half = 0.5 * baseline_m;
  return Vec3(side == Side::kLeft ? -half : half, 0.0, 0.0);
}

void RigConfig::Validate() const {
  if (!(baseline_m > 0.0) || !std::isfinite(baseline_m)) {
    Fail(ErrorCode::kInvalidInput, "baseline must be positive");
  }
  left.pose.Validate();
  right.pose.Validate();
  left.intrinsics.Validate();
  right.intrinsics.Validate();
}

Mat3 rot_x(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << 1.0, 0.0, 0.0,
       0.0, c, -s,
       0.0, s, c;
  return r;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << c, 0.0, s,
       0.0, 1.0, 0.0,
       -s, 0.0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

Mat3 rotation_static(const CameraStaticPose& pose) {
  return rot_z(-pose.roll_rad) * rot_x(-pose.pitch_rad) * rot_y(-pose.yaw_rad);
}

Mat3 rotation_at(const CameraStaticPose& pose, double stage_angle) {
  return rot_y(-stage_angle) * rotation_static(pose);
}

Mat3 calibration_matrix(const CameraIntrinsics& intrinsics) {
  Mat3 k = Mat3::Identity();
  k(0, 0) = intrinsics.focal_px;
  k(1, 1) = intrinsics.focal_px;
  k(0, 2) = intrinsics.center_px.x();
  k(1, 2) = intrinsics.center_px.y();
  return k;
}

Mat34 projection_matrix(const CameraIntrinsics& intrinsics,
                        const CameraStaticPose& pose, double stage_angle,
                        const Vec3& center) {
  const Mat3 kr = calibration_matrix(intrinsics) * rotation_at(pose, stage_angle);
  Mat34 p;
  p.leftCols<3>() = kr;
  p.col(3) = -kr * center;
  return p;
}

Mat34 projection_matrix(const RigConfig& rig, Side side, double stage_angle) {
  const CameraConfig& cam = rig.camera(side);
  return projection_matrix(cam.intrinsics, cam.pose, stage_angle,
                           rig.center(side));
}

Vec2 project(const Mat34& P, const Vec4& homogeneous_point) {
  const Vec3 q = P * homogeneous_point;
  if (std::abs(q.z()) < 1e-12) {
    Fail(ErrorCode::kDegenerateProjection,
         "point lies on the principal plane of the camera");
  }
  return q.head<2>() / q.z();
}

Vec2 project(const Mat34& P, const Vec3& point) {
  return project(P, Vec4(point.x(), point.y(), point.z(), 1.0));
}

Vec2 distort(const CameraIntrinsics& intrinsics, const Vec2& ideal_px) {
  if (intrinsics.k1 == 0.0) {
    return ideal_px;
  }
  const Vec2 n = (ideal_px - intrinsics.center_px) / intrinsics.focal_px;
  const double factor = 1.0 + intrinsics.k1 * n.squaredNorm();
  return intrinsics.center_px + intrinsics.focal_px * factor * n;
}

Vec2 undistort(const CameraIntrinsics& intrinsics, const Vec2& observed_px) {
  if (intrinsics.k1 == 0.0) {
    return observed_px;
  }
  constexpr int kMaxIterations = 50;
  constexpr double kDamping = 0.9;
  const Vec2 observed = (observed_px - intrinsics.center_px) / intrinsics.focal_px;
  Vec2 n = observed;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vec2 target = observed / (1.0 + intrinsics.k1 * n.squaredNorm());
    const Vec2 step = target - n;
    n += kDamping * step;
    // 1e-15 focal units is ~1e-11 px for any realistic focal length.
    if (step.norm() < 1e-15) {
      return intrinsics.center_px + intrinsics.focal_px * n;
    }
  }
  Fail(ErrorCode::kNoConvergence,
       "undistortion did not converge within 50 iterations");
}

bool inside_sensor(const CameraIntrinsics& intrinsics, const Vec2& px,
                   double margin_px) {
  const Vec2 half = 0.5 * intrinsics.sensor_px;
  return std::abs(px.x()) <= half.x() - margin_px &&
         std::abs(px.y()) <= half.y() - margin_px;
}

Vec3 optical_axis_world(const Mat3& world_to_camera) {
  return world_to_camera.transpose().col(2);
}

}  // namespace comove
