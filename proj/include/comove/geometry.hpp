//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace comove {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

// Pixel coordinates throughout the core have their origin at the image
// center, x to the right and y down. Files use top-left origin; the io layer
// converts.

enum class Side { kLeft, kRight };

const char* SideName(Side side);

struct CameraIntrinsics {
  double focal_px = 6300.0;
  // Principal point offset from the image center.
  Vec2 center_px = Vec2::Zero();
  // First-order radial coefficient on focal-normalized coordinates.
  double k1 = 0.0;
  Vec2 sensor_px = Vec2(3840.0, 2400.0);

  void Validate() const;
};

// Home orientation of a camera (stage at 0 rad).
struct CameraStaticPose {
  double yaw_rad = 0.0;
  double pitch_rad = 0.0;
  double roll_rad = 0.0;

  void Validate() const;
};

struct CameraConfig {
  CameraStaticPose pose;
  CameraIntrinsics intrinsics;
};

// World frame: origin at the baseline midpoint, x towards the right camera,
// y down (gravity), z forward.
struct RigConfig {
  double baseline_m = 10.0;
  CameraConfig left;
  CameraConfig right;

  const CameraConfig& camera(Side side) const {
    return side == Side::kLeft ? left : right;
  }
  CameraConfig& camera(Side side) {
    return side == Side::kLeft ? left : right;
  }
  // (-d/2, 0, 0) for the left camera, (d/2, 0, 0) for the right.
  Vec3 center(Side side) const;

  void Validate() const;
};

// Right-handed elementary rotations.
Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

// Home rotation R_z(-roll) * R_x(-pitch) * R_y(-yaw). The order is fixed by
// the tripod mounting: yaw is applied first, roll last.
Mat3 rotation_static(const CameraStaticPose& pose);

// World-to-camera rotation with the stage turned by `stage_angle` about the
// camera's vertical axis: R_y(-stage_angle) * rotation_static(pose).
Mat3 rotation_at(const CameraStaticPose& pose, double stage_angle);

Mat3 calibration_matrix(const CameraIntrinsics& intrinsics);

// P = K * R(stage_angle) * [I | -center].
Mat34 projection_matrix(const CameraIntrinsics& intrinsics,
                        const CameraStaticPose& pose, double stage_angle,
                        const Vec3& center);

Mat34 projection_matrix(const RigConfig& rig, Side side, double stage_angle);

// Throws kDegenerateProjection when the point lies on the principal plane.
Vec2 project(const Mat34& P, const Vec3& point);
Vec2 project(const Mat34& P, const Vec4& homogeneous_point);

// observed = ideal * (1 + k1 r^2), with r measured in focal units from the
// principal point.
Vec2 distort(const CameraIntrinsics& intrinsics, const Vec2& ideal_px);

// Inverse of distort() by damped fixed-point iteration. Throws
// kNoConvergence after 50 iterations.
Vec2 undistort(const CameraIntrinsics& intrinsics, const Vec2& observed_px);

bool inside_sensor(const CameraIntrinsics& intrinsics, const Vec2& px,
                   double margin_px = 0.0);

// Direction of the optical axis expressed in world coordinates.
Vec3 optical_axis_world(const Mat3& world_to_camera);

}  // namespace comove
