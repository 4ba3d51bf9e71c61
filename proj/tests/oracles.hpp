//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//
// Reference computations written independently of the library: plain
// arrays and scalar formulas, no Eigen.

#pragma once

#include <array>
#include <cmath>

namespace oracle {

using M3 = std::array<std::array<double, 3>, 3>;
using V3 = std::array<double, 3>;

inline M3 mul(const M3& a, const M3& b) {
  M3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline V3 mul(const M3& a, const V3& v) {
  V3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i] += a[i][k] * v[k];
  return r;
}

// Right-handed elementary rotations.
inline M3 rx(double t) {
  const double c = std::cos(t), s = std::sin(t);
  return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}
inline M3 ry(double t) {
  const double c = std::cos(t), s = std::sin(t);
  return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}
inline M3 rz(double t) {
  const double c = std::cos(t), s = std::sin(t);
  return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

// R_z(-roll) R_x(-pitch) R_y(-yaw), then the stage turn R_y(-phi).
inline M3 camera_rotation(double yaw, double pitch, double roll, double phi) {
  return mul(ry(-phi), mul(rz(-roll), mul(rx(-pitch), ry(-yaw))));
}

// Pinhole projection with the principal point at the image center.
inline std::array<double, 2> project(double focal, const M3& R, const V3& C, const V3& X) {
  const V3 rel{X[0] - C[0], X[1] - C[1], X[2] - C[2]};
  const V3 p = mul(R, rel);
  return {focal * p[0] / p[2], focal * p[1] / p[2]};
}

// First-order stereo depth from the horizontal pixel coordinates.
inline double parallel_depth(double focal, double baseline, double disparity) {
  return focal * baseline / disparity;
}

}  // namespace oracle
