//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/reconstruct.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "comove/error.hpp"
#include "comove/parallel.hpp"

namespace comove {
namespace {

using Mat4 = Eigen::Matrix4d;

// Sine of the angle between the two back-projected rays.
double ray_angle_sine(const Mat34& P_left, const Mat34& P_right, const Vec3& q_left,
                      const Vec3& q_right) {
  const Vec3 d_left = P_left.leftCols<3>().partialPivLu().solve(q_left).normalized();
  const Vec3 d_right = P_right.leftCols<3>().partialPivLu().solve(q_right).normalized();
  return d_left.cross(d_right).norm();
}

double depth_sign(const Mat34& P, const Vec3& X) {
  const double w = (P * X.homogeneous()).z();
  return P.leftCols<3>().determinant() > 0.0 ? w : -w;
}

}  // namespace

Vec3 triangulate_dlt(const Mat34& P_left, const Mat34& P_right, const Vec3& q_left,
                     const Vec3& q_right, const DltOptions& options) {
  if (ray_angle_sine(P_left, P_right, q_left, q_right) < 1e-10) {
    Fail(ErrorCode::kDegenerateGeometry, "viewing rays are parallel");
  }
  Mat34 pl = P_left;
  Mat34 pr = P_right;
  Vec3 ql = q_left;
  Vec3 qr = q_right;
  if (options.normalize) {
    const double scale = std::max({1.0, std::abs(ql.x() / ql.z()), std::abs(ql.y() / ql.z()),
                                   std::abs(qr.x() / qr.z()), std::abs(qr.y() / qr.z())});
    const Eigen::DiagonalMatrix<double, 3> T(1.0 / scale, 1.0 / scale, 1.0);
    pl = T * pl;
    pr = T * pr;
    ql = T * ql;
    qr = T * qr;
  }
  Mat4 A;
  A.row(0) = ql.x() * pl.row(2) - ql.z() * pl.row(0);
  A.row(1) = ql.y() * pl.row(2) - ql.z() * pl.row(1);
  A.row(2) = qr.x() * pr.row(2) - qr.z() * pr.row(0);
  A.row(3) = qr.y() * pr.row(2) - qr.z() * pr.row(1);
  if (options.normalize) {
    for (int r = 0; r < 4; ++r) {
      A.row(r).normalize();
    }
  }
  const Eigen::JacobiSVD<Mat4> svd(A, Eigen::ComputeFullV);
  const Vec4 X = svd.matrixV().col(3);
  if (std::abs(X.w()) < 1e-15 * X.head<3>().norm()) {
    Fail(ErrorCode::kDegenerateGeometry, "triangulated point is at infinity");
  }
  const Vec3 point = X.head<3>() / X.w();
  if (depth_sign(P_left, point) < 0.0 || depth_sign(P_right, point) < 0.0) {
    Fail(ErrorCode::kBehindCamera, "triangulated point lies behind a camera");
  }
  return point;
}

Vec3 triangulate_dlt(const Mat34& P_left, const Mat34& P_right, const Vec2& q_left,
                     const Vec2& q_right, const DltOptions& options) {
  return triangulate_dlt(P_left, P_right, Vec3(q_left.homogeneous()),
                         Vec3(q_right.homogeneous()), options);
}

double z_closed_form(double focal_px, double baseline_m, double disparity_px,
                     double yaw_diff_rad, double stage_diff_rad) {
  const double denom = disparity_px - (yaw_diff_rad + stage_diff_rad) * focal_px;
  if (std::abs(denom) < 1e-9) {
    Fail(ErrorCode::kDivergentDepth, "vanishing effective disparity");
  }
  return focal_px * baseline_m / denom;
}

std::vector<Trajectory3D> reconstruct_sequence(const DetectionSet& detections,
                                               const RigConfig& rig,
                                               const StageLog& left_log,
                                               const StageLog& right_log,
                                               const TimingConfig& timing,
                                               const ReconstructOptions& options) {
  rig.Validate();
  timing.Validate();

  struct FramePoints {
    double time = 0.0;
    std::vector<std::pair<int, Vec3>> points;
    std::exception_ptr error;
  };
  std::vector<FramePoints> per_frame(detections.frames.size());

  parallel_for(detections.frames.size(), [&](std::size_t k) {
    const FrameDetections& frame = detections.frames[k];
    FramePoints& out = per_frame[k];
    int current_target = -1;
    try {
      const double t = camera_time(frame.frame, timing);
      out.time = t;
      const double phi_left = stage_angle_at(left_log, t);
      const double phi_right = stage_angle_at(right_log, t);
      const Mat34 p_left = projection_matrix(rig, Side::kLeft, phi_left);
      const Mat34 p_right = projection_matrix(rig, Side::kRight, phi_right);
      for (const auto& [id, left_px] : frame.left) {
        const auto right = frame.right.find(id);
        if (right == frame.right.end()) {
          continue;
        }
        current_target = id;
        Vec2 ql = left_px;
        Vec2 qr = right->second;
        if (options.undistort) {
          ql = undistort(rig.left.intrinsics, ql);
          qr = undistort(rig.right.intrinsics, qr);
        }
        out.points.emplace_back(id, triangulate_dlt(p_left, p_right, ql, qr, options.dlt));
      }
    } catch (const Error& e) {
      std::ostringstream ctx;
      ctx << "frame " << frame.frame;
      if (current_target >= 0) ctx << ", target " << current_target;
      out.error = std::make_exception_ptr(e.WithContext(ctx.str()));
    }
  });

  std::map<int, Trajectory3D> by_target;
  for (std::size_t k = 0; k < per_frame.size(); ++k) {
    if (per_frame[k].error) {
      std::rethrow_exception(per_frame[k].error);
    }
    for (const auto& [id, point] : per_frame[k].points) {
      Trajectory3D& traj = by_target[id];
      traj.target_id = id;
      traj.frames.push_back(detections.frames[k].frame);
      traj.times_s.push_back(per_frame[k].time);
      traj.points_m.push_back(point);
    }
  }
  std::vector<Trajectory3D> result;
  result.reserve(by_target.size());
  for (auto& [id, traj] : by_target) {
    result.push_back(std::move(traj));
  }
  return result;
}

double DistanceReport::max_abs_mean_rel_err() const {
  double worst = 0.0;
  for (const PairReport& p : pairs) {
    worst = std::max(worst, std::abs(p.mean_rel_err));
  }
  return worst;
}

DistanceReport pairwise_report(const std::vector<Trajectory3D>& trajectories,
                               const std::map<std::pair<int, int>, double>& measured_m) {
  if (trajectories.size() < 2) {
    Fail(ErrorCode::kInvalidInput, "distance report needs at least two targets");
  }
  std::vector<const Trajectory3D*> sorted;
  for (const Trajectory3D& t : trajectories) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(), [](const Trajectory3D* a, const Trajectory3D* b) {
    return a->target_id < b->target_id;
  });

  DistanceReport report;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const Trajectory3D& a = *sorted[i];
      const Trajectory3D& b = *sorted[j];
      const auto truth = measured_m.find({a.target_id, b.target_id});
      if (truth == measured_m.end()) {
        Fail(ErrorCode::kMissingTruth, "no measured distance for pair (" +
                                           std::to_string(a.target_id) + ", " +
                                           std::to_string(b.target_id) + ")");
      }
      if (!(truth->second > 0.0)) {
        Fail(ErrorCode::kInvalidInput, "measured distances must be positive");
      }
      PairReport pair;
      pair.target_a = a.target_id;
      pair.target_b = b.target_id;
      pair.measured_m = truth->second;
      double zsum = 0.0;
      // Both frame lists are sorted; walk them together.
      std::size_t ia = 0;
      std::size_t ib = 0;
      while (ia < a.size() && ib < b.size()) {
        if (a.frames[ia] < b.frames[ib]) {
          ++ia;
        } else if (b.frames[ib] < a.frames[ia]) {
          ++ib;
        } else {
          const double dist = (a.points_m[ia] - b.points_m[ib]).norm();
          pair.frames.push_back(a.frames[ia]);
          pair.times_s.push_back(a.times_s[ia]);
          pair.reconstructed_m.push_back(dist);
          pair.rel_err.push_back((dist - pair.measured_m) / pair.measured_m);
          zsum += 0.5 * (a.points_m[ia].z() + b.points_m[ib].z());
          ++ia;
          ++ib;
        }
      }
      const std::size_t n = pair.frames.size();
      if (n == 0) {
        continue;
      }
      pair.zbar_m = zsum / static_cast<double>(n);
      double sum = 0.0;
      for (const double e : pair.rel_err) sum += e;
      pair.mean_rel_err = sum / static_cast<double>(n);
      if (n > 1) {
        double ss = 0.0;
        for (const double e : pair.rel_err) ss += (e - pair.mean_rel_err) * (e - pair.mean_rel_err);
        pair.std_rel_err = std::sqrt(ss / static_cast<double>(n - 1));
      }
      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

}  // namespace comove
