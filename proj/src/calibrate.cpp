//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "comove/error.hpp"
#include "comove/fit.hpp"

namespace comove {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    Fail(ErrorCode::kInvalidInput, std::string(what) + " must be finite");
  }
}

// OLS slope of the stage angle over the acquisition's frame times.
double stage_speed(const DetectionSet& detections, const StageLog& log,
                   const TimingConfig& timing) {
  std::vector<double> t;
  std::vector<double> phi;
  t.reserve(detections.size());
  phi.reserve(detections.size());
  for (const FrameDetections& f : detections.frames) {
    const double ti = camera_time(f.frame, timing);
    t.push_back(ti);
    phi.push_back(stage_angle_at(log, ti));
  }
  if (t.size() < 2) {
    Fail(ErrorCode::kTooFewFrames, "need at least two frames to measure stage speed");
  }
  return fit_line(t, phi).slope;
}

}  // namespace

void ErrorModelInput::Validate() const {
  require_finite(focal_px, "focal_px");
  require_finite(baseline_m, "baseline_m");
  require_finite(psi_rad, "psi_rad");
  require_finite(delta_baseline_m, "delta_baseline_m");
  require_finite(delta_focal_px, "delta_focal_px");
  require_finite(delta_psi_rad, "delta_psi_rad");
  require_finite(zbar_m, "zbar_m");
  require_finite(stage_speed_rad_s, "stage_speed_rad_s");
  if (!(focal_px > 0.0) || !(baseline_m > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "focal length and baseline must be positive");
  }
  if (!(zbar_m > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "zbar must be positive");
  }
}

double predict_rel_error(const ErrorModelInput& in) {
  in.Validate();
  const double W = in.focal_px;
  const double d = in.baseline_m;
  return in.delta_baseline_m / d + in.delta_focal_px / W +
         2.0 * in.zbar_m / (W * d) * (in.psi_rad * in.delta_focal_px + W * in.delta_psi_rad);
}

double predict_z_drift(const ErrorModelInput& in, double z_m) {
  in.Validate();
  if (!(z_m > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "depth must be positive");
  }
  return z_m * z_m / (in.focal_px * in.baseline_m) * in.stage_speed_rad_s * in.delta_focal_px;
}

const char* SignatureName(ErrorSignature s) {
  switch (s) {
    case ErrorSignature::kBaselineDominated:
      return "baseline-dominated";
    case ErrorSignature::kOrientationDominated:
      return "orientation-dominated";
    case ErrorSignature::kInconclusive:
      return "inconclusive";
  }
  return "unknown";
}

DiagnosisResult diagnose(const DistanceReport& report, double baseline_m,
                         const DiagnoseOptions& options) {
  if (!(baseline_m > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "baseline must be positive");
  }
  if (!(options.variance_ratio > 1.0) || !(options.min_span_fraction >= 0.0)) {
    Fail(ErrorCode::kInvalidInput, "invalid diagnosis options");
  }
  if (report.pairs.empty()) {
    Fail(ErrorCode::kInvalidInput, "diagnosis needs at least one pair");
  }
  DiagnosisResult r;
  for (const PairReport& p : report.pairs) {
    r.zbar_m.push_back(p.zbar_m);
    r.mean_rel_err.push_back(p.mean_rel_err);
  }
  const ConstantFit cfit = fit_constant(r.mean_rel_err);
  r.constant_term = cfit.mean;
  r.constant_se = cfit.mean_se;
  r.rss_constant = cfit.rss;
  r.residual_constant = cfit.residuals;

  const auto [lo, hi] = std::minmax_element(r.zbar_m.begin(), r.zbar_m.end());
  r.zbar_span_m = *hi - *lo;
  r.zbar_mean_m = fit_constant(r.zbar_m).mean;
  r.span_sufficient = r.zbar_m.size() >= 3 && r.zbar_span_m > 0.0 &&
                      r.zbar_span_m >= options.min_span_fraction * r.zbar_mean_m;
  if (!r.span_sufficient) {
    return r;
  }

  const LinearFit lfit = fit_line(r.zbar_m, r.mean_rel_err);
  r.slope_per_m = lfit.slope;
  r.slope_se = lfit.slope_se;
  r.intercept = lfit.intercept;
  r.intercept_se = lfit.intercept_se;
  r.rss_linear = lfit.rss;
  r.residual_linear = lfit.residuals;
  r.implied_delta_yaw_rad = lfit.slope * baseline_m / 2.0;
  r.variance_ratio = lfit.rss > 0.0 ? cfit.rss / lfit.rss
                                    : (cfit.rss > 0.0 ? std::numeric_limits<double>::infinity()
                                                      : 1.0);
  if (r.variance_ratio >= options.variance_ratio) {
    r.classification = ErrorSignature::kOrientationDominated;
    r.constant_term = lfit.intercept;
    r.constant_se = lfit.intercept_se;
  } else {
    r.classification = ErrorSignature::kBaselineDominated;
  }
  return r;
}

std::vector<ZSlope> fit_z_slopes(const std::vector<Trajectory3D>& trajectories,
                                 std::size_t min_frames) {
  std::vector<ZSlope> out;
  out.reserve(trajectories.size());
  for (const Trajectory3D& traj : trajectories) {
    if (traj.size() < std::max<std::size_t>(min_frames, 2)) {
      Fail(ErrorCode::kTooFewFrames, "target " + std::to_string(traj.target_id) + " has " +
                                         std::to_string(traj.size()) + " frames");
    }
    std::vector<double> z;
    z.reserve(traj.size());
    double z2 = 0.0;
    for (const Vec3& p : traj.points_m) {
      z.push_back(p.z());
      z2 += p.z() * p.z();
    }
    ZSlope s;
    s.target_id = traj.target_id;
    s.slope_m_s = fit_line(traj.times_s, z).slope;
    s.mean_z2_m2 = z2 / static_cast<double>(traj.size());
    s.n_frames = traj.size();
    out.push_back(s);
  }
  return out;
}

FocalFit estimate_domega(const std::vector<ZSlope>& slopes, double v_rad_s, double focal_px,
                         double baseline_m) {
  if (slopes.size() < 3) {
    Fail(ErrorCode::kInvalidInput, "focal fit needs at least three targets");
  }
  if (!(std::abs(v_rad_s) > 0.0) || !std::isfinite(v_rad_s)) {
    Fail(ErrorCode::kInvalidInput, "stage speed must be non-zero");
  }
  if (!(focal_px > 0.0) || !(baseline_m > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "focal length and baseline must be positive");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (const ZSlope& s : slopes) {
    x.push_back(s.mean_z2_m2);
    y.push_back(s.slope_m_s);
  }
  const LinearFit fit = fit_line(x, y);
  FocalFit out;
  out.fit_slope = fit.slope;
  out.fit_slope_se = fit.slope_se;
  out.fit_intercept = fit.intercept;
  out.r2 = fit.r2;
  out.consistent_with_zero = std::abs(fit.slope) <= 3.0 * fit.slope_se;
  if (!out.consistent_with_zero && fit.r2 < 0.9) {
    Fail(ErrorCode::kBadFit, "dZ/dt against <Z^2> is not linear (R^2 = " +
                                 std::to_string(fit.r2) + ")");
  }
  out.delta_focal_px = -fit.slope * focal_px * baseline_m / v_rad_s;
  return out;
}

double relative_stage_speed(const DetectionSet& detections, const StageLog& left_log,
                            const StageLog& right_log, const TimingConfig& timing) {
  return stage_speed(detections, right_log, timing) - stage_speed(detections, left_log, timing);
}

Side rotating_camera(const DetectionSet& detections, const StageLog& left_log,
                     const StageLog& right_log, const TimingConfig& timing) {
  constexpr double kStill = 1e-6;
  const bool left_moves = std::abs(stage_speed(detections, left_log, timing)) > kStill;
  const bool right_moves = std::abs(stage_speed(detections, right_log, timing)) > kStill;
  if (left_moves == right_moves) {
    Fail(ErrorCode::kInvalidInput, "focal calibration needs exactly one rotating camera");
  }
  return left_moves ? Side::kLeft : Side::kRight;
}

FocalCalibrationResult focal_fit(const DetectionSet& detections, const RigConfig& rig,
                                 const StageLog& left_log, const StageLog& right_log,
                                 const TimingConfig& timing, const ReconstructOptions& options) {
  FocalCalibrationResult r;
  r.side = rotating_camera(detections, left_log, right_log, timing);
  r.believed_focal_px = rig.camera(r.side).intrinsics.focal_px;
  r.v_rad_s = -relative_stage_speed(detections, left_log, right_log, timing);
  const auto trajs = reconstruct_sequence(detections, rig, left_log, right_log, timing, options);
  r.slopes = fit_z_slopes(trajs);
  // The first-order relation uses the mean focal length of the pair.
  const double focal = 0.5 * (rig.left.intrinsics.focal_px + rig.right.intrinsics.focal_px);
  r.fit = estimate_domega(r.slopes, r.v_rad_s, focal, rig.baseline_m);
  r.has_fit = true;
  return r;
}

FocalCalibrationResult focal_sweep(const DetectionSet& detections, const RigConfig& rig,
                                   const StageLog& left_log, const StageLog& right_log,
                                   const TimingConfig& timing, const SweepOptions& options) {
  if (!(options.step_px > 0.0) || !(options.max_px > options.min_px) || !(options.min_px > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "invalid focal sweep grid");
  }
  const auto n_grid =
      static_cast<std::size_t>(std::floor((options.max_px - options.min_px) / options.step_px +
                                          1e-9)) + 1;
  if (n_grid < 3) {
    Fail(ErrorCode::kInvalidInput, "focal sweep grid needs at least three points");
  }

  FocalCalibrationResult r;
  r.side = rotating_camera(detections, left_log, right_log, timing);
  r.believed_focal_px = rig.camera(r.side).intrinsics.focal_px;
  r.v_rad_s = -relative_stage_speed(detections, left_log, right_log, timing);

  RigConfig trial = rig;
  CameraIntrinsics& intr = r.side == Side::kLeft ? trial.left.intrinsics : trial.right.intrinsics;
  r.sweep.reserve(n_grid);
  for (std::size_t k = 0; k < n_grid; ++k) {
    intr.focal_px = options.min_px + static_cast<double>(k) * options.step_px;
    const auto trajs =
        reconstruct_sequence(detections, trial, left_log, right_log, timing, options.reconstruct);
    const auto slopes = fit_z_slopes(trajs);
    if (k == 0) {
      for (const ZSlope& s : slopes) r.target_ids.push_back(s.target_id);
      if (r.target_ids.empty()) {
        Fail(ErrorCode::kInvalidInput, "no targets to calibrate on");
      }
    }
    SweepPoint pt;
    pt.focal_px = intr.focal_px;
    for (const ZSlope& s : slopes) {
      pt.target_slopes.push_back(s.slope_m_s);
      pt.mean_abs_slope += std::abs(s.slope_m_s);
    }
    pt.mean_abs_slope /= static_cast<double>(slopes.size());
    r.sweep.push_back(std::move(pt));
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < n_grid; ++k) {
    if (r.sweep[k].mean_abs_slope < r.sweep[best].mean_abs_slope) best = k;
  }
  if (best == 0 || best == n_grid - 1) {
    Fail(ErrorCode::kNoInteriorMinimum,
         "minimum at the grid boundary (" + std::to_string(r.sweep[best].focal_px) + " px)");
  }
  r.best_grid_focal_px = r.sweep[best].focal_px;

  std::size_t lo_idx = n_grid;
  std::size_t hi_idx = 0;
  for (std::size_t j = 0; j < r.target_ids.size(); ++j) {
    std::size_t arg = 0;
    for (std::size_t k = 1; k < n_grid; ++k) {
      if (std::abs(r.sweep[k].target_slopes[j]) < std::abs(r.sweep[arg].target_slopes[j])) {
        arg = k;
      }
    }
    r.per_target_best_px.push_back(r.sweep[arg].focal_px);
    lo_idx = std::min(lo_idx, arg);
    hi_idx = std::max(hi_idx, arg);
  }
  if (hi_idx - lo_idx > static_cast<std::size_t>(std::max(0, options.max_minima_spread_steps))) {
    Fail(ErrorCode::kInconsistentMinima,
         "per-target minima spread over " + std::to_string(hi_idx - lo_idx) + " grid steps");
  }

  // Parabola through the grid minimum and its two neighbours.
  const double fm = r.sweep[best - 1].mean_abs_slope;
  const double f0 = r.sweep[best].mean_abs_slope;
  const double fp = r.sweep[best + 1].mean_abs_slope;
  const double curvature = fm - 2.0 * f0 + fp;
  const double shift = curvature > 0.0 ? 0.5 * (fm - fp) / curvature : 0.0;
  r.best_focal_px = r.best_grid_focal_px + std::clamp(shift, -1.0, 1.0) * options.step_px;
  r.has_sweep = true;
  return r;
}

KabschResult kabsch_angle(std::span<const Vec2> reference, std::span<const Vec2> current) {
  if (reference.size() != current.size()) {
    Fail(ErrorCode::kMismatchedTargets, "point sets differ in size");
  }
  const std::size_t n = reference.size();
  if (n < 2) {
    Fail(ErrorCode::kDegenerateConfiguration, "rotation needs at least two points");
  }
  Vec2 ca = Vec2::Zero();
  Vec2 cb = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    ca += reference[i];
    cb += current[i];
  }
  ca /= static_cast<double>(n);
  cb /= static_cast<double>(n);
  double cross = 0.0;
  double dot = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = reference[i] - ca;
    const Vec2 b = current[i] - cb;
    cross += a.x() * b.y() - a.y() * b.x();
    dot += a.dot(b);
    spread += a.squaredNorm();
  }
  if (!(spread > 1e-18) || std::hypot(cross, dot) < 1e-18) {
    Fail(ErrorCode::kDegenerateConfiguration, "points are coincident");
  }
  KabschResult r;
  r.angle_rad = std::atan2(cross, dot);
  const double c = std::cos(r.angle_rad);
  const double s = std::sin(r.angle_rad);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = reference[i] - ca;
    const Vec2 b = current[i] - cb;
    const Vec2 ra(c * a.x() - s * a.y(), s * a.x() + c * a.y());
    ss += (b - ra).squaredNorm();
  }
  r.rmsd_px = std::sqrt(ss / static_cast<double>(n));
  return r;
}

AngleCheck verify_angle_interpolation(const CheckerboardSequence& sequence,
                                      const TimingConfig& timing) {
  const std::size_t n = sequence.frames.size();
  if (n == 0 || sequence.corners.size() != n) {
    Fail(ErrorCode::kInvalidInput, "checkerboard sequence is empty or inconsistent");
  }
  std::vector<double> stage(n);
  for (std::size_t i = 0; i < n; ++i) {
    stage[i] = stage_angle_at(sequence.log, camera_time(sequence.frames[i], timing));
  }
  const std::size_t n_corners = sequence.corners.front().size();
  std::vector<Vec2> reference(n_corners, Vec2::Zero());
  AngleCheck out;
  while (out.reference_frames < n && stage[out.reference_frames] == 0.0) {
    const auto& c = sequence.corners[out.reference_frames];
    if (c.size() != n_corners) {
      Fail(ErrorCode::kMismatchedTargets, "corner count changes between frames");
    }
    for (std::size_t k = 0; k < n_corners; ++k) reference[k] += c[k];
    ++out.reference_frames;
  }
  if (out.reference_frames == 0) {
    Fail(ErrorCode::kInvalidInput, "sequence does not start at the home position");
  }
  for (Vec2& p : reference) p /= static_cast<double>(out.reference_frames);

  double ss = 0.0;
  for (std::size_t i = out.reference_frames; i < n; ++i) {
    const KabschResult k = kabsch_angle(reference, sequence.corners[i]);
    out.frames.push_back(sequence.frames[i]);
    out.kabsch_rad.push_back(k.angle_rad);
    out.stage_rad.push_back(stage[i]);
    const double err = stage[i] - k.angle_rad;
    out.error_rad.push_back(err);
    out.max_abs_error_rad = std::max(out.max_abs_error_rad, std::abs(err));
    ss += err * err;
  }
  if (!out.frames.empty()) {
    out.rms_error_rad = std::sqrt(ss / static_cast<double>(out.frames.size()));
  }
  return out;
}

HomeRepeatability home_repeatability(const std::vector<Snapshot>& snapshots, double focal_px) {
  if (!(focal_px > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "focal length must be positive");
  }
  if (snapshots.size() < 2) {
    Fail(ErrorCode::kInvalidInput, "need at least two home snapshots");
  }
  HomeRepeatability r;
  for (std::size_t s = 1; s < snapshots.size(); ++s) {
    const Snapshot& prev = snapshots[s - 1];
    const Snapshot& cur = snapshots[s];
    if (prev.size() != cur.size()) {
      Fail(ErrorCode::kMismatchedTargets, "snapshots " + std::to_string(s - 1) + " and " +
                                              std::to_string(s) + " see different targets");
    }
    for (const auto& [id, px] : cur) {
      const auto it = prev.find(id);
      if (it == prev.end()) {
        Fail(ErrorCode::kMismatchedTargets,
             "target " + std::to_string(id) + " missing from snapshot " + std::to_string(s - 1));
      }
      r.fluctuations_rad.push_back((px.x() - it->second.x()) / focal_px);
    }
  }
  if (r.fluctuations_rad.empty()) {
    Fail(ErrorCode::kMismatchedTargets, "snapshots contain no targets");
  }
  r.median_rad = median(r.fluctuations_rad);
  double mean = 0.0;
  for (const double f : r.fluctuations_rad) {
    r.max_abs_rad = std::max(r.max_abs_rad, std::abs(f));
    mean += f;
  }
  mean /= static_cast<double>(r.fluctuations_rad.size());
  if (r.fluctuations_rad.size() > 1) {
    double ss = 0.0;
    for (const double f : r.fluctuations_rad) ss += (f - mean) * (f - mean);
    r.std_rad = std::sqrt(ss / static_cast<double>(r.fluctuations_rad.size() - 1));
  }
  return r;
}

}  // namespace comove
