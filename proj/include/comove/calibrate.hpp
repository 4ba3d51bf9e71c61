//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "comove/detections.hpp"
#include "comove/geometry.hpp"
#include "comove/reconstruct.hpp"
#include "comove/simulate.hpp"
#include "comove/timing.hpp"

namespace comove {

// First-order error model of a zero-pitch, zero-roll rig. psi is the total
// relative yaw (yaw_R - yaw_L) + (phi_R - phi_L); the deltas are believed
// minus true values.
struct ErrorModelInput {
  double focal_px = 6300.0;
  double baseline_m = 10.0;
  double psi_rad = 0.0;
  double delta_baseline_m = 0.0;
  double delta_focal_px = 0.0;
  double delta_psi_rad = 0.0;
  double zbar_m = 30.0;
  double stage_speed_rad_s = 0.0;  // d(phi_R - phi_L)/dt

  void Validate() const;
};

// Relative error of a target-to-target distance at mean depth zbar:
//   dd/d + dW/W + 2 zbar / (W d) * (psi dW + W dpsi)
double predict_rel_error(const ErrorModelInput& in);

// Drift of the depth error of a still target at depth z:
//   z^2 / (W d) * dphi/dt * dW
double predict_z_drift(const ErrorModelInput& in, double z_m);

enum class ErrorSignature { kBaselineDominated, kOrientationDominated, kInconclusive };

const char* SignatureName(ErrorSignature s);

struct DiagnoseOptions {
  // The linear model wins when it divides the residual sum of squares of
  // the constant model by at least this factor.
  double variance_ratio = 4.0;
  // Below this span of pair depths (relative to their mean) the two
  // signatures cannot be told apart.
  double min_span_fraction = 0.25;
};

struct DiagnosisResult {
  ErrorSignature classification = ErrorSignature::kInconclusive;
  // dd/d + dW/W: the fitted constant, or the intercept when the linear model
  // is selected.
  double constant_term = 0.0;
  double constant_se = 0.0;
  double slope_per_m = 0.0;  // 2 (psi dW + W dpsi) / (W d)
  double slope_se = 0.0;
  double intercept = 0.0;
  double intercept_se = 0.0;
  // slope * d / 2, attributed to the right camera's yaw (dW assumed 0).
  double implied_delta_yaw_rad = 0.0;
  double zbar_mean_m = 0.0;
  double zbar_span_m = 0.0;
  double rss_constant = 0.0;
  double rss_linear = 0.0;
  double variance_ratio = 0.0;
  bool span_sufficient = false;
  std::vector<double> zbar_m;
  std::vector<double> mean_rel_err;
  std::vector<double> residual_constant;
  std::vector<double> residual_linear;
};

// Constant vs linear fit of each pair's time-mean relative error against
// its mean depth.
DiagnosisResult diagnose(const DistanceReport& report, double baseline_m,
                         const DiagnoseOptions& options = {});

struct ZSlope {
  int target_id = 0;
  double slope_m_s = 0.0;   // OLS slope of Z(t)
  double mean_z2_m2 = 0.0;  // time mean of Z^2
  std::size_t n_frames = 0;
};

// Throws kTooFewFrames when a trajectory has fewer than `min_frames` samples.
std::vector<ZSlope> fit_z_slopes(const std::vector<Trajectory3D>& trajectories,
                                 std::size_t min_frames = 10);

struct FocalFit {
  double delta_focal_px = 0.0;
  double fit_slope = 0.0;  // d(dZ/dt) / d<Z^2>, 1/(m s)
  double fit_slope_se = 0.0;
  double fit_intercept = 0.0;
  double r2 = 0.0;
  // True when the slope is within three standard errors of zero; the R^2
  // gate is not applied then.
  bool consistent_with_zero = false;
};

// Single-camera rotation test: dZ/dt = -v Z^2 dW / (W d) with
// v = -d(phi_R - phi_L)/dt, so dW = -(fit slope) W d / v. Throws kBadFit
// when R^2 < 0.9 for a slope that is significantly non-zero.
FocalFit estimate_domega(const std::vector<ZSlope>& slopes, double v_rad_s,
                         double focal_px, double baseline_m);

// Mean rate of phi_R - phi_L over the acquisition (OLS over frame times).
double relative_stage_speed(const DetectionSet& detections, const StageLog& left_log,
                            const StageLog& right_log, const TimingConfig& timing);

// The camera whose stage moves during the acquisition; kInvalidInput when
// both or neither move.
Side rotating_camera(const DetectionSet& detections, const StageLog& left_log,
                     const StageLog& right_log, const TimingConfig& timing);

struct SweepOptions {
  double min_px = 5900.0;
  double max_px = 6700.0;
  double step_px = 1.0;
  int max_minima_spread_steps = 2;
  ReconstructOptions reconstruct;
};

struct SweepPoint {
  double focal_px = 0.0;
  double mean_abs_slope = 0.0;
  std::vector<double> target_slopes;  // ordered like FocalCalibrationResult::target_ids
};

struct FocalCalibrationResult {
  Side side = Side::kLeft;
  double believed_focal_px = 0.0;
  double v_rad_s = 0.0;
  // Linear-fit procedure at the believed focal length.
  std::vector<ZSlope> slopes;
  FocalFit fit;
  bool has_fit = false;
  // Sweep procedure.
  bool has_sweep = false;
  std::vector<int> target_ids;
  std::vector<SweepPoint> sweep;
  double best_focal_px = 0.0;      // parabolic refinement of the grid argmin
  double best_grid_focal_px = 0.0;
  std::vector<double> per_target_best_px;
};

// Linear-fit procedure on a single-camera rotation dataset.
FocalCalibrationResult focal_fit(const DetectionSet& detections, const RigConfig& rig,
                                 const StageLog& left_log, const StageLog& right_log,
                                 const TimingConfig& timing,
                                 const ReconstructOptions& options = {});

// Reconstructs the dataset for every focal length of the rotating camera on
// the grid and picks the one that minimizes the mean |dZ/dt| over targets.
// Throws kNoInteriorMinimum when the minimum sits on the grid boundary and
// kInconsistentMinima when per-target minima spread over more than
// max_minima_spread_steps grid steps.
FocalCalibrationResult focal_sweep(const DetectionSet& detections, const RigConfig& rig,
                                   const StageLog& left_log, const StageLog& right_log,
                                   const TimingConfig& timing,
                                   const SweepOptions& options = {});

struct KabschResult {
  double angle_rad = 0.0;
  double rmsd_px = 0.0;
};

// Optimal in-plane rotation taking `reference` onto `current` about their
// centroids. Throws kDegenerateConfiguration with fewer than two distinct
// points and kMismatchedTargets on a size mismatch.
KabschResult kabsch_angle(std::span<const Vec2> reference, std::span<const Vec2> current);

struct AngleCheck {
  std::size_t reference_frames = 0;
  std::vector<std::int64_t> frames;
  std::vector<double> kabsch_rad;
  std::vector<double> stage_rad;
  std::vector<double> error_rad;  // stage - kabsch
  double max_abs_error_rad = 0.0;
  double rms_error_rad = 0.0;
};

// Compares the interpolated stage angle at each camera frame with the angle
// recovered from the checkerboard corners. The reference corner positions
// are averaged over the leading frames where the stage is at home.
AngleCheck verify_angle_interpolation(const CheckerboardSequence& sequence,
                                      const TimingConfig& timing);

struct HomeRepeatability {
  std::vector<double> fluctuations_rad;
  double median_rad = 0.0;
  double max_abs_rad = 0.0;
  double std_rad = 0.0;
};

// Delta u / focal for every target between consecutive snapshots.
HomeRepeatability home_repeatability(const std::vector<Snapshot>& snapshots,
                                     double focal_px);

}  // namespace comove
