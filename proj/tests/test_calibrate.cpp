#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "comove/calibrate.hpp"
#include "comove/error.hpp"
#include "comove/fit.hpp"

using namespace comove;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidInput;
}

Scene StaticScene(double z_min, double z_max, double sigma = 0.1, std::uint64_t seed = 7) {
  Scene s;
  s.rig = presets::test_rig();
  s.targets = default_targets(s.rig, 7, z_min, z_max);
  s.noise_sigma_px = sigma;
  s.duration_s = 1.0;
  s.seed = seed;
  return s;
}

// Simulates with the true rig, reconstructs with the believed one.
DistanceReport Report(const Scene& s, const ErrorInjection& inj) {
  const SimulationResult sim = synth_detections(s, inj);
  const auto [rig, timing] = apply_injection(s.rig, s.timing, inj);
  const auto trajs = reconstruct_sequence(sim.detections, rig, sim.left_log, sim.right_log, timing);
  return pairwise_report(trajs, sim.truth.distances_m);
}

struct FocalData {
  SimulationResult sim;
  RigConfig believed;
  TimingConfig timing;
};

FocalData FocalScene(Side side, double delta_px, double sigma = 0.1, std::uint64_t seed = 11) {
  Scene s = StaticScene(20.0, 40.0, sigma, seed);
  ErrorInjection inj;
  if (side == Side::kLeft) {
    s.left_motion = MotionProfile::ConstantSpeed(6 * kDeg);
    inj.delta_focal_left_px = delta_px;
  } else {
    s.right_motion = MotionProfile::ConstantSpeed(-6 * kDeg);
    inj.delta_focal_right_px = delta_px;
  }
  FocalData out;
  out.sim = synth_detections(s, inj);
  std::tie(out.believed, out.timing) = apply_injection(s.rig, s.timing, inj);
  return out;
}

std::vector<Vec2> Grid(int nx, int ny, double pitch) {
  std::vector<Vec2> pts;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) pts.emplace_back(100.0 + i * pitch, -40.0 + j * pitch);
  return pts;
}

std::vector<Vec2> RotateAbout(const std::vector<Vec2>& pts, double angle) {
  Vec2 c = Vec2::Zero();
  for (const Vec2& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  const Eigen::Rotation2Dd r(angle);
  std::vector<Vec2> out;
  for (const Vec2& p : pts) out.push_back(c + r * (p - c));
  return out;
}

}  // namespace

// --- error model ------------------------------------------------------------

TEST(Predict, NoErrorsNoDeviation) {
  ErrorModelInput in;
  in.psi_rad = -0.22;
  EXPECT_EQ(predict_rel_error(in), 0.0);
  EXPECT_EQ(predict_z_drift(in, 30.0), 0.0);
}

TEST(Predict, BaselineTermIsConstant) {
  ErrorModelInput in;
  in.baseline_m = 10.7;
  in.delta_baseline_m = 0.1605;
  for (double z : {20.0, 30.0, 40.0}) {
    in.zbar_m = z;
    EXPECT_NEAR(predict_rel_error(in), 0.015, 1e-15);
  }
}

TEST(Predict, YawTermGrowsLinearly) {
  ErrorModelInput in;
  in.baseline_m = 10.7;
  in.delta_psi_rad = 0.003;
  in.zbar_m = 20.0;
  const double e20 = predict_rel_error(in);
  in.zbar_m = 40.0;
  const double e40 = predict_rel_error(in);
  EXPECT_NEAR((e40 - e20) / 20.0, 2 * 0.003 / 10.7, 1e-15);
  EXPECT_NEAR((e40 - e20) / 20.0, 5.61e-4, 1e-6);
  EXPECT_NEAR(e20, 20.0 * 2 * 0.003 / 10.7, 1e-15);
}

TEST(Predict, FocalTermsCombine) {
  ErrorModelInput in;
  in.focal_px = 6300;
  in.baseline_m = 10;
  in.psi_rad = -0.2;
  in.delta_focal_px = 30;
  in.zbar_m = 25;
  EXPECT_NEAR(predict_rel_error(in), 30.0 / 6300 + 2 * 25 / (6300.0 * 10) * (-0.2 * 30), 1e-15);
}

TEST(Predict, DriftExample) {
  ErrorModelInput in;
  in.focal_px = 6314.8;
  in.baseline_m = 10.7;
  in.delta_focal_px = 41.61;
  in.stage_speed_rad_s = 6 * kDeg;
  const double drift = predict_z_drift(in, 30.0);
  EXPECT_NEAR(drift, 0.10472 * 900 * 41.61 / (6314.8 * 10.7), 1e-5);
  EXPECT_NEAR(drift, 0.058, 0.0005);
  EXPECT_NEAR(predict_z_drift(in, 60.0) / drift, 4.0, 1e-12);
  in.delta_focal_px = 0;
  EXPECT_EQ(predict_z_drift(in, 30.0), 0.0);
}

TEST(Predict, RejectsNonPositiveScale) {
  ErrorModelInput in;
  in.baseline_m = 0;
  EXPECT_EQ(CodeOf([&] { predict_rel_error(in); }), ErrorCode::kInvalidInput);
}

// --- diagnosis --------------------------------------------------------------

TEST(Diagnose, BaselineError) {
  ErrorInjection inj;
  inj.delta_baseline_m = 0.1605;
  const DiagnosisResult d = diagnose(Report(StaticScene(20, 40), inj), 10.7);
  EXPECT_EQ(d.classification, ErrorSignature::kBaselineDominated);
  EXPECT_NEAR(d.constant_term, 0.015, 0.002);
  EXPECT_TRUE(d.span_sufficient);
  EXPECT_EQ(d.zbar_m.size(), 21u);
}

TEST(Diagnose, YawError) {
  ErrorInjection inj;
  inj.delta_yaw_rad = 0.003;
  const DiagnosisResult d = diagnose(Report(StaticScene(20, 40), inj), 10.7);
  EXPECT_EQ(d.classification, ErrorSignature::kOrientationDominated);
  EXPECT_NEAR(d.implied_delta_yaw_rad, 0.003, 0.0003);
  EXPECT_NEAR(d.slope_per_m, 5.6e-4, 0.6e-4);
  EXPECT_NEAR(d.constant_term, 0.0, 0.003);
  EXPECT_GE(d.variance_ratio, 4.0);
}

TEST(Diagnose, ShortSpanIsInconclusive) {
  ErrorInjection inj;
  inj.delta_yaw_rad = 0.003;
  const DiagnosisResult d = diagnose(Report(StaticScene(20, 25), inj), 10.7);
  EXPECT_EQ(d.classification, ErrorSignature::kInconclusive);
  EXPECT_FALSE(d.span_sufficient);
  EXPECT_LT(d.zbar_span_m, 0.25 * d.zbar_mean_m);
}

TEST(Diagnose, TooFewPairsIsInconclusive) {
  DistanceReport r;
  r.pairs.resize(2);
  r.pairs[0].zbar_m = 20;
  r.pairs[1].zbar_m = 40;
  r.pairs[1].mean_rel_err = 0.01;
  EXPECT_EQ(diagnose(r, 10).classification, ErrorSignature::kInconclusive);
}

TEST(Diagnose, ExactLinearData) {
  DistanceReport r;
  for (int k = 0; k < 6; ++k) {
    PairReport p;
    p.zbar_m = 20 + 4 * k;
    p.mean_rel_err = 0.002 + 5e-4 * p.zbar_m;
    r.pairs.push_back(p);
  }
  const DiagnosisResult d = diagnose(r, 10.0);
  EXPECT_EQ(d.classification, ErrorSignature::kOrientationDominated);
  EXPECT_NEAR(d.slope_per_m, 5e-4, 1e-12);
  EXPECT_NEAR(d.constant_term, 0.002, 1e-12);
  EXPECT_NEAR(d.implied_delta_yaw_rad, 5e-4 * 10.0 / 2, 1e-12);
}

TEST(Diagnose, RelabelingAndFrameShiftInvariance) {
  ErrorInjection inj;
  inj.delta_yaw_rad = 0.003;
  const Scene s = StaticScene(20, 40);
  const SimulationResult sim = synth_detections(s, inj);
  const auto [rig, timing] = apply_injection(s.rig, s.timing, inj);
  auto trajs = reconstruct_sequence(sim.detections, rig, sim.left_log, sim.right_log, timing);
  const DiagnosisResult a = diagnose(pairwise_report(trajs, sim.truth.distances_m), 10.7);

  std::map<PairKey, double> relabeled;
  for (const auto& [k, v] : sim.truth.distances_m) {
    const int x = 100 - k.first, y = 100 - k.second;
    relabeled[{std::min(x, y), std::max(x, y)}] = v;
  }
  for (auto& t : trajs) {
    t.target_id = 100 - t.target_id;
    for (auto& f : t.frames) f += 1000;
  }
  const DiagnosisResult b = diagnose(pairwise_report(trajs, relabeled), 10.7);
  EXPECT_EQ(a.classification, b.classification);
  EXPECT_NEAR(a.slope_per_m, b.slope_per_m, 1e-12);
  EXPECT_NEAR(a.constant_term, b.constant_term, 1e-12);
  EXPECT_NEAR(a.variance_ratio, b.variance_ratio, 1e-6 * a.variance_ratio);
}

// --- depth slopes and the focal fit -------------------------------------------

TEST(ZSlopes, ConstantAndRamp) {
  std::vector<Trajectory3D> trajs(2);
  for (int k = 0; k < 40; ++k) {
    const double t = k / 155.0;
    for (auto& tr : trajs) {
      tr.frames.push_back(k);
      tr.times_s.push_back(t);
    }
    trajs[0].points_m.emplace_back(0, 0, 25.0);
    trajs[1].points_m.emplace_back(0, 0, 30.0 + 0.05 * t);
  }
  trajs[1].target_id = 1;
  const auto s = fit_z_slopes(trajs);
  EXPECT_NEAR(s[0].slope_m_s, 0.0, 1e-12);
  EXPECT_NEAR(s[0].mean_z2_m2, 625.0, 1e-9);
  EXPECT_NEAR(s[1].slope_m_s, 0.05, 1e-9);
  EXPECT_EQ(s[1].n_frames, 40u);
}

TEST(ZSlopes, TooFewFrames) {
  std::vector<Trajectory3D> trajs(1);
  for (int k = 0; k < 5; ++k) {
    trajs[0].frames.push_back(k);
    trajs[0].times_s.push_back(k);
    trajs[0].points_m.emplace_back(0, 0, 1);
  }
  EXPECT_EQ(CodeOf([&] { fit_z_slopes(trajs); }), ErrorCode::kTooFewFrames);
}

TEST(ZSlopes, ProportionalToSquaredDepth) {
  const FocalData f = FocalScene(Side::kLeft, 41.61);
  const auto trajs = reconstruct_sequence(f.sim.detections, f.believed, f.sim.left_log,
                                          f.sim.right_log, f.timing);
  const auto slopes = fit_z_slopes(trajs);
  std::vector<double> x, y;
  for (const auto& s : slopes) {
    x.push_back(s.mean_z2_m2);
    y.push_back(s.slope_m_s);
  }
  EXPECT_GT(fit_line(x, y).r2, 0.99);
}

TEST(FocalFit, ZeroInjection) {
  const FocalData f = FocalScene(Side::kLeft, 0.0);
  const FocalCalibrationResult r =
      focal_fit(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing);
  EXPECT_EQ(r.side, Side::kLeft);
  EXPECT_NEAR(r.fit.delta_focal_px, 0.0, 2.0);
}

TEST(FocalFit, LeftCamera) {
  const FocalData f = FocalScene(Side::kLeft, 41.61);
  const FocalCalibrationResult r =
      focal_fit(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing);
  EXPECT_EQ(r.side, Side::kLeft);
  EXPECT_NEAR(r.v_rad_s, 6 * kDeg, 1e-9);
  EXPECT_NEAR(r.fit.delta_focal_px, 41.61, 3.0);
  EXPECT_GT(r.fit.r2, 0.99);
}

TEST(FocalFit, RightCamera) {
  const FocalData f = FocalScene(Side::kRight, 33.52);
  const FocalCalibrationResult r =
      focal_fit(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing);
  EXPECT_EQ(r.side, Side::kRight);
  EXPECT_NEAR(r.v_rad_s, 6 * kDeg, 1e-9);
  EXPECT_NEAR(r.fit.delta_focal_px, 33.52, 3.0);
}

TEST(FocalFit, NeedsExactlyOneRotatingCamera) {
  const Scene s = StaticScene(20, 40);
  const SimulationResult sim = synth_detections(s);
  EXPECT_EQ(CodeOf([&] { focal_fit(sim.detections, s.rig, sim.left_log, sim.right_log, s.timing); }),
            ErrorCode::kInvalidInput);
}

TEST(FocalFit, ScatteredSlopesAreABadFit) {
  // A significant trend (t ~ 3.2) buried in scatter (R^2 ~ 0.56).
  const double z2[] = {400, 500, 600, 700, 900, 1000, 1200, 1400, 1600, 1800};
  const double jitter[] = {0.03, -0.03, 0.04, -0.04, 0.03, -0.04, 0.04, -0.03, 0.03, -0.04};
  std::vector<ZSlope> slopes;
  for (int k = 0; k < 10; ++k) slopes.push_back({k, 1e-4 * z2[k] + jitter[k], z2[k], 155});
  EXPECT_EQ(CodeOf([&] { estimate_domega(slopes, 0.1, 6300, 10.7); }), ErrorCode::kBadFit);
}

TEST(FocalFit, ScatterAroundZeroIsNotABadFit) {
  std::vector<ZSlope> slopes;
  const double z2[] = {400, 600, 900, 1200, 1600};
  const double dz[] = {0.02, -0.01, 0.03, -0.015, 0.05};
  for (int k = 0; k < 5; ++k) slopes.push_back({k, dz[k], z2[k], 155});
  EXPECT_TRUE(estimate_domega(slopes, 0.1, 6300, 10.7).consistent_with_zero);
}

TEST(FocalFit, ExactSlopesInvertTheModel) {
  std::vector<ZSlope> slopes;
  const double v = 0.1, W = 6300, d = 10.7, dW = 25.0;
  for (double z : {20.0, 25.0, 30.0, 35.0, 40.0})
    slopes.push_back({0, -v * z * z * dW / (W * d), z * z, 155});
  const FocalFit f = estimate_domega(slopes, v, W, d);
  EXPECT_NEAR(f.delta_focal_px, dW, 1e-9);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

// Measured depth drift against -v Z^2 dW / (W d), target by target.
TEST(FocalFit, DriftMatchesFirstOrderPrediction) {
  for (double dW : {10.0, 40.0, 80.0}) {
    const FocalData f = FocalScene(Side::kLeft, dW, 0.0);
    const auto trajs = reconstruct_sequence(f.sim.detections, f.believed, f.sim.left_log,
                                            f.sim.right_log, f.timing);
    const double W = 0.5 * (f.believed.left.intrinsics.focal_px + f.believed.right.intrinsics.focal_px);
    for (const ZSlope& s : fit_z_slopes(trajs)) {
      const double predicted = -(6 * kDeg) * s.mean_z2_m2 * dW / (W * 10.7);
      EXPECT_NEAR(s.slope_m_s / predicted, 1.0, 0.05) << "dW " << dW << " target " << s.target_id;
    }
  }
}

// --- focal sweep --------------------------------------------------------------

TEST(FocalSweep, LeftCamera) {
  const FocalData f = FocalScene(Side::kLeft, 41.61);
  SweepOptions o;
  o.min_px = 6270;
  o.max_px = 6370;
  const FocalCalibrationResult r =
      focal_sweep(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing, o);
  EXPECT_NEAR(r.best_focal_px, 6314.8, 2.0);
  EXPECT_EQ(r.sweep.size(), 101u);
  EXPECT_EQ(r.per_target_best_px.size(), 7u);
  const auto [lo, hi] = std::minmax_element(r.per_target_best_px.begin(), r.per_target_best_px.end());
  EXPECT_LE(*hi - *lo, 2.0);
}

TEST(FocalSweep, RightCamera) {
  const FocalData f = FocalScene(Side::kRight, 33.52);
  SweepOptions o;
  o.min_px = 6250;
  o.max_px = 6350;
  const FocalCalibrationResult r =
      focal_sweep(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing, o);
  EXPECT_EQ(r.side, Side::kRight);
  EXPECT_NEAR(r.best_focal_px, 6300.29, 2.0);
}

TEST(FocalSweep, ZeroInjectionReturnsBelievedFocal) {
  const FocalData f = FocalScene(Side::kLeft, 0.0);
  SweepOptions o;
  o.min_px = 6280;
  o.max_px = 6350;
  const FocalCalibrationResult r =
      focal_sweep(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing, o);
  EXPECT_NEAR(r.best_focal_px, f.believed.left.intrinsics.focal_px, 1.0);
}

TEST(FocalSweep, ObjectiveIsConvexAroundTheMinimum) {
  const FocalData f = FocalScene(Side::kLeft, 41.61);
  SweepOptions o;
  o.min_px = 6290;
  o.max_px = 6340;
  const FocalCalibrationResult r =
      focal_sweep(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing, o);
  std::size_t best = 0;
  for (std::size_t k = 0; k < r.sweep.size(); ++k)
    if (r.sweep[k].mean_abs_slope < r.sweep[best].mean_abs_slope) best = k;
  for (std::size_t k = 1; k <= best; ++k)
    EXPECT_LT(r.sweep[k].mean_abs_slope, r.sweep[k - 1].mean_abs_slope) << r.sweep[k].focal_px;
  for (std::size_t k = best + 1; k < r.sweep.size(); ++k)
    EXPECT_GT(r.sweep[k].mean_abs_slope, r.sweep[k - 1].mean_abs_slope) << r.sweep[k].focal_px;
}

TEST(FocalSweep, BoundaryMinimum) {
  const FocalData f = FocalScene(Side::kLeft, 41.61);
  SweepOptions o;
  o.min_px = 6330;
  o.max_px = 6360;
  EXPECT_EQ(CodeOf([&] {
              focal_sweep(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing, o);
            }),
            ErrorCode::kNoInteriorMinimum);
}

TEST(FocalSweep, DriftingTargetBreaksAgreement) {
  FocalData f = FocalScene(Side::kLeft, 41.61);
  // Target 7 is not still: its left image creeps by 3 px/s.
  for (FrameDetections& fr : f.sim.detections.frames) fr.left.at(7).x() += 3.0 * fr.frame / 155.0;
  SweepOptions o;
  o.min_px = 6270;
  o.max_px = 6370;
  EXPECT_EQ(CodeOf([&] {
              focal_sweep(f.sim.detections, f.believed, f.sim.left_log, f.sim.right_log, f.timing, o);
            }),
            ErrorCode::kInconsistentMinima);
}

// --- Kabsch -------------------------------------------------------------------

TEST(Kabsch, IdentityAndExactRotation) {
  const auto ref = Grid(5, 4, 30.0);
  const KabschResult same = kabsch_angle(ref, ref);
  EXPECT_EQ(same.angle_rad, 0.0);
  EXPECT_EQ(same.rmsd_px, 0.0);
  const KabschResult rot = kabsch_angle(ref, RotateAbout(ref, 0.02));
  EXPECT_NEAR(rot.angle_rad, 0.02, 1e-12);
  EXPECT_LT(rot.rmsd_px, 1e-9);
}

TEST(Kabsch, TranslationInvariance) {
  const auto ref = Grid(4, 4, 12.0);
  auto cur = RotateAbout(ref, -0.3);
  const double a = kabsch_angle(ref, cur).angle_rad;
  for (Vec2& p : cur) p += Vec2(250.0, -91.0);
  auto shifted = ref;
  for (Vec2& p : shifted) p += Vec2(-13.0, 7.0);
  EXPECT_NEAR(kabsch_angle(shifted, cur).angle_rad, a, 1e-12);
  EXPECT_NEAR(a, -0.3, 1e-12);
}

TEST(Kabsch, NoisyRotationRmsd) {
  const auto ref = Grid(19, 13, 40.0);
  auto cur = RotateAbout(ref, 0.1);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.05);
  for (Vec2& p : cur) p += Vec2(n(rng), n(rng));
  const KabschResult r = kabsch_angle(ref, cur);
  EXPECT_NEAR(r.angle_rad, 0.1, 1e-4);
  EXPECT_NEAR(r.rmsd_px, 0.05 * std::sqrt(2.0), 0.01);
}

TEST(Kabsch, Degenerate) {
  const std::vector<Vec2> one{Vec2(1, 1)};
  EXPECT_EQ(CodeOf([&] { kabsch_angle(one, one); }), ErrorCode::kDegenerateConfiguration);
  const std::vector<Vec2> same{Vec2(3, 4), Vec2(3, 4), Vec2(3, 4)};
  EXPECT_EQ(CodeOf([&] { kabsch_angle(same, same); }), ErrorCode::kDegenerateConfiguration);
  const std::vector<Vec2> two{Vec2(0, 0), Vec2(1, 0)};
  EXPECT_EQ(CodeOf([&] { kabsch_angle(two, same); }), ErrorCode::kMismatchedTargets);
}

TEST(AngleCheck, SlowPreset) {
  const CheckerboardScene sc = presets::checkerboard("slow");
  const AngleCheck c = verify_angle_interpolation(synth_checkerboard(sc), sc.timing);
  EXPECT_GT(c.reference_frames, 50u);
  EXPECT_GT(c.frames.size(), 1000u);
  EXPECT_LT(c.max_abs_error_rad, 5e-5);
}

TEST(AngleCheck, NoiselessBoardIsExactUpToInterpolation) {
  CheckerboardScene sc = presets::checkerboard("moderate");
  sc.noise_sigma_px = 0.0;
  sc.frame_jitter_s = 0.0;
  const AngleCheck c = verify_angle_interpolation(synth_checkerboard(sc), sc.timing);
  // Only the linear interpolation of a 10 deg/s^2 profile remains.
  EXPECT_LT(c.max_abs_error_rad, 10 * kDeg * 1e-6 / 8 + 1e-12);
}

// --- home repeatability -------------------------------------------------------

TEST(Home, IdenticalSnapshots) {
  const Snapshot s{{1, Vec2(10, 2)}, {2, Vec2(-40, 9)}};
  const HomeRepeatability h = home_repeatability({s, s, s}, 6300);
  EXPECT_EQ(h.fluctuations_rad.size(), 4u);
  EXPECT_EQ(h.median_rad, 0.0);
  EXPECT_EQ(h.max_abs_rad, 0.0);
}

TEST(Home, DisplacementOverFocal) {
  const Snapshot a{{1, Vec2(10, 2)}};
  const Snapshot b{{1, Vec2(10.63, 2)}};
  const HomeRepeatability h = home_repeatability({a, b}, 6300);
  EXPECT_NEAR(h.fluctuations_rad[0], 1e-4, 1e-15);
}

TEST(Home, MismatchedTargets) {
  const Snapshot a{{1, Vec2(0, 0)}, {2, Vec2(1, 1)}};
  const Snapshot b{{1, Vec2(0, 0)}, {3, Vec2(1, 1)}};
  EXPECT_EQ(CodeOf([&] { home_repeatability({a, b}, 6300); }), ErrorCode::kMismatchedTargets);
}

TEST(Home, JitteredHoming) {
  Scene s = StaticScene(20, 40, 0.02);
  const auto snaps = synth_home_snapshots(s, Side::kLeft, 100, 2e-5);
  const HomeRepeatability h = home_repeatability(snaps, s.rig.left.intrinsics.focal_px);
  EXPECT_EQ(h.fluctuations_rad.size(), 99u * 7u);
  // Consecutive differences of a 2e-5 rad jitter spread by sqrt(2).
  EXPECT_NEAR(h.std_rad, std::sqrt(2.0) * 2e-5, 0.5e-5);
  EXPECT_LT(std::abs(h.median_rad), 0.5e-5);
}

TEST(Home, BelowToleranceJitter) {
  Scene s = StaticScene(20, 40, 0.02);
  const auto snaps = synth_home_snapshots(s, Side::kLeft, 100, 1e-5);
  const HomeRepeatability h = home_repeatability(snaps, s.rig.left.intrinsics.focal_px);
  EXPECT_LT(h.max_abs_rad, 6e-5);
  EXPECT_LT(std::abs(h.median_rad), 0.3e-5);
}

TEST(Home, PixelNoiseOnly) {
  Scene s = StaticScene(20, 40, 0.1);
  const double W = s.rig.left.intrinsics.focal_px;
  const HomeRepeatability h = home_repeatability(synth_home_snapshots(s, Side::kLeft, 100, 0.0), W);
  EXPECT_NEAR(h.std_rad / (std::sqrt(2.0) * 0.1 / W), 1.0, 0.1);
}

// --- error model against simulation ---------------------------------------------

TEST(ModelConsistency, SingleInjectedErrors) {
  const Scene s = StaticScene(20, 40, 0.1);
  struct Case {
    ErrorInjection inj;
    ErrorModelInput model;
  };
  std::vector<Case> cases(3);
  for (Case& c : cases) {
    c.model.focal_px = 0.5 * (6314.8 + 6300.29);
    c.model.baseline_m = 10.7;
    c.model.psi_rad = -0.22;
  }
  cases[0].inj.delta_baseline_m = 0.1605;
  cases[0].model.delta_baseline_m = 0.1605;
  cases[1].inj.delta_yaw_rad = 0.003;
  cases[1].model.delta_psi_rad = 0.003;
  cases[2].inj.delta_focal_left_px = cases[2].inj.delta_focal_right_px = 20.0;
  cases[2].model.delta_focal_px = 20.0;

  for (std::size_t i = 0; i < cases.size(); ++i) {
    const DistanceReport r = Report(s, cases[i].inj);
    std::vector<double> z, e, resid;
    for (const PairReport& p : r.pairs) {
      z.push_back(p.zbar_m);
      e.push_back(p.mean_rel_err);
      ErrorModelInput m = cases[i].model;
      m.zbar_m = p.zbar_m;
      resid.push_back(p.mean_rel_err - predict_rel_error(m));
    }
    const LinearFit fit = fit_line(z, resid);
    EXPECT_LT(std::abs(fit.slope), 3 * fit.slope_se) << "case " << i;
    // The focal term is first order on axis; off-axis targets add about 10 %.
    const double model_slack = 0.1 * cases[i].model.delta_focal_px / cases[i].model.focal_px;
    EXPECT_LT(std::abs(fit.intercept), 3 * fit.intercept_se + model_slack) << "case " << i;
  }
}
