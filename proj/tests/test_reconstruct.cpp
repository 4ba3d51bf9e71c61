#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "comove/error.hpp"
#include "comove/fit.hpp"
#include "comove/parallel.hpp"
#include "comove/reconstruct.hpp"
#include "comove/simulate.hpp"
#include "oracles.hpp"

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

Scene FieldScene(double sigma_px) {
  Scene s;
  s.rig = presets::test_rig();
  s.targets = default_targets(s.rig, 7, 20.0, 40.0);
  s.noise_sigma_px = sigma_px;
  s.duration_s = 1.0;
  return s;
}

std::map<PairKey, double> ExactDistances(const std::vector<Target>& targets) {
  std::map<PairKey, double> out;
  for (const Target& a : targets)
    for (const Target& b : targets)
      if (a.id < b.id) out[{a.id, b.id}] = (a.position_m - b.position_m).norm();
  return out;
}

}  // namespace

TEST(Dlt, SymmetricRig) {
  RigConfig rig;
  rig.baseline_m = 10.0;
  const Mat34 PL = projection_matrix(rig, Side::kLeft, 0.0);
  const Mat34 PR = projection_matrix(rig, Side::kRight, 0.0);
  const Vec3 X(0, 0, 30);
  const Vec2 ql = project(PL, X), qr = project(PR, X);
  // Parallel cameras: the target sits at +/- f d / (2 Z).
  EXPECT_NEAR(ql.x(), 6300.0 * 5.0 / 30.0, 1e-9);
  EXPECT_NEAR(qr.x(), -6300.0 * 5.0 / 30.0, 1e-9);
  EXPECT_LE((triangulate_dlt(PL, PR, ql, qr) - X).norm(), 1e-9);
}

TEST(Dlt, RandomRoundTrips) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ang(-0.05, 0.05), xy(-1.5, 1.5), z(20.0, 60.0);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    RigConfig rig = presets::test_rig(ang(rng));
    rig.left.pose.roll_rad = ang(rng);
    rig.right.pose.roll_rad = ang(rng);
    const double phl = ang(rng), phr = ang(rng);
    const Mat34 PL = projection_matrix(rig, Side::kLeft, phl);
    const Mat34 PR = projection_matrix(rig, Side::kRight, phr);
    const Vec3 X(xy(rng), xy(rng), z(rng));
    const Vec2 ql = project(PL, X), qr = project(PR, X);
    ASSERT_TRUE(inside_sensor(rig.left.intrinsics, ql));
    ASSERT_TRUE(inside_sensor(rig.right.intrinsics, qr));
    worst = std::max(worst, (triangulate_dlt(PL, PR, ql, qr) - X).norm());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Dlt, NormalizedVariantAgrees) {
  const RigConfig rig = presets::test_rig(0.22);
  const Mat34 PL = projection_matrix(rig, Side::kLeft, 0.03);
  const Mat34 PR = projection_matrix(rig, Side::kRight, -0.01);
  const Vec3 X(0.4, 3.0, 33.0);
  const Vec3 a = triangulate_dlt(PL, PR, project(PL, X), project(PR, X), {true});
  EXPECT_LE((a - X).norm(), 1e-6);
}

TEST(Dlt, HomogeneousPixelScaling) {
  const RigConfig rig = presets::test_rig();
  const Mat34 PL = projection_matrix(rig, Side::kLeft, 0.02);
  const Mat34 PR = projection_matrix(rig, Side::kRight, 0.02);
  const Vec3 X(1.0, -0.5, 25.0);
  const Vec3 ql = project(PL, X).homogeneous(), qr = project(PR, X).homogeneous();
  const Vec3 a = triangulate_dlt(PL, PR, ql, qr);
  const Vec3 b = triangulate_dlt(PL, PR, Vec3(3.5 * ql), Vec3(0.02 * qr));
  EXPECT_LE((a - b).norm(), 1e-9);
}

TEST(Dlt, IdenticalCamerasAreDegenerate) {
  const Mat34 P = projection_matrix(CameraIntrinsics{}, {}, 0.0, Vec3::Zero());
  const Vec2 q(12.0, -3.0);
  EXPECT_EQ(CodeOf([&] { triangulate_dlt(P, P, q, q); }), ErrorCode::kDegenerateGeometry);
}

TEST(Dlt, PointBehindTheRig) {
  RigConfig rig;
  const Mat34 PL = projection_matrix(rig, Side::kLeft, 0.0);
  const Mat34 PR = projection_matrix(rig, Side::kRight, 0.0);
  // Crossed rays: a negative disparity meets behind both cameras.
  EXPECT_EQ(CodeOf([&] { triangulate_dlt(PL, PR, Vec2(-500, 0), Vec2(500, 0)); }),
            ErrorCode::kBehindCamera);
}

TEST(ClosedForm, ParallelStereo) {
  EXPECT_NEAR(z_closed_form(6300.0, 10.0, 2100.0, 0.0, 0.0), 30.0, 1e-12);
  // Vergence shifts the effective disparity.
  EXPECT_NEAR(z_closed_form(6300.0, 10.0, 2100.0 - 63.0, -0.01, 0.0), 30.0, 1e-12);
}

TEST(ClosedForm, Divergent) {
  EXPECT_EQ(CodeOf([] { z_closed_form(6300.0, 10.0, 63.0, 0.004, 0.006); }),
            ErrorCode::kDivergentDepth);
}

TEST(ClosedForm, EqualsDltForParallelCameras) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> f(5000, 7000), d(2, 15), xy(-2, 2), z(10, 80);
  for (int k = 0; k < 100; ++k) {
    RigConfig rig;
    rig.baseline_m = d(rng);
    rig.left.intrinsics.focal_px = rig.right.intrinsics.focal_px = f(rng);
    const Mat34 PL = projection_matrix(rig, Side::kLeft, 0.0);
    const Mat34 PR = projection_matrix(rig, Side::kRight, 0.0);
    const Vec3 X(xy(rng), xy(rng), z(rng));
    const Vec2 ql = project(PL, X), qr = project(PR, X);
    const double zd = triangulate_dlt(PL, PR, ql, qr).z();
    const double zc = z_closed_form(rig.left.intrinsics.focal_px, rig.baseline_m,
                                    ql.x() - qr.x(), 0.0, 0.0);
    EXPECT_NEAR(zc / zd, 1.0, 1e-6);
    EXPECT_NEAR(zc, oracle::parallel_depth(rig.left.intrinsics.focal_px, rig.baseline_m,
                                           ql.x() - qr.x()), 1e-9);
  }
}

TEST(ClosedForm, FirstOrderInTheAngles) {
  // Small yaw and stage angles: the linearized formula stays within a
  // second-order error of the exact triangulation.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> a(-2e-3, 2e-3), xy(-1, 1), z(20, 40);
  for (int k = 0; k < 50; ++k) {
    RigConfig rig;
    rig.baseline_m = 10.7;
    rig.left.pose.yaw_rad = a(rng);
    rig.right.pose.yaw_rad = a(rng);
    const double pl = a(rng), pr = a(rng);
    const Mat34 PL = projection_matrix(rig, Side::kLeft, pl);
    const Mat34 PR = projection_matrix(rig, Side::kRight, pr);
    const Vec3 X(xy(rng), xy(rng), z(rng));
    const Vec2 ql = project(PL, X), qr = project(PR, X);
    const double zc = z_closed_form(6300.0, 10.7, ql.x() - qr.x(),
                                    rig.right.pose.yaw_rad - rig.left.pose.yaw_rad, pr - pl);
    EXPECT_NEAR(zc / X.z(), 1.0, 1e-3);
  }
}

TEST(ClosedForm, SignOfTheAngleTerm) {
  // Converging cameras (yaw_R - yaw_L < 0) see a smaller disparity, so the
  // correction must add back (yaw_L - yaw_R) * focal.
  RigConfig rig;
  rig.baseline_m = 10.0;
  rig.left.pose.yaw_rad = 0.001;
  rig.right.pose.yaw_rad = -0.001;
  const Vec3 X(0, 0, 30);
  const Vec2 ql = project(projection_matrix(rig, Side::kLeft, 0.0), X);
  const Vec2 qr = project(projection_matrix(rig, Side::kRight, 0.0), X);
  EXPECT_LT(ql.x() - qr.x(), 2100.0);
  // Off-axis targets leave a (1 + tan^2) residue of a few mm; dropping the
  // angle term costs about 19 cm.
  EXPECT_NEAR(z_closed_form(6300.0, 10.0, ql.x() - qr.x(), -0.002, 0.0), 30.0, 0.01);
  EXPECT_GT(z_closed_form(6300.0, 10.0, ql.x() - qr.x(), 0.0, 0.0) - 30.0, 0.15);
}

TEST(Sequence, StillCamerasGiveConstantTrajectories) {
  const Scene s = FieldScene(0.0);
  const SimulationResult sim = synth_detections(s);
  const auto trajs = reconstruct_sequence(sim.detections, s.rig, sim.left_log, sim.right_log, s.timing);
  ASSERT_EQ(trajs.size(), 7u);
  for (const Trajectory3D& t : trajs) {
    ASSERT_EQ(t.size(), sim.detections.size());
    for (const Vec3& p : t.points_m) {
      EXPECT_LE((p - t.points_m.front()).norm(), 1e-9);
      EXPECT_LE((p - s.targets[t.target_id - 1].position_m).norm(), 1e-6);
    }
  }
}

TEST(Sequence, DynamicSceneHasNoTrend) {
  Scene s = FieldScene(0.1);
  s.left_motion = MotionProfile::ConstantSpeed(6 * kDeg);
  s.right_motion = MotionProfile::ConstantSpeed(6 * kDeg);
  const SimulationResult sim = synth_detections(s);
  const auto trajs = reconstruct_sequence(sim.detections, s.rig, sim.left_log, sim.right_log, s.timing);
  for (const Trajectory3D& t : trajs) {
    std::vector<double> z;
    for (const Vec3& p : t.points_m) z.push_back(p.z());
    const LinearFit fit = fit_line(t.times_s, z);
    EXPECT_LT(std::abs(fit.slope), 3.5 * fit.slope_se + 1e-12) << "target " << t.target_id;
    EXPECT_NEAR(fit.intercept + fit.slope * 0.5, s.targets[t.target_id - 1].position_m.z(), 0.05);
  }
}

TEST(Sequence, UncoveredFrameIsOutOfRange) {
  Scene s = FieldScene(0.0);
  s.duration_s = 0.3;
  SimulationResult sim = synth_detections(s);
  StageLog shortened = sim.right_log;
  // Keep samples up to 0.2 s; frame 32 at 0.2065 s is the first uncovered.
  shortened.angles.resize(static_cast<std::size_t>(200 - shortened.first_index + 1));
  try {
    reconstruct_sequence(sim.detections, s.rig, sim.left_log, shortened, s.timing);
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
    EXPECT_NE(std::string(e.what()).find("frame 32"), std::string::npos) << e.what();
  }
}

TEST(Sequence, OneSidedTargetsAreSkipped) {
  const Scene s = FieldScene(0.0);
  SimulationResult sim = synth_detections(s);
  sim.detections.frames[3].right.erase(2);
  const auto trajs = reconstruct_sequence(sim.detections, s.rig, sim.left_log, sim.right_log, s.timing);
  EXPECT_EQ(trajs[1].size(), sim.detections.size() - 1);
  EXPECT_EQ(trajs[0].size(), sim.detections.size());
}

TEST(Sequence, ThreadCountDoesNotChangeResults) {
  Scene s = FieldScene(0.1);
  s.left_motion = MotionProfile::ConstantSpeed(6 * kDeg);
  const SimulationResult sim = synth_detections(s);
  set_thread_count(1);
  const auto a = reconstruct_sequence(sim.detections, s.rig, sim.left_log, sim.right_log, s.timing);
  set_thread_count(4);
  const auto b = reconstruct_sequence(sim.detections, s.rig, sim.left_log, sim.right_log, s.timing);
  set_thread_count(1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].size(); ++k) EXPECT_EQ(a[i].points_m[k], b[i].points_m[k]);
}

TEST(Report, ExactReconstructionHasZeroError) {
  std::vector<Trajectory3D> trajs(2);
  trajs[0].target_id = 1;
  trajs[1].target_id = 2;
  for (int k = 0; k < 5; ++k) {
    for (auto& t : trajs) {
      t.frames.push_back(k);
      t.times_s.push_back(k / 155.0);
    }
    trajs[0].points_m.emplace_back(0, 0, 20);
    trajs[1].points_m.emplace_back(3, 4, 20);
  }
  const DistanceReport r = pairwise_report(trajs, {{{1, 2}, 5.0}});
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].mean_rel_err, 0.0);
  EXPECT_EQ(r.pairs[0].std_rel_err, 0.0);
  EXPECT_EQ(r.pairs[0].zbar_m, 20.0);
  EXPECT_EQ(r.pairs[0].n_frames(), 5u);
}

TEST(Report, MeanIsPlainAverageOfFrames) {
  std::vector<Trajectory3D> trajs(2);
  trajs[0].target_id = 4;
  trajs[1].target_id = 9;
  const double gaps[] = {1.0, 1.1, 0.95, 1.02};
  for (int k = 0; k < 4; ++k) {
    for (auto& t : trajs) {
      t.frames.push_back(k);
      t.times_s.push_back(k);
    }
    trajs[0].points_m.emplace_back(0, 0, 10 + k);
    trajs[1].points_m.emplace_back(gaps[k], 0, 12 + k);
  }
  const DistanceReport r = pairwise_report(trajs, {{{4, 9}, 2.0}});
  double expected = 0, zbar = 0;
  for (int k = 0; k < 4; ++k) {
    expected += (std::hypot(gaps[k], 2.0) - 2.0) / 2.0 / 4.0;
    zbar += (11.0 + k) / 4.0;
  }
  EXPECT_NEAR(r.pairs[0].mean_rel_err, expected, 1e-15);
  EXPECT_NEAR(r.pairs[0].zbar_m, zbar, 1e-12);
}

TEST(Report, MissingTruth) {
  std::vector<Trajectory3D> trajs(3);
  for (int i = 0; i < 3; ++i) {
    trajs[i].target_id = i + 1;
    trajs[i].frames = {0};
    trajs[i].times_s = {0.0};
    trajs[i].points_m = {Vec3(i, 0, 20)};
  }
  EXPECT_EQ(CodeOf([&] { pairwise_report(trajs, {{{1, 2}, 1.0}, {{1, 3}, 2.0}}); }),
            ErrorCode::kMissingTruth);
}

TEST(Report, NoiselessSceneIsExact) {
  const Scene s = FieldScene(0.0);
  const SimulationResult sim = synth_detections(s);
  const auto trajs = reconstruct_sequence(sim.detections, s.rig, sim.left_log, sim.right_log, s.timing);
  const DistanceReport r = pairwise_report(trajs, ExactDistances(s.targets));
  EXPECT_EQ(r.pairs.size(), 21u);
  EXPECT_LT(r.max_abs_mean_rel_err(), 1e-6);
  for (const PairReport& p : r.pairs)
    for (double e : p.rel_err) EXPECT_LT(std::abs(e), 1e-6);
}

TEST(Report, BaselineErrorIsConstantInDepth) {
  const Scene s = FieldScene(0.1);
  ErrorInjection inj;
  inj.delta_baseline_m = 0.1605;
  const SimulationResult sim = synth_detections(s, inj);
  const auto [rig, timing] = apply_injection(s.rig, s.timing, inj);
  const auto trajs = reconstruct_sequence(sim.detections, rig, sim.left_log, sim.right_log, timing);
  const DistanceReport r = pairwise_report(trajs, sim.truth.distances_m);
  for (const PairReport& p : r.pairs) EXPECT_NEAR(p.mean_rel_err, 0.015, 0.002);
}

TEST(Invariance, SolidTranslation) {
  const RigConfig rig = presets::test_rig(0.1);
  const Vec3 shift(12.0, -3.0, 7.5);
  const Vec3 XA(0.5, 0.2, 24.0), XB(-1.0, 0.8, 36.0);
  auto tri = [&](const Vec3& offset, const Vec3& X) {
    const Mat34 PL = projection_matrix(rig.left.intrinsics, rig.left.pose, 0.05,
                                       rig.center(Side::kLeft) + offset);
    const Mat34 PR = projection_matrix(rig.right.intrinsics, rig.right.pose, -0.02,
                                       rig.center(Side::kRight) + offset);
    // Pixels are taken from the untranslated rig.
    const Mat34 pl = projection_matrix(rig, Side::kLeft, 0.05);
    const Mat34 pr = projection_matrix(rig, Side::kRight, -0.02);
    return triangulate_dlt(PL, PR, project(pl, X), project(pr, X));
  };
  const Vec3 a0 = tri(Vec3::Zero(), XA), b0 = tri(Vec3::Zero(), XB);
  const Vec3 a1 = tri(shift, XA), b1 = tri(shift, XB);
  EXPECT_LE((a1 - a0 - shift).norm(), 1e-8);
  EXPECT_LE((b1 - b0 - shift).norm(), 1e-8);
  EXPECT_NEAR((a1 - b1).norm() / (a0 - b0).norm(), 1.0, 1e-9);
}
