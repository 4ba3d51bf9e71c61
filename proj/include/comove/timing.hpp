//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "comove/geometry.hpp"

namespace comove {

// Camera frames live at t_i = offset + i * dt_camera, stage samples at
// t_j = j * dt_stage, both on the stage clock.
struct TimingConfig {
  double dt_camera = 1.0 / 155.0;
  double dt_stage = 1.0 / 1000.0;
  // Delay of the camera clock relative to the stage clock.
  double offset = 0.0;

  void Validate() const;
};

double camera_time(std::int64_t frame, const TimingConfig& timing);

// Uniformly sampled stage angle. Sample k of `angles` has index
// first_index + k and time (first_index + k) / rate_hz.
struct StageLog {
  std::string stage_id;
  std::int64_t first_index = 0;
  double rate_hz = 1000.0;
  std::vector<double> angles;

  std::size_t size() const { return angles.size(); }
  double time_of(std::size_t k) const {
    return static_cast<double>(first_index + static_cast<std::int64_t>(k)) /
           rate_hz;
  }
  double start_time() const { return time_of(0); }
  double end_time() const { return time_of(angles.size() - 1); }

  void Validate() const;
};

// Linear interpolation between the two samples bracketing `t`. Throws
// kOutOfRange outside the logged span; never extrapolates.
double stage_angle_at(const StageLog& log, double t);

// Horizontal image coordinate of one target, sampled on a uniform grid of
// `rate_hz` (camera clock, no offset applied).
struct TargetTrack {
  int target_id = 0;
  double rate_hz = 155.0;
  std::vector<std::int64_t> samples;
  std::vector<double> u_px;

  double time_of(std::size_t k) const {
    return static_cast<double>(samples[k]) / rate_hz;
  }
};

// Linear resampling onto the grid k / rate_hz covering the track's span.
// Throws kEmptyTrack for tracks with fewer than two samples.
TargetTrack resample_track(const TargetTrack& track, double rate_hz);

struct OffsetOptions {
  // Minimum number of leading still camera frames used for the home
  // position of each target.
  int min_home_frames = 10;
  // Per-target lags may differ by at most this many stage samples.
  int max_disagreement_samples = 2;
};

struct TargetCorrelation {
  int target_id = 0;
  double home_u_px = 0.0;
  std::int64_t best_lag_samples = 0;
  std::vector<double> correlation;  // C(tau) for tau = 0 .. max lag
};

struct OffsetEstimate {
  double offset_s = 0.0;
  double resolution_s = 0.0;
  std::int64_t window_first = 0;  // stage sample index of the first maximum
  std::int64_t window_last = 0;   // stage sample index of the second maximum
  std::vector<TargetCorrelation> targets;
};

// Camera-to-stage offset from the cross-correlation between the stage angle
// over one period and each still target's apparent motion. Targets move
// opposite to the stage, so the normalized signal is the negated
// displacement from home.
OffsetEstimate estimate_offset(const StageLog& log,
                               const std::vector<TargetTrack>& tracks,
                               const OffsetOptions& options = {});

}  // namespace comove
