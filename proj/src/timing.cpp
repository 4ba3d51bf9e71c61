//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/timing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "comove/error.hpp"

namespace comove {

void TimingConfig::Validate() const {
  if (!(dt_camera > 0.0) || !(dt_stage > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "time steps must be positive");
  }
  if (!std::isfinite(offset) || std::abs(offset) >= 1.0) {
    Fail(ErrorCode::kInvalidInput, "camera-stage offset must be below 1 s");
  }
}

double camera_time(std::int64_t frame, const TimingConfig& timing) {
  return timing.offset + static_cast<double>(frame) * timing.dt_camera;
}

void StageLog::Validate() const {
  if (angles.empty()) {
    Fail(ErrorCode::kInvalidInput, "stage log '" + stage_id + "' is empty");
  }
  if (!(rate_hz > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "stage log rate must be positive");
  }
  for (const double a : angles) {
    if (!std::isfinite(a)) {
      Fail(ErrorCode::kInvalidInput,
           "stage log '" + stage_id + "' has a non-finite angle");
    }
  }
}

double stage_angle_at(const StageLog& log, double t) {
  if (log.angles.empty()) {
    Fail(ErrorCode::kOutOfRange, "empty stage log");
  }
  // Position in samples relative to the first one.
  const double pos = t * log.rate_hz - static_cast<double>(log.first_index);
  const double last = static_cast<double>(log.angles.size() - 1);
  // Allow rounding noise at the ends (t computed as i * dt may land 1 ulp
  // outside a sample that is nominally on the boundary).
  constexpr double kSlack = 1e-9;
  if (!(pos >= -kSlack && pos <= last + kSlack)) {
    std::ostringstream msg;
    msg << "time " << t << " s outside stage log '" << log.stage_id << "' ["
        << log.start_time() << ", " << log.end_time() << "] s";
    Fail(ErrorCode::kOutOfRange, msg.str());
  }
  const double clamped = std::clamp(pos, 0.0, last);
  auto j = static_cast<std::size_t>(std::floor(clamped));
  if (j + 1 >= log.angles.size()) {
    if (log.angles.size() == 1) {
      return log.angles[0];
    }
    j = log.angles.size() - 2;
  }
  const double w = clamped - static_cast<double>(j);
  return (1.0 - w) * log.angles[j] + w * log.angles[j + 1];
}

TargetTrack resample_track(const TargetTrack& track, double rate_hz) {
  if (track.samples.size() < 2 || track.samples.size() != track.u_px.size()) {
    Fail(ErrorCode::kEmptyTrack, "target " + std::to_string(track.target_id) +
                                     " needs at least two samples");
  }
  if (!(rate_hz > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "resampling rate must be positive");
  }
  const double t0 = track.time_of(0);
  const double t1 = track.time_of(track.samples.size() - 1);
  const auto k0 = static_cast<std::int64_t>(std::ceil(t0 * rate_hz - 1e-9));
  const auto k1 = static_cast<std::int64_t>(std::floor(t1 * rate_hz + 1e-9));

  TargetTrack out;
  out.target_id = track.target_id;
  out.rate_hz = rate_hz;
  out.samples.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, k1 - k0 + 1)));
  out.u_px.reserve(out.samples.capacity());

  std::size_t seg = 0;
  const std::size_t n = track.samples.size();
  for (std::int64_t k = k0; k <= k1; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    while (seg + 2 < n && track.time_of(seg + 1) <= t) {
      ++seg;
    }
    const double ta = track.time_of(seg);
    const double tb = track.time_of(seg + 1);
    const double w = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
    out.samples.push_back(k);
    out.u_px.push_back(w == 0.0 ? track.u_px[seg]
                                : (1.0 - w) * track.u_px[seg] +
                                      w * track.u_px[seg + 1]);
  }
  return out;
}

namespace {

struct Window {
  std::size_t first;
  std::size_t second;
};

// First two maxima of the stage signal: the argmax of each complete
// excursion above half the peak value.
Window find_period(const StageLog& log) {
  const auto& a = log.angles;
  const double peak = *std::max_element(a.begin(), a.end());
  if (!(peak > 0.0)) {
    Fail(ErrorCode::kNoPeriodFound, "stage signal never leaves home");
  }
  const double threshold = 0.5 * peak;
  std::vector<std::size_t> maxima;
  std::size_t k = 0;
  while (k < a.size() && maxima.size() < 2) {
    if (a[k] <= threshold) {
      ++k;
      continue;
    }
    const std::size_t begin = k;
    std::size_t best = k;
    while (k < a.size() && a[k] > threshold) {
      if (a[k] > a[best]) {
        best = k;
      }
      ++k;
    }
    const bool complete = begin > 0 && k < a.size();
    if (complete) {
      maxima.push_back(best);
    }
  }
  if (maxima.size() < 2) {
    Fail(ErrorCode::kNoPeriodFound,
         "stage signal does not contain two complete maxima");
  }
  return {maxima[0], maxima[1]};
}

std::int64_t lower_median(std::vector<std::int64_t> values) {
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

}  // namespace

OffsetEstimate estimate_offset(const StageLog& log,
                               const std::vector<TargetTrack>& tracks,
                               const OffsetOptions& options) {
  log.Validate();
  if (tracks.empty()) {
    Fail(ErrorCode::kEmptyTrack, "no target tracks given");
  }
  const Window window = find_period(log);
  const auto max_lag = static_cast<std::int64_t>((window.second - window.first) / 2);

  // Leading still segment of the stage log.
  std::size_t still = 0;
  while (still + 1 < log.angles.size() && log.angles[still + 1] == log.angles[0]) {
    ++still;
  }
  // Camera frames whose time may still fall in the still segment for any
  // lag in the search range.
  const double home_end = log.time_of(still) - static_cast<double>(max_lag) / log.rate_hz;

  OffsetEstimate result;
  result.resolution_s = 1.0 / log.rate_hz;
  result.window_first = log.first_index + static_cast<std::int64_t>(window.first);
  result.window_last = log.first_index + static_cast<std::int64_t>(window.second);

  std::vector<TargetTrack> sorted = tracks;
  std::sort(sorted.begin(), sorted.end(),
            [](const TargetTrack& x, const TargetTrack& y) {
              return x.target_id < y.target_id;
            });

  std::vector<std::int64_t> lags;
  for (const TargetTrack& track : sorted) {
    if (track.samples.size() < 2) {
      Fail(ErrorCode::kEmptyTrack,
           "target " + std::to_string(track.target_id) + " has no samples");
    }
    double home_sum = 0.0;
    int home_count = 0;
    for (std::size_t k = 0; k < track.samples.size() && track.time_of(k) < home_end; ++k) {
      home_sum += track.u_px[k];
      ++home_count;
    }
    if (home_count < options.min_home_frames) {
      std::ostringstream msg;
      msg << "target " << track.target_id << ": only " << home_count
          << " home frames before the stage starts moving (need "
          << options.min_home_frames << ")";
      Fail(ErrorCode::kInvalidInput, msg.str());
    }
    const double home = home_sum / home_count;

    TargetTrack normalized = track;
    for (double& u : normalized.u_px) {
      u = -(u - home);
    }
    const TargetTrack resampled = resample_track(normalized, log.rate_hz);
    const std::int64_t grid0 = resampled.samples.front();
    const auto grid_size = static_cast<std::int64_t>(resampled.samples.size());

    TargetCorrelation corr;
    corr.target_id = track.target_id;
    corr.home_u_px = home;
    corr.correlation.assign(static_cast<std::size_t>(max_lag + 1),
                            std::numeric_limits<double>::quiet_NaN());
    double best = -std::numeric_limits<double>::infinity();
    for (std::int64_t lag = 0; lag <= max_lag; ++lag) {
      double sum = 0.0;
      std::int64_t terms = 0;
      for (std::size_t k = window.first; k <= window.second; ++k) {
        const std::int64_t g =
            log.first_index + static_cast<std::int64_t>(k) - lag - grid0;
        if (g < 0 || g >= grid_size) {
          continue;
        }
        sum += log.angles[k] * resampled.u_px[static_cast<std::size_t>(g)];
        ++terms;
      }
      if (terms == 0) {
        continue;
      }
      const double c = sum / static_cast<double>(terms);
      corr.correlation[static_cast<std::size_t>(lag)] = c;
      if (c > best) {
        best = c;
        corr.best_lag_samples = lag;
      }
    }
    if (!std::isfinite(best)) {
      Fail(ErrorCode::kEmptyTrack, "target " + std::to_string(track.target_id) +
                                       " does not overlap the stage period");
    }
    lags.push_back(corr.best_lag_samples);
    result.targets.push_back(std::move(corr));
  }

  const auto [lo, hi] = std::minmax_element(lags.begin(), lags.end());
  if (*hi - *lo > options.max_disagreement_samples) {
    std::ostringstream msg;
    msg << "per-target correlation maxima disagree by " << (*hi - *lo)
        << " stage samples";
    Fail(ErrorCode::kInconsistentTargets, msg.str());
  }
  result.offset_s = static_cast<double>(lower_median(lags)) / log.rate_hz;
  return result;
}

}  // namespace comove
