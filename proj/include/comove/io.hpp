//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "comove/calibrate.hpp"
#include "comove/detections.hpp"
#include "comove/geometry.hpp"
#include "comove/reconstruct.hpp"
#include "comove/simulate.hpp"
#include "comove/timing.hpp"

// File formats. Configuration is JSON with explicit units in the key names
// (`_deg` / `_rad`, `_px`, `_m`, `_s`); unknown keys are rejected. Tabular
// outputs are CSV whose first lines are `#` comments carrying the manifest.
namespace comove::io {

inline constexpr const char* kVersion = "0.1.0";

// Shortest-exact (17 significant digit) formatting, independent of locale.
std::string format_double(double v);

// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view data);

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string config_digest;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::string created;  // UTC timestamp; the only field that varies between reruns

  // `# key=value` lines, each terminated by a newline.
  std::string comment_block() const;
};

std::string utc_timestamp();

// Whole-file read; kIo on failure.
std::string read_text(const std::string& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::string& path, const std::string& content);

// ---- configuration ----------------------------------------------------

struct RigFile {
  RigConfig rig;
  TimingConfig timing;
};

// {"baseline_m", "left": camera, "right": camera, "timing": {...}}
RigFile rig_from_json(const std::string& text);
std::string rig_to_json(const RigFile& rig);

struct SceneFile {
  Scene scene;
  ErrorInjection injection;  // optional "injection" block
};

SceneFile scene_from_json(const std::string& text);
ErrorInjection injection_from_json(const std::string& text);

struct PredictConfig {
  ErrorModelInput model;
  double zbar_min_m = 10.0;
  double zbar_max_m = 60.0;
  int points = 51;
};

PredictConfig predict_config_from_json(const std::string& text);

CheckerboardScene checkerboard_from_json(const std::string& text);

// ---- data files -------------------------------------------------------

// `stage_id,sample_index,angle_rad`, several stages per file allowed.
std::string stage_logs_to_csv(const std::vector<StageLog>& logs, const RunManifest& manifest);
// Stage logs keyed by stage id. Sample indices must be consecutive.
std::map<std::string, StageLog> stage_logs_from_csv(const std::string& text, double rate_hz);

// `camera,frame,target_id,u_px,v_px` with top-left-origin pixels; the sensor
// sizes of `rig` convert to and from the center-origin convention.
std::string detections_to_csv(const DetectionSet& detections, const RigConfig& rig,
                              const RunManifest& manifest);
DetectionSet detections_from_csv(const std::string& text, const RigConfig& rig);

// Horizontal tracks of every target seen by `side`, on the camera clock.
std::vector<TargetTrack> tracks_from_detections(const DetectionSet& detections, Side side,
                                                double camera_rate_hz);

std::string truth_to_json(const GroundTruth& truth, const RunManifest& manifest);
GroundTruth truth_from_json(const std::string& text);

// `target_id,frame,t_s,x_m,y_m,z_m`
std::string trajectories_to_csv(const std::vector<Trajectory3D>& trajectories,
                                const RunManifest& manifest);

// `target_a,target_b,zbar_m,mean_rel_err,std_rel_err,n_frames`
std::string report_to_csv(const DistanceReport& report, const RunManifest& manifest);
// Summary rows only; per-frame vectors are left empty.
DistanceReport report_from_csv(const std::string& text);
// `target_a,target_b,frame,t_s,reconstructed_m,rel_err`
std::string report_frames_to_csv(const DistanceReport& report, const RunManifest& manifest);

std::string offset_to_json(const OffsetEstimate& estimate, const RunManifest& manifest);
// `target_id,lag_samples,correlation`
std::string correlation_to_csv(const OffsetEstimate& estimate, double stage_rate_hz,
                               const RunManifest& manifest);

std::string focal_to_json(const FocalCalibrationResult& result, const RunManifest& manifest);
// `focal_px,mean_abs_slope,slope_<id>...`
std::string sweep_to_csv(const FocalCalibrationResult& result, const RunManifest& manifest);
// `target_id,mean_z2_m2,slope_m_s,fitted_m_s`
std::string focal_fit_to_csv(const FocalCalibrationResult& result, const RunManifest& manifest);

std::string diagnosis_to_json(const DiagnosisResult& result, const RunManifest& manifest);
// `zbar_m,mean_rel_err,constant_fit,linear_fit`
std::string diagnosis_to_csv(const DiagnosisResult& result, const RunManifest& manifest);

// `zbar_m,rel_err,z_drift_m_s`
std::string predict_to_csv(const PredictConfig& config, const RunManifest& manifest);

// `frame,stage_rad,kabsch_rad,error_rad`
std::string angle_check_to_csv(const AngleCheck& check, const RunManifest& manifest);
std::string angle_check_to_json(const AngleCheck& check, const RunManifest& manifest);

// `index,fluctuation_rad`
std::string home_to_csv(const HomeRepeatability& result, const RunManifest& manifest);
std::string home_to_json(const HomeRepeatability& result, const RunManifest& manifest);

}  // namespace comove::io
