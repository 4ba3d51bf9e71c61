//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/comove.h"

#include <filesystem>
#include <map>
#include <new>
#include <string>

#include "comove/calibrate.hpp"
#include "comove/error.hpp"
#include "comove/io.hpp"
#include "comove/parallel.hpp"
#include "comove/reconstruct.hpp"
#include "comove/simulate.hpp"
#include "comove/timing.hpp"

using namespace comove;

static_assert(static_cast<int>(ErrorCode::kMismatchedTargets) == COMOVE_E_MISMATCHED_TARGETS);
static_assert(static_cast<int>(ErrorCode::kIo) == COMOVE_E_IO);

struct comove_manifest {
  io::RunManifest manifest;
  std::string blob;
};
struct comove_scene {
  io::SceneFile file;
};
struct comove_injection {
  ErrorInjection injection;
};
struct comove_dataset {
  SimulationResult sim;
  io::RigFile believed;
};
struct comove_rig {
  io::RigFile file;
};
struct comove_detections {
  DetectionSet set;
};
struct comove_stage_logs {
  std::map<std::string, StageLog> logs;
};
struct comove_truth {
  GroundTruth truth;
};
struct comove_reconstruction {
  std::vector<Trajectory3D> trajectories;
};
struct comove_report {
  DistanceReport report;
  bool has_frames = false;
};
struct comove_offset {
  OffsetEstimate estimate;
  double stage_rate_hz = 0.0;
};
struct comove_focal {
  FocalCalibrationResult result;
};
struct comove_diagnosis {
  DiagnosisResult result;
};
struct comove_checkerboard {
  CheckerboardScene scene;
};
struct comove_angle_check {
  AngleCheck check;
};
struct comove_home {
  HomeRepeatability result;
};

namespace {

thread_local std::string g_last_error;

comove_status fail(comove_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, translating exceptions into a status and the per-thread message.
template <typename F>
comove_status guarded(F&& fn) {
  try {
    fn();
    return COMOVE_OK;
  } catch (const Error& e) {
    return fail(static_cast<comove_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(COMOVE_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(COMOVE_E_INTERNAL, std::string("internal error: ") + e.what());
  } catch (...) {
    return fail(COMOVE_E_INTERNAL, "internal error");
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) {
    Fail(ErrorCode::kInvalidInput, std::string(what) + " is NULL");
  }
}

// Allocates the handle only after `make` succeeded.
template <typename H, typename F>
comove_status create(H** out, F&& make) {
  if (out == nullptr) return fail(COMOVE_E_INVALID_INPUT, "output handle pointer is NULL");
  return guarded([&] { *out = new H(make()); });
}

std::string path_str(const char* p, const char* what) {
  require(p, what);
  return p;
}

// Prefixes I/O-adjacent failures with the file they came from.
template <typename F>
auto with_file(const std::string& path, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.WithContext(path);
  }
}

// NULL selects an empty manifest.
const io::RunManifest& manifest_of(const comove_manifest* m) {
  static const io::RunManifest kEmpty;
  return m ? m->manifest : kEmpty;
}

Side side_of(comove_camera c) {
  if (c == COMOVE_LEFT) return Side::kLeft;
  if (c == COMOVE_RIGHT) return Side::kRight;
  Fail(ErrorCode::kInvalidInput, "camera must be left or right");
}

const StageLog& stage(const comove_stage_logs* logs, const std::string& id) {
  require(logs, "stage logs");
  const auto it = logs->logs.find(id);
  if (it == logs->logs.end()) {
    Fail(ErrorCode::kInvalidInput, "stage log has no '" + id + "' stage");
  }
  return it->second;
}

}  // namespace

extern "C" {

const char* comove_version(void) { return io::kVersion; }

const char* comove_last_error(void) { return g_last_error.c_str(); }

const char* comove_status_name(comove_status status) {
  if (status == COMOVE_OK) return "Ok";
  if (status == COMOVE_E_INTERNAL) return "Internal";
  if (status < COMOVE_E_INVALID_INPUT || status > COMOVE_E_MISMATCHED_TARGETS) return "Unknown";
  return ErrorCodeName(static_cast<ErrorCode>(status)).data();
}

int comove_exit_code(comove_status status) {
  if (status == COMOVE_OK) return 0;
  if (status == COMOVE_E_INTERNAL || status < COMOVE_E_INVALID_INPUT ||
      status > COMOVE_E_MISMATCHED_TARGETS) {
    return 3;
  }
  switch (CategoryOf(static_cast<ErrorCode>(status))) {
    case ErrorCategory::kConfig:
      return 2;
    case ErrorCategory::kNumeric:
      return 3;
    case ErrorCategory::kIo:
      return 4;
  }
  return 3;
}

comove_status comove_set_threads(int threads) {
  if (threads < 1) return fail(COMOVE_E_INVALID_INPUT, "thread count must be at least 1");
  set_thread_count(threads);
  return COMOVE_OK;
}

// ---- manifest ----------------------------------------------------------

comove_status comove_manifest_new(const char* command, uint64_t seed, comove_manifest** out) {
  return create(out, [&] {
    comove_manifest m;
    m.manifest.command = path_str(command, "command");
    m.manifest.seed = seed;
    m.manifest.created = io::utc_timestamp();
    m.manifest.config_digest = io::fnv1a64_hex("");
    return m;
  });
}

comove_status comove_manifest_add_input(comove_manifest* m, const char* path) {
  return guarded([&] {
    require(m, "manifest");
    const std::string p = path_str(path, "path");
    m->blob += io::read_text(p);
    m->blob.push_back('\0');
    m->manifest.inputs.push_back(p);
    m->manifest.config_digest = io::fnv1a64_hex(m->blob);
  });
}

comove_status comove_manifest_add_output(comove_manifest* m, const char* path) {
  return guarded([&] {
    require(m, "manifest");
    m->manifest.outputs.push_back(path_str(path, "path"));
  });
}

const char* comove_manifest_digest(const comove_manifest* m) {
  return m ? m->manifest.config_digest.c_str() : "";
}

void comove_manifest_free(comove_manifest* m) { delete m; }

// ---- simulation --------------------------------------------------------

comove_status comove_scene_load(const char* path, comove_scene** out) {
  return create(out, [&] {
    const std::string p = path_str(path, "path");
    return comove_scene{with_file(p, [&] { return io::scene_from_json(io::read_text(p)); })};
  });
}

comove_status comove_scene_set_seed(comove_scene* scene, uint64_t seed) {
  return guarded([&] {
    require(scene, "scene");
    scene->file.scene.seed = seed;
  });
}

uint64_t comove_scene_seed(const comove_scene* scene) {
  return scene ? scene->file.scene.seed : 0;
}

void comove_scene_free(comove_scene* scene) { delete scene; }

comove_status comove_injection_load(const char* path, comove_injection** out) {
  return create(out, [&] {
    const std::string p = path_str(path, "path");
    return comove_injection{with_file(p, [&] { return io::injection_from_json(io::read_text(p)); })};
  });
}

void comove_injection_free(comove_injection* injection) { delete injection; }

comove_status comove_simulate(const comove_scene* scene, const comove_injection* injection,
                              comove_dataset** out) {
  return create(out, [&] {
    require(scene, "scene");
    const ErrorInjection& inj = injection ? injection->injection : scene->file.injection;
    comove_dataset d;
    d.sim = synth_detections(scene->file.scene, inj);
    const auto [rig, timing] = apply_injection(scene->file.scene.rig, scene->file.scene.timing, inj);
    d.believed = {rig, timing};
    return d;
  });
}

comove_status comove_dataset_write(const comove_dataset* dataset, const char* dir,
                                   const comove_manifest* manifest) {
  return guarded([&] {
    require(dataset, "dataset");
    const std::filesystem::path base(path_str(dir, "directory"));
    const io::RunManifest& m = manifest_of(manifest);
    const RigConfig& rig = dataset->believed.rig;
    io::write_text_atomic((base / "detections.csv").string(),
                          io::detections_to_csv(dataset->sim.detections, rig, m));
    io::write_text_atomic((base / "stage_log.csv").string(),
                          io::stage_logs_to_csv({dataset->sim.left_log, dataset->sim.right_log}, m));
    io::write_text_atomic((base / "truth.json").string(), io::truth_to_json(dataset->sim.truth, m));
    io::write_text_atomic((base / "rig.json").string(), io::rig_to_json(dataset->believed));
  });
}

size_t comove_dataset_frame_count(const comove_dataset* dataset) {
  return dataset ? dataset->sim.detections.size() : 0;
}

void comove_dataset_free(comove_dataset* dataset) { delete dataset; }

// ---- inputs ------------------------------------------------------------

comove_status comove_rig_load(const char* path, comove_rig** out) {
  return create(out, [&] {
    const std::string p = path_str(path, "path");
    return comove_rig{with_file(p, [&] { return io::rig_from_json(io::read_text(p)); })};
  });
}

double comove_rig_baseline(const comove_rig* rig) { return rig ? rig->file.rig.baseline_m : 0.0; }

void comove_rig_free(comove_rig* rig) { delete rig; }

comove_status comove_detections_load(const char* path, const comove_rig* rig,
                                     comove_detections** out) {
  return create(out, [&] {
    require(rig, "rig");
    const std::string p = path_str(path, "path");
    return comove_detections{
        with_file(p, [&] { return io::detections_from_csv(io::read_text(p), rig->file.rig); })};
  });
}

size_t comove_detections_frame_count(const comove_detections* det) {
  return det ? det->set.size() : 0;
}

void comove_detections_free(comove_detections* det) { delete det; }

comove_status comove_stage_logs_load(const char* path, const comove_rig* rig,
                                     comove_stage_logs** out) {
  return create(out, [&] {
    require(rig, "rig");
    const std::string p = path_str(path, "path");
    return comove_stage_logs{with_file(p, [&] {
      return io::stage_logs_from_csv(io::read_text(p), 1.0 / rig->file.timing.dt_stage);
    })};
  });
}

void comove_stage_logs_free(comove_stage_logs* logs) { delete logs; }

comove_status comove_truth_load(const char* path, comove_truth** out) {
  return create(out, [&] {
    const std::string p = path_str(path, "path");
    return comove_truth{with_file(p, [&] { return io::truth_from_json(io::read_text(p)); })};
  });
}

void comove_truth_free(comove_truth* truth) { delete truth; }

// ---- reconstruction ----------------------------------------------------

comove_status comove_reconstruct(const comove_detections* det, const comove_stage_logs* logs,
                                 const comove_rig* rig, comove_reconstruction** out) {
  return create(out, [&] {
    require(det, "detections");
    require(rig, "rig");
    return comove_reconstruction{reconstruct_sequence(det->set, rig->file.rig, stage(logs, "left"),
                                                      stage(logs, "right"), rig->file.timing)};
  });
}

comove_status comove_reconstruction_write(const comove_reconstruction* rec, const char* path,
                                          const comove_manifest* manifest) {
  return guarded([&] {
    require(rec, "reconstruction");
    io::write_text_atomic(path_str(path, "path"),
                          io::trajectories_to_csv(rec->trajectories, manifest_of(manifest)));
  });
}

void comove_reconstruction_free(comove_reconstruction* rec) { delete rec; }

comove_status comove_report_compute(const comove_reconstruction* rec, const comove_truth* truth,
                                    comove_report** out) {
  return create(out, [&] {
    require(rec, "reconstruction");
    require(truth, "truth");
    return comove_report{pairwise_report(rec->trajectories, truth->truth.distances_m), true};
  });
}

comove_status comove_report_load(const char* path, comove_report** out) {
  return create(out, [&] {
    const std::string p = path_str(path, "path");
    return comove_report{with_file(p, [&] { return io::report_from_csv(io::read_text(p)); }),
                         false};
  });
}

comove_status comove_report_write(const comove_report* report, const char* path,
                                  const comove_manifest* manifest) {
  return guarded([&] {
    require(report, "report");
    io::write_text_atomic(path_str(path, "path"),
                          io::report_to_csv(report->report, manifest_of(manifest)));
  });
}

comove_status comove_report_write_frames(const comove_report* report, const char* path,
                                         const comove_manifest* manifest) {
  return guarded([&] {
    require(report, "report");
    if (!report->has_frames) {
      Fail(ErrorCode::kInvalidInput, "report was loaded from a summary and has no frames");
    }
    io::write_text_atomic(path_str(path, "path"),
                          io::report_frames_to_csv(report->report, manifest_of(manifest)));
  });
}

size_t comove_report_pair_count(const comove_report* report) {
  return report ? report->report.pairs.size() : 0;
}

double comove_report_max_abs_mean_rel_err(const comove_report* report) {
  return report ? report->report.max_abs_mean_rel_err() : 0.0;
}

void comove_report_free(comove_report* report) { delete report; }

// ---- time offset -------------------------------------------------------

comove_status comove_offset_estimate(const comove_detections* det, const comove_stage_logs* logs,
                                     const comove_rig* rig, comove_camera camera,
                                     comove_offset** out) {
  return create(out, [&] {
    require(det, "detections");
    require(rig, "rig");
    const Side side = side_of(camera);
    const StageLog& log = stage(logs, SideName(side));
    const auto tracks = io::tracks_from_detections(det->set, side, 1.0 / rig->file.timing.dt_camera);
    return comove_offset{estimate_offset(log, tracks), log.rate_hz};
  });
}

double comove_offset_seconds(const comove_offset* offset) {
  return offset ? offset->estimate.offset_s : 0.0;
}

comove_status comove_offset_write(const comove_offset* offset, const char* json_path,
                                  const char* csv_path, const comove_manifest* manifest) {
  return guarded([&] {
    require(offset, "offset");
    const io::RunManifest& m = manifest_of(manifest);
    io::write_text_atomic(path_str(json_path, "json path"), io::offset_to_json(offset->estimate, m));
    if (csv_path) {
      io::write_text_atomic(csv_path,
                            io::correlation_to_csv(offset->estimate, offset->stage_rate_hz, m));
    }
  });
}

void comove_offset_free(comove_offset* offset) { delete offset; }

// ---- focal calibration -------------------------------------------------

comove_status comove_focal_calibrate(const comove_detections* det, const comove_stage_logs* logs,
                                     const comove_rig* rig, comove_focal_mode mode,
                                     const comove_sweep_grid* grid, comove_focal** out) {
  return create(out, [&] {
    require(det, "detections");
    require(rig, "rig");
    const StageLog& left = stage(logs, "left");
    const StageLog& right = stage(logs, "right");
    if (mode == COMOVE_FOCAL_FIT) {
      return comove_focal{focal_fit(det->set, rig->file.rig, left, right, rig->file.timing)};
    }
    if (mode != COMOVE_FOCAL_SWEEP) {
      Fail(ErrorCode::kInvalidInput, "unknown focal calibration mode");
    }
    SweepOptions options;
    if (grid) {
      options.min_px = grid->min_px;
      options.max_px = grid->max_px;
      options.step_px = grid->step_px;
    }
    return comove_focal{focal_sweep(det->set, rig->file.rig, left, right, rig->file.timing, options)};
  });
}

comove_status comove_focal_summarize(const comove_focal* focal, comove_focal_summary* out) {
  return guarded([&] {
    require(focal, "focal result");
    require(out, "summary");
    const FocalCalibrationResult& r = focal->result;
    *out = comove_focal_summary{};
    out->camera = r.side == Side::kLeft ? COMOVE_LEFT : COMOVE_RIGHT;
    out->believed_focal_px = r.believed_focal_px;
    out->stage_speed_rad_s = r.v_rad_s;
    out->has_fit = r.has_fit ? 1 : 0;
    out->fit_delta_focal_px = r.fit.delta_focal_px;
    out->fit_r2 = r.fit.r2;
    out->has_sweep = r.has_sweep ? 1 : 0;
    out->sweep_best_focal_px = r.best_focal_px;
  });
}

comove_status comove_focal_write(const comove_focal* focal, const char* json_path,
                                 const char* csv_path, const comove_manifest* manifest) {
  return guarded([&] {
    require(focal, "focal result");
    const io::RunManifest& m = manifest_of(manifest);
    io::write_text_atomic(path_str(json_path, "json path"), io::focal_to_json(focal->result, m));
    if (csv_path) {
      io::write_text_atomic(csv_path, focal->result.has_sweep
                                          ? io::sweep_to_csv(focal->result, m)
                                          : io::focal_fit_to_csv(focal->result, m));
    }
  });
}

void comove_focal_free(comove_focal* focal) { delete focal; }

// ---- diagnosis ---------------------------------------------------------

comove_status comove_diagnose(const comove_report* report, double baseline_m,
                              comove_diagnosis** out) {
  return create(out, [&] {
    require(report, "report");
    return comove_diagnosis{diagnose(report->report, baseline_m)};
  });
}

comove_status comove_diagnosis_summarize(const comove_diagnosis* diag,
                                         comove_diagnosis_summary* out) {
  return guarded([&] {
    require(diag, "diagnosis");
    require(out, "summary");
    const DiagnosisResult& r = diag->result;
    out->classification = static_cast<comove_signature>(r.classification);
    out->constant_term = r.constant_term;
    out->slope_per_m = r.slope_per_m;
    out->implied_delta_yaw_rad = r.implied_delta_yaw_rad;
    out->variance_ratio = r.variance_ratio;
    out->zbar_span_m = r.zbar_span_m;
  });
}

const char* comove_signature_name(comove_signature signature) {
  switch (signature) {
    case COMOVE_BASELINE_DOMINATED:
      return SignatureName(ErrorSignature::kBaselineDominated);
    case COMOVE_ORIENTATION_DOMINATED:
      return SignatureName(ErrorSignature::kOrientationDominated);
    case COMOVE_INCONCLUSIVE:
      return SignatureName(ErrorSignature::kInconclusive);
  }
  return "unknown";
}

comove_status comove_diagnosis_write(const comove_diagnosis* diag, const char* json_path,
                                     const char* csv_path, const comove_manifest* manifest) {
  return guarded([&] {
    require(diag, "diagnosis");
    const io::RunManifest& m = manifest_of(manifest);
    io::write_text_atomic(path_str(json_path, "json path"), io::diagnosis_to_json(diag->result, m));
    if (csv_path) io::write_text_atomic(csv_path, io::diagnosis_to_csv(diag->result, m));
  });
}

void comove_diagnosis_free(comove_diagnosis* diag) { delete diag; }

// ---- error model -------------------------------------------------------

comove_status comove_predict(const char* config_path, const char* csv_path,
                             const comove_manifest* manifest) {
  return guarded([&] {
    const std::string p = path_str(config_path, "config path");
    const io::PredictConfig cfg =
        with_file(p, [&] { return io::predict_config_from_json(io::read_text(p)); });
    io::write_text_atomic(path_str(csv_path, "csv path"),
                          io::predict_to_csv(cfg, manifest_of(manifest)));
  });
}

// ---- angle interpolation check -----------------------------------------

comove_status comove_checkerboard_load(const char* path, comove_checkerboard** out) {
  return create(out, [&] {
    const std::string p = path_str(path, "path");
    return comove_checkerboard{
        with_file(p, [&] { return io::checkerboard_from_json(io::read_text(p)); })};
  });
}

comove_status comove_checkerboard_preset(const char* name, comove_checkerboard** out) {
  return create(out, [&] { return comove_checkerboard{presets::checkerboard(path_str(name, "preset"))}; });
}

comove_status comove_checkerboard_set_seed(comove_checkerboard* cb, uint64_t seed) {
  return guarded([&] {
    require(cb, "checkerboard");
    cb->scene.seed = seed;
  });
}

void comove_checkerboard_free(comove_checkerboard* cb) { delete cb; }

comove_status comove_kabsch_verify(const comove_checkerboard* cb, comove_angle_check** out) {
  return create(out, [&] {
    require(cb, "checkerboard");
    return comove_angle_check{
        verify_angle_interpolation(synth_checkerboard(cb->scene), cb->scene.timing)};
  });
}

double comove_angle_check_max_error(const comove_angle_check* check) {
  return check ? check->check.max_abs_error_rad : 0.0;
}

comove_status comove_angle_check_write(const comove_angle_check* check, const char* json_path,
                                       const char* csv_path, const comove_manifest* manifest) {
  return guarded([&] {
    require(check, "angle check");
    const io::RunManifest& m = manifest_of(manifest);
    io::write_text_atomic(path_str(json_path, "json path"), io::angle_check_to_json(check->check, m));
    if (csv_path) io::write_text_atomic(csv_path, io::angle_check_to_csv(check->check, m));
  });
}

void comove_angle_check_free(comove_angle_check* check) { delete check; }

// ---- home repeatability ------------------------------------------------

comove_status comove_home_test(const comove_scene* scene, comove_camera camera, int snapshots,
                               double home_jitter_sigma_rad, comove_home** out) {
  return create(out, [&] {
    require(scene, "scene");
    const Side side = side_of(camera);
    const auto snaps = synth_home_snapshots(scene->file.scene, side, snapshots, home_jitter_sigma_rad);
    return comove_home{
        home_repeatability(snaps, scene->file.scene.rig.camera(side).intrinsics.focal_px)};
  });
}

double comove_home_median(const comove_home* home) { return home ? home->result.median_rad : 0.0; }

double comove_home_max_abs(const comove_home* home) {
  return home ? home->result.max_abs_rad : 0.0;
}

comove_status comove_home_write(const comove_home* home, const char* json_path,
                                const char* csv_path, const comove_manifest* manifest) {
  return guarded([&] {
    require(home, "home result");
    const io::RunManifest& m = manifest_of(manifest);
    io::write_text_atomic(path_str(json_path, "json path"), io::home_to_json(home->result, m));
    if (csv_path) io::write_text_atomic(csv_path, io::home_to_csv(home->result, m));
  });
}

void comove_home_free(comove_home* home) { delete home; }

}  // extern "C"
