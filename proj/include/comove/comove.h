/*
 * comove - co-moving stereo toolkit
 * SPDX-License-Identifier: Apache-2.0
 */

/*
 * C interface. Objects are opaque handles created by *_load / compute calls
 * and released with the matching *_free (which accepts NULL). Every call
 * that can fail returns a comove_status; on failure the handle out-parameter
 * is left untouched and comove_last_error() describes the problem. The
 * message is per thread and stays valid until the next failing call on
 * that thread. Writers accept a NULL manifest and then record an empty one.
 */

#ifndef COMOVE_COMOVE_H
#define COMOVE_COMOVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(COMOVE_BUILDING)
#define COMOVE_API __attribute__((visibility("default")))
#else
#define COMOVE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum comove_status {
  COMOVE_OK = 0,
  COMOVE_E_INVALID_INPUT = 1,
  COMOVE_E_CONFIG = 2,
  COMOVE_E_IO = 3,
  COMOVE_E_DEGENERATE_PROJECTION = 4,
  COMOVE_E_NO_CONVERGENCE = 5,
  COMOVE_E_OUT_OF_RANGE = 6,
  COMOVE_E_EMPTY_TRACK = 7,
  COMOVE_E_INCONSISTENT_TARGETS = 8,
  COMOVE_E_NO_PERIOD_FOUND = 9,
  COMOVE_E_INFEASIBLE_PROFILE = 10,
  COMOVE_E_TARGET_OUT_OF_VIEW = 11,
  COMOVE_E_DEGENERATE_GEOMETRY = 12,
  COMOVE_E_BEHIND_CAMERA = 13,
  COMOVE_E_DIVERGENT_DEPTH = 14,
  COMOVE_E_MISSING_TRUTH = 15,
  COMOVE_E_TOO_FEW_FRAMES = 16,
  COMOVE_E_BAD_FIT = 17,
  COMOVE_E_NO_INTERIOR_MINIMUM = 18,
  COMOVE_E_INCONSISTENT_MINIMA = 19,
  COMOVE_E_DEGENERATE_CONFIGURATION = 20,
  COMOVE_E_MISMATCHED_TARGETS = 21,
  COMOVE_E_INTERNAL = 99
} comove_status;

typedef enum comove_camera { COMOVE_LEFT = 0, COMOVE_RIGHT = 1 } comove_camera;

typedef enum comove_focal_mode { COMOVE_FOCAL_FIT = 0, COMOVE_FOCAL_SWEEP = 1 } comove_focal_mode;

typedef enum comove_signature {
  COMOVE_BASELINE_DOMINATED = 0,
  COMOVE_ORIENTATION_DOMINATED = 1,
  COMOVE_INCONCLUSIVE = 2
} comove_signature;

typedef struct comove_manifest comove_manifest;
typedef struct comove_scene comove_scene;
typedef struct comove_injection comove_injection;
typedef struct comove_dataset comove_dataset;
typedef struct comove_rig comove_rig;
typedef struct comove_detections comove_detections;
typedef struct comove_stage_logs comove_stage_logs;
typedef struct comove_truth comove_truth;
typedef struct comove_reconstruction comove_reconstruction;
typedef struct comove_report comove_report;
typedef struct comove_offset comove_offset;
typedef struct comove_focal comove_focal;
typedef struct comove_diagnosis comove_diagnosis;
typedef struct comove_checkerboard comove_checkerboard;
typedef struct comove_angle_check comove_angle_check;
typedef struct comove_home comove_home;

/* ---- library ---------------------------------------------------------- */

COMOVE_API const char* comove_version(void);
COMOVE_API const char* comove_last_error(void);
COMOVE_API const char* comove_status_name(comove_status status);
/* Process exit code for a status: 0 ok, 2 configuration, 3 numerical, 4 I/O. */
COMOVE_API int comove_exit_code(comove_status status);
/* Worker threads used by parallel stages (>= 1). */
COMOVE_API comove_status comove_set_threads(int threads);

/* ---- run manifest ----------------------------------------------------- */

COMOVE_API comove_status comove_manifest_new(const char* command, uint64_t seed,
                                             comove_manifest** out);
/* Records an input path and folds its content into the config digest. */
COMOVE_API comove_status comove_manifest_add_input(comove_manifest* m, const char* path);
COMOVE_API comove_status comove_manifest_add_output(comove_manifest* m, const char* path);
/* The 16-hex-digit digest; valid while the manifest lives. */
COMOVE_API const char* comove_manifest_digest(const comove_manifest* m);
COMOVE_API void comove_manifest_free(comove_manifest* m);

/* ---- simulation ------------------------------------------------------- */

COMOVE_API comove_status comove_scene_load(const char* path, comove_scene** out);
COMOVE_API comove_status comove_scene_set_seed(comove_scene* scene, uint64_t seed);
COMOVE_API uint64_t comove_scene_seed(const comove_scene* scene);
COMOVE_API void comove_scene_free(comove_scene* scene);

COMOVE_API comove_status comove_injection_load(const char* path, comove_injection** out);
COMOVE_API void comove_injection_free(comove_injection* injection);

/* `injection` may be NULL to use the scene's own injection block. */
COMOVE_API comove_status comove_simulate(const comove_scene* scene,
                                         const comove_injection* injection,
                                         comove_dataset** out);
/* Writes detections.csv, stage_log.csv, truth.json and rig.json (the rig
 * and timing the reconstruction believes) into `dir`. */
COMOVE_API comove_status comove_dataset_write(const comove_dataset* dataset, const char* dir,
                                              const comove_manifest* manifest);
COMOVE_API size_t comove_dataset_frame_count(const comove_dataset* dataset);
COMOVE_API void comove_dataset_free(comove_dataset* dataset);

/* ---- inputs ----------------------------------------------------------- */

COMOVE_API comove_status comove_rig_load(const char* path, comove_rig** out);
COMOVE_API double comove_rig_baseline(const comove_rig* rig);
COMOVE_API void comove_rig_free(comove_rig* rig);

COMOVE_API comove_status comove_detections_load(const char* path, const comove_rig* rig,
                                                comove_detections** out);
COMOVE_API size_t comove_detections_frame_count(const comove_detections* det);
COMOVE_API void comove_detections_free(comove_detections* det);

/* Stage ids "left" and "right"; the rig supplies the sampling rate. */
COMOVE_API comove_status comove_stage_logs_load(const char* path, const comove_rig* rig,
                                                comove_stage_logs** out);
COMOVE_API void comove_stage_logs_free(comove_stage_logs* logs);

COMOVE_API comove_status comove_truth_load(const char* path, comove_truth** out);
COMOVE_API void comove_truth_free(comove_truth* truth);

/* ---- reconstruction --------------------------------------------------- */

COMOVE_API comove_status comove_reconstruct(const comove_detections* det,
                                            const comove_stage_logs* logs, const comove_rig* rig,
                                            comove_reconstruction** out);
COMOVE_API comove_status comove_reconstruction_write(const comove_reconstruction* rec,
                                                     const char* path,
                                                     const comove_manifest* manifest);
COMOVE_API void comove_reconstruction_free(comove_reconstruction* rec);

COMOVE_API comove_status comove_report_compute(const comove_reconstruction* rec,
                                               const comove_truth* truth, comove_report** out);
COMOVE_API comove_status comove_report_load(const char* path, comove_report** out);
COMOVE_API comove_status comove_report_write(const comove_report* report, const char* path,
                                             const comove_manifest* manifest);
/* Per-frame long format; needs a computed (not loaded) report. */
COMOVE_API comove_status comove_report_write_frames(const comove_report* report,
                                                    const char* path,
                                                    const comove_manifest* manifest);
COMOVE_API size_t comove_report_pair_count(const comove_report* report);
COMOVE_API double comove_report_max_abs_mean_rel_err(const comove_report* report);
COMOVE_API void comove_report_free(comove_report* report);

/* ---- time offset ------------------------------------------------------ */

COMOVE_API comove_status comove_offset_estimate(const comove_detections* det,
                                                const comove_stage_logs* logs,
                                                const comove_rig* rig, comove_camera camera,
                                                comove_offset** out);
COMOVE_API double comove_offset_seconds(const comove_offset* offset);
COMOVE_API comove_status comove_offset_write(const comove_offset* offset, const char* json_path,
                                             const char* csv_path,
                                             const comove_manifest* manifest);
COMOVE_API void comove_offset_free(comove_offset* offset);

/* ---- focal calibration ------------------------------------------------ */

typedef struct comove_sweep_grid {
  double min_px;
  double max_px;
  double step_px;
} comove_sweep_grid;

typedef struct comove_focal_summary {
  comove_camera camera;
  double believed_focal_px;
  double stage_speed_rad_s;
  int has_fit;
  double fit_delta_focal_px; /* believed - true */
  double fit_r2;
  int has_sweep;
  double sweep_best_focal_px;
} comove_focal_summary;

/* `grid` may be NULL for the default [5900, 6700] px at 1 px. */
COMOVE_API comove_status comove_focal_calibrate(const comove_detections* det,
                                                const comove_stage_logs* logs,
                                                const comove_rig* rig, comove_focal_mode mode,
                                                const comove_sweep_grid* grid,
                                                comove_focal** out);
COMOVE_API comove_status comove_focal_summarize(const comove_focal* focal,
                                                comove_focal_summary* out);
/* `csv_path` receives the sweep curve or the fit points. */
COMOVE_API comove_status comove_focal_write(const comove_focal* focal, const char* json_path,
                                            const char* csv_path,
                                            const comove_manifest* manifest);
COMOVE_API void comove_focal_free(comove_focal* focal);

/* ---- diagnosis -------------------------------------------------------- */

typedef struct comove_diagnosis_summary {
  comove_signature classification;
  double constant_term;
  double slope_per_m;
  double implied_delta_yaw_rad;
  double variance_ratio;
  double zbar_span_m;
} comove_diagnosis_summary;

COMOVE_API comove_status comove_diagnose(const comove_report* report, double baseline_m,
                                         comove_diagnosis** out);
COMOVE_API comove_status comove_diagnosis_summarize(const comove_diagnosis* diag,
                                                    comove_diagnosis_summary* out);
COMOVE_API const char* comove_signature_name(comove_signature signature);
COMOVE_API comove_status comove_diagnosis_write(const comove_diagnosis* diag,
                                                const char* json_path, const char* csv_path,
                                                const comove_manifest* manifest);
COMOVE_API void comove_diagnosis_free(comove_diagnosis* diag);

/* ---- error model ------------------------------------------------------ */

/* Reads an error-model config and writes the predicted curves as CSV. */
COMOVE_API comove_status comove_predict(const char* config_path, const char* csv_path,
                                        const comove_manifest* manifest);

/* ---- angle interpolation check ---------------------------------------- */

COMOVE_API comove_status comove_checkerboard_load(const char* path, comove_checkerboard** out);
/* Motion presets "slow", "moderate" and "fast". */
COMOVE_API comove_status comove_checkerboard_preset(const char* name, comove_checkerboard** out);
COMOVE_API comove_status comove_checkerboard_set_seed(comove_checkerboard* cb, uint64_t seed);
COMOVE_API void comove_checkerboard_free(comove_checkerboard* cb);

COMOVE_API comove_status comove_kabsch_verify(const comove_checkerboard* cb,
                                              comove_angle_check** out);
COMOVE_API double comove_angle_check_max_error(const comove_angle_check* check);
COMOVE_API comove_status comove_angle_check_write(const comove_angle_check* check,
                                                  const char* json_path, const char* csv_path,
                                                  const comove_manifest* manifest);
COMOVE_API void comove_angle_check_free(comove_angle_check* check);

/* ---- home repeatability ----------------------------------------------- */

COMOVE_API comove_status comove_home_test(const comove_scene* scene, comove_camera camera,
                                          int snapshots, double home_jitter_sigma_rad,
                                          comove_home** out);
COMOVE_API double comove_home_median(const comove_home* home);
COMOVE_API double comove_home_max_abs(const comove_home* home);
COMOVE_API comove_status comove_home_write(const comove_home* home, const char* json_path,
                                           const char* csv_path,
                                           const comove_manifest* manifest);
COMOVE_API void comove_home_free(comove_home* home);

#ifdef __cplusplus
}
#endif

#endif /* COMOVE_COMOVE_H */
