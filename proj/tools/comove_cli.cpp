//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the library through the C interface only.

#include <comove/comove.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 4;

// Status carried out of a command body.
struct Failure {
  comove_status status;
};

void check(comove_status s) {
  if (s != COMOVE_OK) throw Failure{s};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using Manifest = Handle<comove_manifest, comove_manifest_free>;
using Scene = Handle<comove_scene, comove_scene_free>;
using Injection = Handle<comove_injection, comove_injection_free>;
using Dataset = Handle<comove_dataset, comove_dataset_free>;
using Rig = Handle<comove_rig, comove_rig_free>;
using Detections = Handle<comove_detections, comove_detections_free>;
using Logs = Handle<comove_stage_logs, comove_stage_logs_free>;
using Truth = Handle<comove_truth, comove_truth_free>;
using Recon = Handle<comove_reconstruction, comove_reconstruction_free>;
using Report = Handle<comove_report, comove_report_free>;
using Offset = Handle<comove_offset, comove_offset_free>;
using Focal = Handle<comove_focal, comove_focal_free>;
using Diagnosis = Handle<comove_diagnosis, comove_diagnosis_free>;
using Board = Handle<comove_checkerboard, comove_checkerboard_free>;
using AngleCheck = Handle<comove_angle_check, comove_angle_check_free>;
using Home = Handle<comove_home, comove_home_free>;

template <typename H, typename F>
H make(F&& fn) {
  typename H::pointer raw = nullptr;
  check(fn(&raw));
  return H(raw);
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 1;
};

std::string out_path(const Globals& g, const std::string& name) {
  return (std::filesystem::path(g.out_dir) / name).string();
}

Manifest new_manifest(const Globals& g, const char* command, std::uint64_t seed,
                      const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs) {
  Manifest m = make<Manifest>([&](comove_manifest** out) {
    return comove_manifest_new(command, g.seed.value_or(seed), out);
  });
  for (const auto& in : inputs) check(comove_manifest_add_input(m.get(), in.c_str()));
  for (const auto& o : outputs) check(comove_manifest_add_output(m.get(), o.c_str()));
  return m;
}

comove_camera parse_camera(const std::string& name) {
  return name == "right" ? COMOVE_RIGHT : COMOVE_LEFT;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comove: calibration and reconstruction for stereo rigs on rotational stages"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(comove_version()));

  Globals g;
  app.add_option("--seed", g.seed, "Override the random seed of simulated data");
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::Range(1, 1024))
      ->capture_default_str();

  std::function<void()> run;

  // simulate
  std::string scene_path;
  std::string injection_path;
  auto* sim = app.add_subcommand("simulate", "Synthesize detections, stage logs and ground truth");
  sim->add_option("scene", scene_path, "Scene JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--injection", injection_path, "Error injection JSON (overrides the scene's)")
      ->check(CLI::ExistingFile);
  sim->callback([&] {
    run = [&] {
      Scene scene = make<Scene>([&](auto** o) { return comove_scene_load(scene_path.c_str(), o); });
      if (g.seed) check(comove_scene_set_seed(scene.get(), *g.seed));
      Injection inj;
      std::vector<std::string> inputs{scene_path};
      if (!injection_path.empty()) {
        inj = make<Injection>(
            [&](auto** o) { return comove_injection_load(injection_path.c_str(), o); });
        inputs.push_back(injection_path);
      }
      Dataset data =
          make<Dataset>([&](auto** o) { return comove_simulate(scene.get(), inj.get(), o); });
      Manifest m = new_manifest(g, "simulate", comove_scene_seed(scene.get()), inputs,
                                {out_path(g, "detections.csv"), out_path(g, "stage_log.csv"),
                                 out_path(g, "truth.json"), out_path(g, "rig.json")});
      check(comove_dataset_write(data.get(), g.out_dir.c_str(), m.get()));
      std::printf("frames=%zu\n", comove_dataset_frame_count(data.get()));
    };
  });

  // shared inputs
  std::string det_path;
  std::string logs_path;
  std::string rig_path;
  auto add_data_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--detections", det_path, "Detections CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--logs", logs_path, "Stage log CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--rig", rig_path, "Rig JSON")->required()->check(CLI::ExistingFile);
  };
  auto load_data = [&] {
    Rig rig = make<Rig>([&](auto** o) { return comove_rig_load(rig_path.c_str(), o); });
    Detections det = make<Detections>(
        [&](auto** o) { return comove_detections_load(det_path.c_str(), rig.get(), o); });
    Logs logs =
        make<Logs>([&](auto** o) { return comove_stage_logs_load(logs_path.c_str(), rig.get(), o); });
    return std::make_tuple(std::move(rig), std::move(det), std::move(logs));
  };

  // reconstruct
  std::string truth_path;
  bool per_frame = false;
  auto* rec = app.add_subcommand("reconstruct", "Triangulate every frame and report distances");
  add_data_inputs(rec);
  rec->add_option("--truth", truth_path, "Ground-truth JSON; enables the distance report")
      ->check(CLI::ExistingFile);
  rec->add_flag("--per-frame", per_frame, "Also write the per-frame distance CSV");
  rec->callback([&] {
    run = [&] {
      auto [rig, det, logs] = load_data();
      Recon r = make<Recon>(
          [&](auto** o) { return comove_reconstruct(det.get(), logs.get(), rig.get(), o); });
      std::vector<std::string> inputs{det_path, logs_path, rig_path};
      std::vector<std::string> outputs{out_path(g, "trajectories.csv")};
      if (!truth_path.empty()) {
        inputs.push_back(truth_path);
        outputs.push_back(out_path(g, "report.csv"));
        if (per_frame) outputs.push_back(out_path(g, "report_frames.csv"));
      }
      Manifest m = new_manifest(g, "reconstruct", 0, inputs, outputs);
      check(comove_reconstruction_write(r.get(), outputs[0].c_str(), m.get()));
      if (!truth_path.empty()) {
        Truth truth =
            make<Truth>([&](auto** o) { return comove_truth_load(truth_path.c_str(), o); });
        Report rep =
            make<Report>([&](auto** o) { return comove_report_compute(r.get(), truth.get(), o); });
        check(comove_report_write(rep.get(), outputs[1].c_str(), m.get()));
        if (per_frame) check(comove_report_write_frames(rep.get(), outputs[2].c_str(), m.get()));
        std::printf("pairs=%zu max_abs_mean_rel_err=%.6g\n", comove_report_pair_count(rep.get()),
                    comove_report_max_abs_mean_rel_err(rep.get()));
      }
    };
  });

  // offset
  std::string camera = "left";
  auto* off = app.add_subcommand("offset", "Estimate the camera-to-stage time offset");
  add_data_inputs(off);
  off->add_option("--camera", camera, "Camera whose stage moves")
      ->check(CLI::IsMember({"left", "right"}))
      ->capture_default_str();
  off->callback([&] {
    run = [&] {
      auto [rig, det, logs] = load_data();
      Offset est = make<Offset>([&](auto** o) {
        return comove_offset_estimate(det.get(), logs.get(), rig.get(), parse_camera(camera), o);
      });
      const std::string json = out_path(g, "offset.json");
      const std::string csv = out_path(g, "correlation.csv");
      Manifest m = new_manifest(g, "offset", 0, {det_path, logs_path, rig_path}, {json, csv});
      check(comove_offset_write(est.get(), json.c_str(), csv.c_str(), m.get()));
      std::printf("offset_s=%.6g\n", comove_offset_seconds(est.get()));
    };
  });

  // focal
  std::string mode = "fit";
  comove_sweep_grid grid{5900.0, 6700.0, 1.0};
  auto* foc = app.add_subcommand("focal", "Dynamic focal-length calibration");
  add_data_inputs(foc);
  foc->add_option("--mode", mode, "fit or sweep")
      ->check(CLI::IsMember({"fit", "sweep"}))
      ->capture_default_str();
  foc->add_option("--min-px", grid.min_px, "Sweep lower bound")->capture_default_str();
  foc->add_option("--max-px", grid.max_px, "Sweep upper bound")->capture_default_str();
  foc->add_option("--step-px", grid.step_px, "Sweep step")->capture_default_str();
  foc->callback([&] {
    run = [&] {
      auto [rig, det, logs] = load_data();
      const bool sweep = mode == "sweep";
      Focal f = make<Focal>([&](auto** o) {
        return comove_focal_calibrate(det.get(), logs.get(), rig.get(),
                                      sweep ? COMOVE_FOCAL_SWEEP : COMOVE_FOCAL_FIT, &grid, o);
      });
      const std::string json = out_path(g, "focal.json");
      const std::string csv = out_path(g, sweep ? "sweep.csv" : "focal_fit.csv");
      Manifest m = new_manifest(g, "focal", 0, {det_path, logs_path, rig_path}, {json, csv});
      check(comove_focal_write(f.get(), json.c_str(), csv.c_str(), m.get()));
      comove_focal_summary s{};
      check(comove_focal_summarize(f.get(), &s));
      const char* cam = s.camera == COMOVE_LEFT ? "left" : "right";
      if (s.has_fit) {
        std::printf("camera=%s delta_focal_px=%.6g corrected_focal_px=%.8g r2=%.4f\n", cam,
                    s.fit_delta_focal_px, s.believed_focal_px - s.fit_delta_focal_px, s.fit_r2);
      }
      if (s.has_sweep) {
        std::printf("camera=%s best_focal_px=%.8g\n", cam, s.sweep_best_focal_px);
      }
    };
  });

  // diagnose
  std::string report_path;
  auto* dia = app.add_subcommand("diagnose", "Classify the error signature of a distance report");
  dia->add_option("--report", report_path, "Distance report CSV")
      ->required()
      ->check(CLI::ExistingFile);
  dia->add_option("--rig", rig_path, "Rig JSON (for the baseline)")
      ->required()
      ->check(CLI::ExistingFile);
  dia->callback([&] {
    run = [&] {
      Rig rig = make<Rig>([&](auto** o) { return comove_rig_load(rig_path.c_str(), o); });
      Report rep = make<Report>([&](auto** o) { return comove_report_load(report_path.c_str(), o); });
      Diagnosis d = make<Diagnosis>([&](auto** o) {
        return comove_diagnose(rep.get(), comove_rig_baseline(rig.get()), o);
      });
      const std::string json = out_path(g, "diagnosis.json");
      const std::string csv = out_path(g, "diagnosis.csv");
      Manifest m = new_manifest(g, "diagnose", 0, {report_path, rig_path}, {json, csv});
      check(comove_diagnosis_write(d.get(), json.c_str(), csv.c_str(), m.get()));
      comove_diagnosis_summary s{};
      check(comove_diagnosis_summarize(d.get(), &s));
      std::printf("classification=%s constant=%.6g slope_per_m=%.6g implied_delta_yaw_rad=%.6g\n",
                  comove_signature_name(s.classification), s.constant_term, s.slope_per_m,
                  s.implied_delta_yaw_rad);
    };
  });

  // predict
  std::string model_path;
  auto* pre = app.add_subcommand("predict", "Predicted relative error and depth drift curves");
  pre->add_option("config", model_path, "Error-model JSON")->required()->check(CLI::ExistingFile);
  pre->callback([&] {
    run = [&] {
      const std::string csv = out_path(g, "predicted.csv");
      Manifest m = new_manifest(g, "predict", 0, {model_path}, {csv});
      check(comove_predict(model_path.c_str(), csv.c_str(), m.get()));
    };
  });

  // kabsch-verify
  std::string board_path;
  std::string preset;
  auto* kab = app.add_subcommand("kabsch-verify",
                                 "Check interpolated stage angles against a simulated checkerboard");
  auto* board_opt = kab->add_option("--config", board_path, "Checkerboard scene JSON")
                        ->check(CLI::ExistingFile);
  kab->add_option("--preset", preset, "Motion preset")
      ->check(CLI::IsMember({"slow", "moderate", "fast"}))
      ->excludes(board_opt);
  kab->callback([&] {
    run = [&] {
      Board board;
      std::vector<std::string> inputs;
      if (!board_path.empty()) {
        board = make<Board>([&](auto** o) { return comove_checkerboard_load(board_path.c_str(), o); });
        inputs.push_back(board_path);
      } else {
        const std::string name = preset.empty() ? "moderate" : preset;
        board = make<Board>([&](auto** o) { return comove_checkerboard_preset(name.c_str(), o); });
      }
      if (g.seed) check(comove_checkerboard_set_seed(board.get(), *g.seed));
      AngleCheck c = make<AngleCheck>([&](auto** o) { return comove_kabsch_verify(board.get(), o); });
      const std::string json = out_path(g, "angle_check.json");
      const std::string csv = out_path(g, "angle_check.csv");
      Manifest m = new_manifest(g, "kabsch-verify", 1, inputs, {json, csv});
      check(comove_angle_check_write(c.get(), json.c_str(), csv.c_str(), m.get()));
      std::printf("max_abs_error_rad=%.6g\n", comove_angle_check_max_error(c.get()));
    };
  });

  // home-test
  int snapshots = 50;
  double jitter_rad = 1e-5;
  auto* home = app.add_subcommand("home-test", "Repeatability of the stage home position");
  home->add_option("scene", scene_path, "Scene JSON")->required()->check(CLI::ExistingFile);
  home->add_option("--camera", camera, "Camera to re-home")
      ->check(CLI::IsMember({"left", "right"}))
      ->capture_default_str();
  home->add_option("--snapshots", snapshots, "Number of re-homing cycles")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  home->add_option("--home-jitter-rad", jitter_rad, "Standard deviation of the home error")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  home->callback([&] {
    run = [&] {
      Scene scene = make<Scene>([&](auto** o) { return comove_scene_load(scene_path.c_str(), o); });
      if (g.seed) check(comove_scene_set_seed(scene.get(), *g.seed));
      Home h = make<Home>([&](auto** o) {
        return comove_home_test(scene.get(), parse_camera(camera), snapshots, jitter_rad, o);
      });
      const std::string json = out_path(g, "home.json");
      const std::string csv = out_path(g, "home.csv");
      Manifest m = new_manifest(g, "home-test", comove_scene_seed(scene.get()), {scene_path}, {json, csv});
      check(comove_home_write(h.get(), json.c_str(), csv.c_str(), m.get()));
      std::printf("median_rad=%.6g max_abs_rad=%.6g\n", comove_home_median(h.get()),
                  comove_home_max_abs(h.get()));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    check(comove_set_threads(g.threads));
    std::error_code ec;
    std::filesystem::create_directories(g.out_dir, ec);
    if (ec) {
      std::fprintf(stderr, "error: cannot create output directory '%s': %s\n", g.out_dir.c_str(),
                   ec.message().c_str());
      return kExitIo;
    }
    run();
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", comove_last_error());
    return comove_exit_code(f.status);
  }
  return 0;
}
