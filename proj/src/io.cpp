//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/io.hpp"

#include <unistd.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "comove/error.hpp"
#include "comove/fit.hpp"
#include "json.hpp"

namespace comove::io {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  Fail(ErrorCode::kConfig, path.empty() ? msg : path + ": " + msg);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kConfig, std::string("malformed JSON: ") + e.what());
  }
}

// Strict view of a JSON object: every key must be consumed before finish().
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return number_at(key);
  }

  double required_number(const std::string& key) {
    if (!has(key)) config_error(child_path(key), "missing required field");
    return number_at(key);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number_integer()) config_error(child_path(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) config_error(child_path(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_string()) config_error(child_path(key), "expected a string");
    return v.get<std::string>();
  }

  Vec2 vec2(const std::string& key, const Vec2& fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      config_error(child_path(key), "expected an array of two numbers");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  // `base_deg<tail>` or `base_rad<tail>`, returned in radians.
  double angle(const std::string& base, double fallback_rad, const std::string& tail = "") {
    const std::string deg = base + "_deg" + tail;
    const std::string rad = base + "_rad" + tail;
    if (has(deg) && has(rad)) {
      config_error(path_, "both '" + deg + "' and '" + rad + "' given");
    }
    if (has(deg)) return number_at(deg) * kDeg;
    if (has(rad)) return number_at(rad);
    if (has(base + tail) && !tail.empty()) {
      config_error(child_path(base + tail), "angle keys need a _deg or _rad unit suffix");
    }
    if (has(base)) config_error(child_path(base), "angle keys need a _deg or _rad unit suffix");
    return fallback_rad;
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  Reader child(const std::string& key) {
    used_.insert(key);
    return Reader(j_.at(key), child_path(key));
  }

  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) {
        config_error("", "unknown field '" + child_path(it.key()) + "'");
      }
    }
  }

 private:
  double number_at(const std::string& key) {
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number()) config_error(child_path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(child_path(key), "expected a finite number");
    return d;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Rethrows validation failures of parsed values as configuration errors.
template <typename F>
void validate_as_config(const std::string& path, F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInfeasibleProfile) throw;
    config_error(path, e.detail());
  }
}

CameraIntrinsics parse_intrinsics(Reader& r, CameraIntrinsics intr) {
  intr.focal_px = r.number("focal_px", intr.focal_px);
  intr.center_px = r.vec2("center_px", intr.center_px);
  intr.k1 = r.number("k1", intr.k1);
  intr.sensor_px = r.vec2("sensor_px", intr.sensor_px);
  return intr;
}

CameraConfig parse_camera(Reader r, CameraConfig cam) {
  cam.pose.yaw_rad = r.angle("yaw", cam.pose.yaw_rad);
  cam.pose.pitch_rad = r.angle("pitch", cam.pose.pitch_rad);
  cam.pose.roll_rad = r.angle("roll", cam.pose.roll_rad);
  cam.intrinsics = parse_intrinsics(r, cam.intrinsics);
  r.finish();
  return cam;
}

// Consumes the rig keys of `r` (the caller finishes it).
RigConfig parse_rig_fields(Reader& r) {
  RigConfig rig;
  const std::string preset = r.string("preset", "");
  if (preset == "test_rig") {
    rig = presets::test_rig();
  } else if (!preset.empty()) {
    config_error(r.child_path("preset"), "unknown rig preset '" + preset + "'");
  }
  rig.baseline_m = r.number("baseline_m", rig.baseline_m);
  if (r.has("left")) rig.left = parse_camera(r.child("left"), rig.left);
  if (r.has("right")) rig.right = parse_camera(r.child("right"), rig.right);
  validate_as_config(r.path(), [&] { rig.Validate(); });
  return rig;
}

double period_field(Reader& r, const std::string& base, double fallback) {
  const bool rate = r.has(base + "_rate_hz");
  const bool period = r.has(base + "_period_s");
  if (rate && period) {
    config_error(r.path(), "both '" + base + "_rate_hz' and '" + base + "_period_s' given");
  }
  if (rate) {
    const double hz = r.number(base + "_rate_hz", 0.0);
    if (!(hz > 0.0)) config_error(r.child_path(base + "_rate_hz"), "must be positive");
    return 1.0 / hz;
  }
  return r.number(base + "_period_s", fallback);
}

TimingConfig parse_timing(Reader r) {
  TimingConfig t;
  t.dt_camera = period_field(r, "camera", t.dt_camera);
  t.dt_stage = period_field(r, "stage", t.dt_stage);
  t.offset = r.number("offset_s", t.offset);
  r.finish();
  validate_as_config(r.path(), [&] { t.Validate(); });
  return t;
}

MotionProfile parse_motion(Reader r) {
  const double lead = r.number("lead_still_s", 0.0);
  MotionProfile p;
  if (r.has("preset")) {
    const std::string name = r.string("preset", "");
    try {
      p = MotionProfile::Preset(name, lead);
    } catch (const Error&) {
      config_error(r.child_path("preset"), "unknown motion preset '" + name + "'");
    }
    r.finish();
    return p;
  }
  const std::string mode = r.string("mode", "still");
  if (mode == "still") {
    p = MotionProfile::Still();
    p.lead_still_s = lead;
  } else if (mode == "constant") {
    p = MotionProfile::ConstantSpeed(r.angle("speed", 0.0, "_s"), lead);
  } else if (mode == "periodic") {
    const double amp = r.angle("amplitude", 0.0);
    const double v = r.angle("v_max", 0.0, "_s");
    const double a = r.angle("a_max", 0.0, "_s2");
    p = MotionProfile::Periodic(amp, v, a, lead);
  } else if (mode == "sinusoid") {
    const double amp = r.angle("amplitude", 0.0);
    const double v = r.angle("v_max", 0.0, "_s");
    p = MotionProfile::Sinusoid(amp, v, lead);
  } else {
    config_error(r.child_path("mode"), "unknown motion mode '" + mode + "'");
  }
  r.finish();
  validate_as_config(r.path(), [&] { p.Validate(); });
  return p;
}

ErrorInjection parse_injection(Reader r) {
  ErrorInjection inj;
  inj.delta_baseline_m = r.number("delta_baseline_m", 0.0);
  inj.delta_yaw_rad = r.angle("delta_yaw", 0.0);
  inj.delta_focal_left_px = r.number("delta_focal_left_px", 0.0);
  inj.delta_focal_right_px = r.number("delta_focal_right_px", 0.0);
  inj.delta_offset_s = r.number("delta_offset_s", 0.0);
  inj.home_jitter_sigma_rad = r.angle("home_jitter_sigma", 0.0);
  r.finish();
  validate_as_config(r.path(), [&] { inj.Validate(); });
  return inj;
}

std::vector<Target> parse_targets(const json& arr, const std::string& path) {
  if (!arr.is_array()) config_error(path, "expected an array");
  std::vector<Target> out;
  std::set<int> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Reader r(arr[i], path + "[" + std::to_string(i) + "]");
    Target t;
    t.id = static_cast<int>(r.integer("id", static_cast<std::int64_t>(i)));
    t.position_m = Vec3(r.required_number("x_m"), r.required_number("y_m"),
                        r.required_number("z_m"));
    r.finish();
    if (!seen.insert(t.id).second) {
      config_error(r.path(), "duplicate target id " + std::to_string(t.id));
    }
    out.push_back(t);
  }
  return out;
}

ordered_json manifest_json(const RunManifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["config_digest"] = m.config_digest;
  j["version"] = m.version;
  j["seed"] = m.seed;
  j["created"] = m.created;
  return j;
}

// JSON has no encoding for non-finite numbers; they become strings.
ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---- CSV ----------------------------------------------------------------

struct CsvTable {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

CsvTable parse_csv(const std::string& text, const std::string& header) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line != header) {
        Fail(ErrorCode::kInvalidInput, "line " + std::to_string(lineno) + ": expected header '" +
                                           header + "', got '" + line + "'");
      }
      have_header = true;
      continue;
    }
    auto cells = split(line);
    const std::size_t want = split(header).size();
    if (cells.size() != want) {
      Fail(ErrorCode::kInvalidInput, "line " + std::to_string(lineno) + ": expected " +
                                         std::to_string(want) + " fields, got " +
                                         std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(lineno);
  }
  if (!have_header) {
    Fail(ErrorCode::kInvalidInput, "missing header '" + header + "'");
  }
  return table;
}

double parse_double(const std::string& s, std::size_t lineno) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    Fail(ErrorCode::kInvalidInput,
         "line " + std::to_string(lineno) + ": not a finite number: '" + s + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& s, std::size_t lineno) {
  std::int64_t v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    Fail(ErrorCode::kInvalidInput,
         "line " + std::to_string(lineno) + ": not an integer: '" + s + "'");
  }
  return v;
}

Side parse_side(const std::string& s, std::size_t lineno) {
  if (s == "left") return Side::kLeft;
  if (s == "right") return Side::kRight;
  Fail(ErrorCode::kInvalidInput,
       "line " + std::to_string(lineno) + ": camera must be 'left' or 'right', got '" + s + "'");
}

class CsvWriter {
 public:
  CsvWriter(const RunManifest& manifest, const std::string& header) {
    out_ << manifest.comment_block() << header << '\n';
  }
  CsvWriter& cell(double v) { return raw(format_double(v)); }
  CsvWriter& cell(std::int64_t v) { return raw(std::to_string(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::size_t v) { return raw(std::to_string(v)); }
  CsvWriter& cell(const std::string& v) { return raw(v); }
  CsvWriter& cell(const char* v) { return raw(v); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  CsvWriter& raw(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ostringstream out_;
  bool first_ = true;
};

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::comment_block() const {
  std::ostringstream out;
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + v[i];
    return s;
  };
  out << "# manifest command=" << command << " version=" << version << " seed=" << seed
      << " config_digest=" << config_digest << '\n';
  out << "# inputs=" << join(inputs) << '\n';
  out << "# outputs=" << join(outputs) << '\n';
  out << "# created=" << created << '\n';
  return out.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    Fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    Fail(ErrorCode::kIo, "error reading '" + path + "'");
  }
  return ss.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() /
                       ("." + target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      Fail(ErrorCode::kIo, "cannot open '" + tmp.string() + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignore;
      fs::remove(tmp, ignore);
      Fail(ErrorCode::kIo, "error writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    Fail(ErrorCode::kIo, "cannot move output into place at '" + path + "': " + ec.message());
  }
}

// ---- configuration ----------------------------------------------------

RigFile rig_from_json(const std::string& text) {
  const json j = parse_json(text);
  Reader r(j, "");
  RigFile f;
  f.rig = parse_rig_fields(r);
  if (r.has("timing")) f.timing = parse_timing(r.child("timing"));
  r.finish();
  return f;
}

std::string rig_to_json(const RigFile& f) {
  auto camera = [](const CameraConfig& c) {
    ordered_json j;
    j["yaw_rad"] = c.pose.yaw_rad;
    j["pitch_rad"] = c.pose.pitch_rad;
    j["roll_rad"] = c.pose.roll_rad;
    j["focal_px"] = c.intrinsics.focal_px;
    j["center_px"] = {c.intrinsics.center_px.x(), c.intrinsics.center_px.y()};
    j["k1"] = c.intrinsics.k1;
    j["sensor_px"] = {c.intrinsics.sensor_px.x(), c.intrinsics.sensor_px.y()};
    return j;
  };
  ordered_json j;
  j["baseline_m"] = f.rig.baseline_m;
  j["left"] = camera(f.rig.left);
  j["right"] = camera(f.rig.right);
  j["timing"] = {{"camera_period_s", f.timing.dt_camera},
                 {"stage_period_s", f.timing.dt_stage},
                 {"offset_s", f.timing.offset}};
  return dump(j);
}

ErrorInjection injection_from_json(const std::string& text) {
  const json j = parse_json(text);
  return parse_injection(Reader(j, ""));
}

SceneFile scene_from_json(const std::string& text) {
  const json j = parse_json(text);
  Reader r(j, "");
  SceneFile f;
  Scene& s = f.scene;
  if (r.has("rig")) {
    Reader rr = r.child("rig");
    s.rig = parse_rig_fields(rr);
    rr.finish();
  }
  if (r.has("timing")) s.timing = parse_timing(r.child("timing"));
  if (r.has("motion")) {
    Reader m = r.child("motion");
    if (m.has("left")) s.left_motion = parse_motion(m.child("left"));
    if (m.has("right")) s.right_motion = parse_motion(m.child("right"));
    m.finish();
  }
  s.noise_sigma_px = r.number("noise_sigma_px", s.noise_sigma_px);
  s.frame_jitter_s = r.number("frame_jitter_s", s.frame_jitter_s);
  s.duration_s = r.number("duration_s", s.duration_s);
  s.seed = r.unsigned_integer("seed", s.seed);
  if (r.has("targets") && r.has("target_layout")) {
    config_error("", "give either 'targets' or 'target_layout', not both");
  }
  if (r.has("targets")) {
    s.targets = parse_targets(r.raw("targets"), "targets");
  } else if (r.has("target_layout")) {
    Reader t = r.child("target_layout");
    const auto count = t.integer("count", 7);
    const double zmin = t.number("z_min_m", 20.0);
    const double zmax = t.number("z_max_m", 40.0);
    const double lateral = t.number("lateral_m", 0.25);
    t.finish();
    validate_as_config("target_layout", [&] {
      s.targets = default_targets(s.rig, static_cast<int>(count), zmin, zmax, lateral);
    });
  } else {
    config_error("", "missing 'targets' or 'target_layout'");
  }
  if (r.has("injection")) f.injection = parse_injection(r.child("injection"));
  r.finish();
  validate_as_config("", [&] { s.Validate(); });
  return f;
}

PredictConfig predict_config_from_json(const std::string& text) {
  const json j = parse_json(text);
  Reader r(j, "");
  PredictConfig c;
  ErrorModelInput& m = c.model;
  m.focal_px = r.number("focal_px", m.focal_px);
  m.baseline_m = r.number("baseline_m", m.baseline_m);
  m.psi_rad = r.angle("psi", m.psi_rad);
  m.delta_baseline_m = r.number("delta_baseline_m", 0.0);
  m.delta_focal_px = r.number("delta_focal_px", 0.0);
  m.delta_psi_rad = r.angle("delta_psi", 0.0);
  m.stage_speed_rad_s = r.angle("stage_speed", 0.0, "_s");
  c.zbar_min_m = r.number("zbar_min_m", c.zbar_min_m);
  c.zbar_max_m = r.number("zbar_max_m", c.zbar_max_m);
  c.points = static_cast<int>(r.integer("points", c.points));
  r.finish();
  if (!(c.zbar_min_m > 0.0) || !(c.zbar_max_m >= c.zbar_min_m) || c.points < 1) {
    config_error("", "need 0 < zbar_min_m <= zbar_max_m and points >= 1");
  }
  m.zbar_m = c.zbar_min_m;
  validate_as_config("", [&] { m.Validate(); });
  return c;
}

CheckerboardScene checkerboard_from_json(const std::string& text) {
  const json j = parse_json(text);
  Reader r(j, "");
  CheckerboardScene s;
  s.rows = static_cast<int>(r.integer("rows", s.rows));
  s.cols = static_cast<int>(r.integer("cols", s.cols));
  s.square_m = r.number("square_m", s.square_m);
  s.distance_m = r.number("distance_m", s.distance_m);
  if (r.has("camera")) {
    Reader c = r.child("camera");
    s.intrinsics = parse_intrinsics(c, s.intrinsics);
    c.finish();
  }
  if (r.has("timing")) s.timing = parse_timing(r.child("timing"));
  if (r.has("motion")) s.motion = parse_motion(r.child("motion"));
  s.noise_sigma_px = r.number("noise_sigma_px", s.noise_sigma_px);
  s.frame_jitter_s = r.number("frame_jitter_s", s.frame_jitter_s);
  s.duration_s = r.number("duration_s", s.duration_s);
  s.seed = r.unsigned_integer("seed", s.seed);
  r.finish();
  if (s.rows < 2 || s.cols < 2 || !(s.square_m > 0.0) || !(s.distance_m > 0.0) ||
      !(s.duration_s > 0.0) || !(s.noise_sigma_px >= 0.0) || !(s.frame_jitter_s >= 0.0)) {
    config_error("", "invalid checkerboard scene");
  }
  validate_as_config("camera", [&] { s.intrinsics.Validate(); });
  return s;
}

// ---- data files -------------------------------------------------------

std::string stage_logs_to_csv(const std::vector<StageLog>& logs, const RunManifest& manifest) {
  CsvWriter w(manifest, "stage_id,sample_index,angle_rad");
  for (const StageLog& log : logs) {
    if (log.stage_id.empty() || log.stage_id.find(',') != std::string::npos) {
      Fail(ErrorCode::kInvalidInput, "stage id must be non-empty and contain no commas");
    }
    for (std::size_t k = 0; k < log.size(); ++k) {
      w.cell(log.stage_id).cell(log.first_index + static_cast<std::int64_t>(k)).cell(log.angles[k]);
      w.end_row();
    }
  }
  return w.str();
}

std::map<std::string, StageLog> stage_logs_from_csv(const std::string& text, double rate_hz) {
  if (!(rate_hz > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "stage rate must be positive");
  }
  const CsvTable t = parse_csv(text, "stage_id,sample_index,angle_rad");
  std::map<std::string, StageLog> logs;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t ln = t.line_numbers[i];
    const std::int64_t idx = parse_int(row[1], ln);
    const double angle = parse_double(row[2], ln);
    auto [it, inserted] = logs.try_emplace(row[0]);
    StageLog& log = it->second;
    if (inserted) {
      log.stage_id = row[0];
      log.rate_hz = rate_hz;
      log.first_index = idx;
    } else if (idx != log.first_index + static_cast<std::int64_t>(log.size())) {
      Fail(ErrorCode::kInvalidInput, "line " + std::to_string(ln) + ": stage '" + row[0] +
                                         "' sample index " + std::to_string(idx) +
                                         " is not consecutive");
    }
    log.angles.push_back(angle);
  }
  for (auto& [id, log] : logs) log.Validate();
  return logs;
}

std::string detections_to_csv(const DetectionSet& detections, const RigConfig& rig,
                              const RunManifest& manifest) {
  CsvWriter w(manifest, "camera,frame,target_id,u_px,v_px");
  for (const FrameDetections& f : detections.frames) {
    for (const Side side : {Side::kLeft, Side::kRight}) {
      const Vec2 half = 0.5 * rig.camera(side).intrinsics.sensor_px;
      for (const auto& [id, px] : f.camera(side)) {
        w.cell(SideName(side)).cell(f.frame).cell(id).cell(px.x() + half.x()).cell(px.y() + half.y());
        w.end_row();
      }
    }
  }
  return w.str();
}

DetectionSet detections_from_csv(const std::string& text, const RigConfig& rig) {
  const CsvTable t = parse_csv(text, "camera,frame,target_id,u_px,v_px");
  DetectionSet set;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t ln = t.line_numbers[i];
    const Side side = parse_side(row[0], ln);
    const std::int64_t frame = parse_int(row[1], ln);
    const std::int64_t id = parse_int(row[2], ln);
    const Vec2 half = 0.5 * rig.camera(side).intrinsics.sensor_px;
    const Vec2 px(parse_double(row[3], ln) - half.x(), parse_double(row[4], ln) - half.y());
    auto& cam = set.at_frame(frame).camera(side);
    if (!cam.emplace(static_cast<int>(id), px).second) {
      Fail(ErrorCode::kInvalidInput, "line " + std::to_string(ln) + ": duplicate detection of target " +
                                         std::to_string(id) + " in frame " + std::to_string(frame));
    }
  }
  return set;
}

std::vector<TargetTrack> tracks_from_detections(const DetectionSet& detections, Side side,
                                                double camera_rate_hz) {
  std::map<int, TargetTrack> by_id;
  for (const FrameDetections& f : detections.frames) {
    for (const auto& [id, px] : f.camera(side)) {
      TargetTrack& tr = by_id[id];
      tr.target_id = id;
      tr.rate_hz = camera_rate_hz;
      tr.samples.push_back(f.frame);
      tr.u_px.push_back(px.x());
    }
  }
  std::vector<TargetTrack> out;
  for (auto& [id, tr] : by_id) out.push_back(std::move(tr));
  return out;
}

std::string truth_to_json(const GroundTruth& truth, const RunManifest& manifest) {
  ordered_json j;
  j["manifest"] = manifest_json(manifest);
  ordered_json targets = ordered_json::array();
  for (const Target& t : truth.targets) {
    targets.push_back({{"id", t.id},
                       {"x_m", t.position_m.x()},
                       {"y_m", t.position_m.y()},
                       {"z_m", t.position_m.z()}});
  }
  j["targets"] = targets;
  ordered_json dists = ordered_json::array();
  for (const auto& [key, d] : truth.distances_m) {
    dists.push_back({{"target_a", key.first}, {"target_b", key.second}, {"distance_m", d}});
  }
  j["distances"] = dists;
  return dump(j);
}

GroundTruth truth_from_json(const std::string& text) {
  const json j = parse_json(text);
  Reader r(j, "");
  if (r.has("manifest")) r.raw("manifest");
  GroundTruth g;
  if (r.has("targets")) g.targets = parse_targets(r.raw("targets"), "targets");
  if (!r.has("distances")) config_error("", "missing 'distances'");
  const json& arr = r.raw("distances");
  if (!arr.is_array()) config_error("distances", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Reader d(arr[i], "distances[" + std::to_string(i) + "]");
    auto a = static_cast<int>(d.integer("target_a", -1));
    auto b = static_cast<int>(d.integer("target_b", -1));
    const double dist = d.required_number("distance_m");
    d.finish();
    if (a == b || a < 0 || b < 0) config_error(d.path(), "need two distinct target ids");
    if (!(dist > 0.0)) config_error(d.path(), "distance must be positive");
    if (a > b) std::swap(a, b);
    g.distances_m[{a, b}] = dist;
  }
  r.finish();
  return g;
}

std::string trajectories_to_csv(const std::vector<Trajectory3D>& trajectories,
                                const RunManifest& manifest) {
  CsvWriter w(manifest, "target_id,frame,t_s,x_m,y_m,z_m");
  for (const Trajectory3D& tr : trajectories) {
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const Vec3& p = tr.points_m[k];
      w.cell(tr.target_id).cell(tr.frames[k]).cell(tr.times_s[k]).cell(p.x()).cell(p.y()).cell(p.z());
      w.end_row();
    }
  }
  return w.str();
}

std::string report_to_csv(const DistanceReport& report, const RunManifest& manifest) {
  CsvWriter w(manifest, "target_a,target_b,zbar_m,mean_rel_err,std_rel_err,n_frames");
  for (const PairReport& p : report.pairs) {
    w.cell(p.target_a).cell(p.target_b).cell(p.zbar_m).cell(p.mean_rel_err).cell(p.std_rel_err);
    w.cell(p.n_frames());
    w.end_row();
  }
  return w.str();
}

DistanceReport report_from_csv(const std::string& text) {
  const CsvTable t = parse_csv(text, "target_a,target_b,zbar_m,mean_rel_err,std_rel_err,n_frames");
  DistanceReport report;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t ln = t.line_numbers[i];
    PairReport p;
    p.target_a = static_cast<int>(parse_int(row[0], ln));
    p.target_b = static_cast<int>(parse_int(row[1], ln));
    p.zbar_m = parse_double(row[2], ln);
    p.mean_rel_err = parse_double(row[3], ln);
    p.std_rel_err = parse_double(row[4], ln);
    const std::int64_t n = parse_int(row[5], ln);
    if (n < 1) {
      Fail(ErrorCode::kInvalidInput, "line " + std::to_string(ln) + ": n_frames must be positive");
    }
    report.pairs.push_back(std::move(p));
  }
  return report;
}

std::string report_frames_to_csv(const DistanceReport& report, const RunManifest& manifest) {
  CsvWriter w(manifest, "target_a,target_b,frame,t_s,reconstructed_m,rel_err");
  for (const PairReport& p : report.pairs) {
    for (std::size_t k = 0; k < p.n_frames(); ++k) {
      w.cell(p.target_a).cell(p.target_b).cell(p.frames[k]).cell(p.times_s[k]);
      w.cell(p.reconstructed_m[k]).cell(p.rel_err[k]);
      w.end_row();
    }
  }
  return w.str();
}

std::string offset_to_json(const OffsetEstimate& e, const RunManifest& manifest) {
  ordered_json j;
  j["manifest"] = manifest_json(manifest);
  j["offset_s"] = num(e.offset_s);
  j["resolution_s"] = num(e.resolution_s);
  j["window_first_sample"] = e.window_first;
  j["window_last_sample"] = e.window_last;
  ordered_json targets = ordered_json::array();
  for (const TargetCorrelation& t : e.targets) {
    targets.push_back({{"target_id", t.target_id},
                       {"home_u_px", num(t.home_u_px)},
                       {"best_lag_samples", t.best_lag_samples}});
  }
  j["targets"] = targets;
  return dump(j);
}

std::string correlation_to_csv(const OffsetEstimate& e, double stage_rate_hz,
                               const RunManifest& manifest) {
  CsvWriter w(manifest, "target_id,lag_samples,lag_s,correlation");
  for (const TargetCorrelation& t : e.targets) {
    for (std::size_t k = 0; k < t.correlation.size(); ++k) {
      w.cell(t.target_id).cell(k).cell(static_cast<double>(k) / stage_rate_hz).cell(t.correlation[k]);
      w.end_row();
    }
  }
  return w.str();
}

std::string focal_to_json(const FocalCalibrationResult& r, const RunManifest& manifest) {
  ordered_json j;
  j["manifest"] = manifest_json(manifest);
  j["camera"] = SideName(r.side);
  j["believed_focal_px"] = num(r.believed_focal_px);
  j["stage_speed_rad_s"] = num(r.v_rad_s);
  if (r.has_fit) {
    j["fit"] = {{"delta_focal_px", num(r.fit.delta_focal_px)},
                {"corrected_focal_px", num(r.believed_focal_px - r.fit.delta_focal_px)},
                {"slope_per_m_s", num(r.fit.fit_slope)},
                {"slope_se", num(r.fit.fit_slope_se)},
                {"intercept_m_s", num(r.fit.fit_intercept)},
                {"r2", num(r.fit.r2)},
                {"consistent_with_zero", r.fit.consistent_with_zero}};
  }
  if (r.has_sweep) {
    ordered_json per = ordered_json::array();
    for (std::size_t i = 0; i < r.target_ids.size(); ++i) {
      per.push_back({{"target_id", r.target_ids[i]}, {"best_focal_px", r.per_target_best_px[i]}});
    }
    j["sweep"] = {{"best_focal_px", num(r.best_focal_px)},
                  {"best_grid_focal_px", num(r.best_grid_focal_px)},
                  {"delta_focal_px", num(r.believed_focal_px - r.best_focal_px)},
                  {"grid_points", r.sweep.size()},
                  {"per_target", per}};
  }
  return dump(j);
}

std::string sweep_to_csv(const FocalCalibrationResult& r, const RunManifest& manifest) {
  std::string header = "focal_px,mean_abs_slope";
  for (const int id : r.target_ids) header += ",slope_" + std::to_string(id);
  CsvWriter w(manifest, header);
  for (const SweepPoint& p : r.sweep) {
    w.cell(p.focal_px).cell(p.mean_abs_slope);
    for (const double s : p.target_slopes) w.cell(s);
    w.end_row();
  }
  return w.str();
}

std::string focal_fit_to_csv(const FocalCalibrationResult& r, const RunManifest& manifest) {
  CsvWriter w(manifest, "target_id,mean_z2_m2,slope_m_s,fitted_m_s");
  for (const ZSlope& s : r.slopes) {
    w.cell(s.target_id).cell(s.mean_z2_m2).cell(s.slope_m_s);
    w.cell(r.fit.fit_intercept + r.fit.fit_slope * s.mean_z2_m2);
    w.end_row();
  }
  return w.str();
}

std::string diagnosis_to_json(const DiagnosisResult& r, const RunManifest& manifest) {
  ordered_json j;
  j["manifest"] = manifest_json(manifest);
  j["classification"] = SignatureName(r.classification);
  j["constant_term"] = num(r.constant_term);
  j["constant_se"] = num(r.constant_se);
  j["slope_per_m"] = num(r.slope_per_m);
  j["slope_se"] = num(r.slope_se);
  j["intercept"] = num(r.intercept);
  j["intercept_se"] = num(r.intercept_se);
  j["implied_delta_yaw_rad"] = num(r.implied_delta_yaw_rad);
  j["implied_delta_yaw_note"] = "correction attributed to the right camera's yaw";
  j["zbar_mean_m"] = num(r.zbar_mean_m);
  j["zbar_span_m"] = num(r.zbar_span_m);
  j["span_sufficient"] = r.span_sufficient;
  j["rss_constant"] = num(r.rss_constant);
  j["rss_linear"] = num(r.rss_linear);
  j["variance_ratio"] = num(r.variance_ratio);
  return dump(j);
}

std::string diagnosis_to_csv(const DiagnosisResult& r, const RunManifest& manifest) {
  CsvWriter w(manifest, "zbar_m,mean_rel_err,abs_mean_rel_err,constant_fit,linear_fit");
  const double mean = fit_constant(r.mean_rel_err).mean;
  for (std::size_t i = 0; i < r.zbar_m.size(); ++i) {
    w.cell(r.zbar_m[i]).cell(r.mean_rel_err[i]).cell(std::abs(r.mean_rel_err[i])).cell(mean);
    if (r.span_sufficient) {
      w.cell(r.intercept + r.slope_per_m * r.zbar_m[i]);
    } else {
      w.cell("");
    }
    w.end_row();
  }
  return w.str();
}

std::string predict_to_csv(const PredictConfig& c, const RunManifest& manifest) {
  CsvWriter w(manifest, "zbar_m,rel_err,abs_rel_err,z_drift_m_s");
  ErrorModelInput m = c.model;
  for (int i = 0; i < c.points; ++i) {
    const double z = c.points == 1 ? c.zbar_min_m
                                   : c.zbar_min_m + (c.zbar_max_m - c.zbar_min_m) * i / (c.points - 1);
    m.zbar_m = z;
    const double e = predict_rel_error(m);
    w.cell(z).cell(e).cell(std::abs(e)).cell(predict_z_drift(m, z));
    w.end_row();
  }
  return w.str();
}

std::string angle_check_to_csv(const AngleCheck& check, const RunManifest& manifest) {
  CsvWriter w(manifest, "frame,stage_rad,kabsch_rad,error_rad");
  for (std::size_t i = 0; i < check.frames.size(); ++i) {
    w.cell(check.frames[i]).cell(check.stage_rad[i]).cell(check.kabsch_rad[i]).cell(check.error_rad[i]);
    w.end_row();
  }
  return w.str();
}

std::string angle_check_to_json(const AngleCheck& check, const RunManifest& manifest) {
  ordered_json j;
  j["manifest"] = manifest_json(manifest);
  j["reference_frames"] = check.reference_frames;
  j["compared_frames"] = check.frames.size();
  j["max_abs_error_rad"] = num(check.max_abs_error_rad);
  j["rms_error_rad"] = num(check.rms_error_rad);
  return dump(j);
}

std::string home_to_csv(const HomeRepeatability& r, const RunManifest& manifest) {
  CsvWriter w(manifest, "index,fluctuation_rad");
  for (std::size_t i = 0; i < r.fluctuations_rad.size(); ++i) {
    w.cell(i).cell(r.fluctuations_rad[i]);
    w.end_row();
  }
  return w.str();
}

std::string home_to_json(const HomeRepeatability& r, const RunManifest& manifest) {
  ordered_json j;
  j["manifest"] = manifest_json(manifest);
  j["samples"] = r.fluctuations_rad.size();
  j["median_rad"] = num(r.median_rad);
  j["max_abs_rad"] = num(r.max_abs_rad);
  j["std_rad"] = num(r.std_rad);
  return dump(j);
}

}  // namespace comove::io
