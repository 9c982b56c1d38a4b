#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlos/evaluation.hpp"
#include "nlos/pipeline.hpp"
#include "nlos/scenario.hpp"
#include "nlos/simulator.hpp"

namespace nlos::io {

using nlohmann::json;

inline constexpr const char* kScenarioSchema = "nlos-scenario/1";
inline constexpr const char* kFramesSchema = "nlos-frames/1";
inline constexpr const char* kResultsSchema = "nlos-results/1";
inline constexpr const char* kReportSchema = "nlos-report/1";

/// Depth images are stored as 16-bit PGM with this many metres per unit.
inline constexpr double kDepthScale = 0.002;

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw IoError("unknown key '" + item.key() + "' in " + where);
  }
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw IoError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

inline double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw IoError(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw IoError(where + " must be finite");
  return v;
}

inline Point2 as_point2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw IoError(where + " must be [x, y]");
  return {as_number(j[0], where + "[0]"), as_number(j[1], where + "[1]")};
}

inline json to_json(const Point2& p) { return json::array({p.x, p.y}); }

inline std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

inline json parse(const std::string& text, const std::string& where) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON in " + where);
  return j;
}

}  // namespace detail

// --- scenario -----------------------------------------------------------

inline json scenario_to_json(const sim::Scenario& s) {
  json cam{{"fx", s.camera.intrinsics.fx},
           {"fy", s.camera.intrinsics.fy},
           {"cx", s.camera.intrinsics.cx},
           {"cy", s.camera.intrinsics.cy},
           {"width", s.camera.intrinsics.width},
           {"height", s.camera.intrinsics.height},
           {"position", json::array({s.camera.position.x, s.camera.position.y, s.camera.position.z})},
           {"yaw", s.camera.yaw}};

  json vehicles = json::array();
  for (const auto& v : s.vehicles)
    vehicles.push_back({{"center", detail::to_json(v.center)},
                        {"width", v.width},
                        {"length", v.length}});

  json peds = json::array();
  for (const auto& ped : s.pedestrians) {
    json wps = json::array();
    for (const auto& w : ped.waypoints)
      wps.push_back({{"t", w.t}, {"pos", detail::to_json(w.pos)}});
    peds.push_back({{"waypoints", wps}});
  }

  json noise{{"range_sigma", s.noise.range_sigma},
             {"angle_sigma_deg", s.noise.angle_sigma_deg},
             {"depth_sigma_rel", s.noise.depth_sigma_rel},
             {"static_clutter_rate", s.noise.static_clutter_rate},
             {"dynamic_clutter_rate", s.noise.dynamic_clutter_rate},
             {"dropout_prob", s.noise.dropout_prob}};

  return json{{"schema", kScenarioSchema},
              {"id", s.id},
              {"seed", s.seed},
              {"frame_rate", s.frame_rate},
              {"duration", s.duration},
              {"ego_origin", detail::to_json(s.ego_origin)},
              {"camera", cam},
              {"vehicles", vehicles},
              {"pedestrians", peds},
              {"noise", noise},
              {"returns_per_path", s.returns_per_path},
              {"static_spacing", s.static_spacing},
              {"dense_reference", s.dense_reference},
              {"vehicle_height", s.vehicle_height},
              {"ped_height", s.ped_height},
              {"ped_radius", s.ped_radius},
              {"peds_block_radar", s.peds_block_radar},
              {"static_speed_threshold", s.static_speed_threshold}};
}

inline sim::Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw IoError("scenario document must be an object");
  detail::reject_unknown_keys(
      j,
      {"schema", "id", "seed", "frame_rate", "duration", "ego_origin", "camera", "vehicles",
       "pedestrians", "noise", "returns_per_path", "static_spacing", "dense_reference",
       "vehicle_height", "ped_height", "ped_radius", "peds_block_radar",
       "static_speed_threshold"},
      "scenario");
  const std::string schema = detail::require(j, "schema", "scenario").get<std::string>();
  if (schema != kScenarioSchema)
    throw IoError("unsupported scenario schema '" + schema + "'");

  sim::Scenario s;
  s.id = detail::require(j, "id", "scenario").get<std::string>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("frame_rate")) s.frame_rate = detail::as_number(j["frame_rate"], "frame_rate");
  if (j.contains("duration")) s.duration = detail::as_number(j["duration"], "duration");
  if (j.contains("ego_origin")) s.ego_origin = detail::as_point2(j["ego_origin"], "ego_origin");

  if (j.contains("camera")) {
    const json& c = j["camera"];
    detail::reject_unknown_keys(
        c, {"fx", "fy", "cx", "cy", "width", "height", "position", "yaw"}, "camera");
    CameraIntrinsics k(detail::as_number(detail::require(c, "fx", "camera"), "camera.fx"),
                       detail::as_number(detail::require(c, "fy", "camera"), "camera.fy"),
                       detail::as_number(detail::require(c, "cx", "camera"), "camera.cx"),
                       detail::as_number(detail::require(c, "cy", "camera"), "camera.cy"),
                       detail::require(c, "width", "camera").get<int>(),
                       detail::require(c, "height", "camera").get<int>());
    s.camera.intrinsics = k;
    if (c.contains("position")) {
      const json& p = c["position"];
      if (!p.is_array() || p.size() != 3) throw IoError("camera.position must be [x, y, z]");
      s.camera.position = {detail::as_number(p[0], "camera.position[0]"),
                           detail::as_number(p[1], "camera.position[1]"),
                           detail::as_number(p[2], "camera.position[2]")};
    }
    if (c.contains("yaw")) s.camera.yaw = detail::as_number(c["yaw"], "camera.yaw");
  }

  for (const json& v : detail::require(j, "vehicles", "scenario")) {
    detail::reject_unknown_keys(v, {"center", "width", "length"}, "vehicle");
    s.vehicles.emplace_back(detail::as_point2(detail::require(v, "center", "vehicle"), "vehicle.center"),
                            detail::as_number(detail::require(v, "width", "vehicle"), "vehicle.width"),
                            detail::as_number(detail::require(v, "length", "vehicle"), "vehicle.length"));
  }

  if (j.contains("pedestrians")) {
    for (const json& ped : j["pedestrians"]) {
      detail::reject_unknown_keys(ped, {"waypoints"}, "pedestrian");
      sim::PedTrajectory traj;
      for (const json& w : detail::require(ped, "waypoints", "pedestrian")) {
        detail::reject_unknown_keys(w, {"t", "pos"}, "waypoint");
        traj.waypoints.push_back({detail::as_number(detail::require(w, "t", "waypoint"), "waypoint.t"),
                                  detail::as_point2(detail::require(w, "pos", "waypoint"), "waypoint.pos")});
      }
      s.pedestrians.push_back(std::move(traj));
    }
  }

  if (j.contains("noise")) {
    const json& n = j["noise"];
    detail::reject_unknown_keys(n,
                                {"range_sigma", "angle_sigma_deg", "depth_sigma_rel",
                                 "static_clutter_rate", "dynamic_clutter_rate", "dropout_prob"},
                                "noise");
    auto opt = [&](const char* key, double& slot) {
      if (n.contains(key)) slot = detail::as_number(n[key], std::string("noise.") + key);
    };
    opt("range_sigma", s.noise.range_sigma);
    opt("angle_sigma_deg", s.noise.angle_sigma_deg);
    opt("depth_sigma_rel", s.noise.depth_sigma_rel);
    opt("static_clutter_rate", s.noise.static_clutter_rate);
    opt("dynamic_clutter_rate", s.noise.dynamic_clutter_rate);
    opt("dropout_prob", s.noise.dropout_prob);
  }

  if (j.contains("returns_per_path")) s.returns_per_path = j["returns_per_path"].get<int>();
  if (j.contains("static_spacing"))
    s.static_spacing = detail::as_number(j["static_spacing"], "static_spacing");
  if (j.contains("dense_reference")) s.dense_reference = j["dense_reference"].get<bool>();
  if (j.contains("vehicle_height"))
    s.vehicle_height = detail::as_number(j["vehicle_height"], "vehicle_height");
  if (j.contains("ped_height")) s.ped_height = detail::as_number(j["ped_height"], "ped_height");
  if (j.contains("ped_radius")) s.ped_radius = detail::as_number(j["ped_radius"], "ped_radius");
  if (j.contains("peds_block_radar")) s.peds_block_radar = j["peds_block_radar"].get<bool>();
  if (j.contains("static_speed_threshold"))
    s.static_speed_threshold = detail::as_number(j["static_speed_threshold"], "static_speed_threshold");

  sim::validate_scenario(s);
  return s;
}

inline void save_scenario(const sim::Scenario& s, const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out);
  out << scenario_to_json(s).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline sim::Scenario load_scenario(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(detail::parse(buf.str(), path.string()));
}

// --- config overlay ------------------------------------------------------

inline PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig base = {}) {
  detail::reject_unknown_keys(
      j,
      {"vehicle_width", "vehicle_length", "vehicle_eps", "vehicle_min_pts", "pixel_stride",
       "refine_tau", "refine_delta", "refine_step", "smoothing_window", "match_gate",
       "target_eps", "target_min_pts", "structure_margin", "ped_box_size", "max_bounces",
       "hit_eps", "height_band"},
      "pipeline config");
  auto num = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = detail::as_number(j[key], key);
  };
  auto integer = [&](const char* key, int& slot) {
    if (j.contains(key)) slot = j[key].get<int>();
  };
  num("vehicle_width", base.vehicle_width);
  num("vehicle_length", base.vehicle_length);
  num("vehicle_eps", base.vehicle_eps);
  integer("vehicle_min_pts", base.vehicle_min_pts);
  integer("pixel_stride", base.pixel_stride);
  num("refine_tau", base.refine_tau);
  num("refine_delta", base.refine_delta);
  num("refine_step", base.refine_step);
  integer("smoothing_window", base.smoothing_window);
  num("match_gate", base.match_gate);
  num("target_eps", base.target_eps);
  integer("target_min_pts", base.target_min_pts);
  num("structure_margin", base.structure_margin);
  num("ped_box_size", base.ped_box_size);
  integer("max_bounces", base.max_bounces);
  num("hit_eps", base.hit_eps);
  if (j.contains("height_band")) {
    const json& b = j["height_band"];
    if (!b.is_array() || b.size() != 2) throw IoError("height_band must be [lo, hi]");
    base.height_band.low = detail::as_number(b[0], "height_band[0]");
    base.height_band.high = detail::as_number(b[1], "height_band[1]");
  }
  base.validate();
  return base;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path,
                                           PipelineConfig base = {}) {
  auto in = detail::open_in(path, std::ios::in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return pipeline_config_from_json(detail::parse(buf.str(), path.string()), base);
}

// --- PGM images ----------------------------------------------------------

inline void write_depth_pgm(const DepthGrid& depth, const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n# depth scale " << kDepthScale << " m per unit, 0 = no return\n"
      << depth.width << ' ' << depth.height << "\n65535\n";
  for (double v : depth.values) {
    long q = std::lround(v / kDepthScale);
    q = std::clamp(q, 0L, 65535L);
    const auto u = static_cast<std::uint16_t>(q);
    out.put(static_cast<char>(u >> 8));
    out.put(static_cast<char>(u & 0xff));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {

inline std::string pgm_token(std::istream& in, const std::string& where) {
  std::string tok;
  while (in) {
    int c = in.get();
    if (c == '#') {
      while (in && in.get() != '\n') {
      }
      continue;
    }
    if (c == EOF) break;
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw IoError("truncated PGM header in " + where);
  return tok;
}

}  // namespace detail

inline DepthGrid read_depth_pgm(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::in | std::ios::binary);
  const std::string where = path.string();
  if (detail::pgm_token(in, where) != "P5") throw IoError("not a binary PGM: " + where);
  const int w = std::stoi(detail::pgm_token(in, where));
  const int h = std::stoi(detail::pgm_token(in, where));
  const int maxval = std::stoi(detail::pgm_token(in, where));
  if (w <= 0 || h <= 0 || maxval != 65535) throw IoError("unsupported depth PGM: " + where);
  DepthGrid grid(w, h);
  for (double& v : grid.values) {
    const int hi = in.get(), lo = in.get();
    if (hi == EOF || lo == EOF) throw IoError("truncated PGM data in " + where);
    v = ((hi << 8) | lo) * kDepthScale;
  }
  return grid;
}

inline void write_mask_pgm(const SegMask& mask, const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
  for (std::uint8_t v : mask.values) out.put(v ? static_cast<char>(255) : static_cast<char>(0));
  if (!out) throw IoError("write failed: " + path.string());
}

inline SegMask read_mask_pgm(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::in | std::ios::binary);
  const std::string where = path.string();
  if (detail::pgm_token(in, where) != "P5") throw IoError("not a binary PGM: " + where);
  const int w = std::stoi(detail::pgm_token(in, where));
  const int h = std::stoi(detail::pgm_token(in, where));
  const int maxval = std::stoi(detail::pgm_token(in, where));
  if (w <= 0 || h <= 0 || maxval != 255) throw IoError("unsupported mask PGM: " + where);
  SegMask mask(w, h);
  for (std::uint8_t& v : mask.values) {
    const int c = in.get();
    if (c == EOF) throw IoError("truncated PGM data in " + where);
    v = c > 0 ? 1 : 0;
  }
  return mask;
}

// --- frame streams -------------------------------------------------------

namespace detail {

inline const char* vis_name(sim::Visibility v) {
  switch (v) {
    case sim::Visibility::NLoS: return "nlos";
    case sim::Visibility::Partial: return "partial";
    default: return "full";
  }
}

inline sim::Visibility vis_from(const std::string& s, const std::string& where) {
  if (s == "nlos") return sim::Visibility::NLoS;
  if (s == "partial") return sim::Visibility::Partial;
  if (s == "full") return sim::Visibility::Full;
  throw IoError("bad visibility '" + s + "' in " + where);
}

inline const char* kind_name(sim::PointKind k) {
  switch (k) {
    case sim::PointKind::Reflector: return "reflector";
    case sim::PointKind::StaticClutter: return "static_clutter";
    case sim::PointKind::Target: return "target";
    default: return "dynamic_clutter";
  }
}

inline sim::PointKind kind_from(const std::string& s, const std::string& where) {
  if (s == "reflector") return sim::PointKind::Reflector;
  if (s == "static_clutter") return sim::PointKind::StaticClutter;
  if (s == "target") return sim::PointKind::Target;
  if (s == "dynamic_clutter") return sim::PointKind::DynamicClutter;
  throw IoError("bad point kind '" + s + "' in " + where);
}

}  // namespace detail

inline json frame_to_json(int index, const sim::SimFrame& frame) {
  json points = json::array();
  for (const auto& p : frame.radar.points)
    points.push_back({{"x", p.position.x},
                      {"y", p.position.y},
                      {"m", p.motion == Motion::Static ? "S" : "D"},
                      {"id", p.id}});
  json peds = json::array();
  for (const auto& ped : frame.truth.peds)
    peds.push_back({{"x", ped.pos.x},
                    {"y", ped.pos.y},
                    {"speed", ped.speed},
                    {"vis", detail::vis_name(ped.vis)}});
  json labels = json::array();
  for (const auto& lab : frame.truth.labels)
    labels.push_back({{"id", lab.id},
                      {"kind", detail::kind_name(lab.kind)},
                      {"ped", lab.ped},
                      {"reflected", lab.reflected}});
  return json{{"frame", index},
              {"t", frame.radar.timestamp},
              {"points", points},
              {"truth", json{{"peds", peds}, {"labels", labels}}}};
}

/// Parses one frame line produced by frame_to_json. Depth and mask are loaded
/// separately from their image files.
inline sim::SimFrame frame_from_json(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"frame", "t", "points", "truth"}, where);
  sim::SimFrame frame;
  frame.radar.timestamp = detail::as_number(detail::require(j, "t", where), where + ".t");
  frame.truth.t = frame.radar.timestamp;
  for (const json& p : detail::require(j, "points", where)) {
    detail::reject_unknown_keys(p, {"x", "y", "m", "id"}, where + ".points");
    const std::string m = detail::require(p, "m", where).get<std::string>();
    if (m != "S" && m != "D") throw IoError("bad motion tag '" + m + "' in " + where);
    frame.radar.points.push_back({{detail::as_number(p["x"], where + ".x"),
                                   detail::as_number(p["y"], where + ".y")},
                                  m == "S" ? Motion::Static : Motion::Dynamic,
                                  detail::require(p, "id", where).get<int>()});
  }
  if (j.contains("truth")) {
    const json& t = j["truth"];
    detail::reject_unknown_keys(t, {"peds", "labels"}, where + ".truth");
    if (t.contains("peds"))
      for (const json& ped : t["peds"]) {
        sim::PedSnapshot snap;
        snap.pos = {detail::as_number(detail::require(ped, "x", where), where + ".ped.x"),
                    detail::as_number(detail::require(ped, "y", where), where + ".ped.y")};
        snap.speed = detail::as_number(detail::require(ped, "speed", where), where + ".speed");
        snap.vis = detail::vis_from(detail::require(ped, "vis", where).get<std::string>(), where);
        frame.truth.peds.push_back(snap);
      }
    if (t.contains("labels"))
      for (const json& lab : t["labels"])
        frame.truth.labels.push_back(
            {detail::require(lab, "id", where).get<int>(),
             detail::kind_from(detail::require(lab, "kind", where).get<std::string>(), where),
             detail::require(lab, "ped", where).get<int>(),
             detail::require(lab, "reflected", where).get<bool>()});
  }
  return frame;
}

inline std::string frame_image_name(const char* stem, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05d.pgm", stem, index);
  return buf;
}

/// Writes a simulated run to `dir`: scenario.json, frames.jsonl, and one
/// depth/mask PGM pair per frame under dir/frames/.
inline void write_run(const sim::Scenario& s, std::span<const sim::SimFrame> frames,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "frames");
  save_scenario(s, dir / "scenario.json");
  auto out = detail::open_out(dir / "frames.jsonl", std::ios::out);
  out << json{{"schema", kFramesSchema},
              {"scenario", s.id},
              {"frame_count", static_cast<int>(frames.size())}}
             .dump()
      << '\n';
  for (int i = 0; i < static_cast<int>(frames.size()); ++i) {
    out << frame_to_json(i, frames[i]).dump() << '\n';
    write_depth_pgm(frames[i].depth, dir / "frames" / frame_image_name("depth", i));
    write_mask_pgm(frames[i].mask, dir / "frames" / frame_image_name("mask", i));
  }
  if (!out) throw IoError("write failed: " + (dir / "frames.jsonl").string());
}

struct StoredRun {
  sim::Scenario scenario;
  std::vector<sim::SimFrame> frames;
};

inline StoredRun read_run(const std::filesystem::path& dir) {
  StoredRun run;
  run.scenario = load_scenario(dir / "scenario.json");
  const auto list_path = dir / "frames.jsonl";
  auto in = detail::open_in(list_path, std::ios::in);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty frame stream: " + list_path.string());
  const json header = detail::parse(line, list_path.string());
  if (detail::require(header, "schema", "frame header").get<std::string>() != kFramesSchema)
    throw IoError("unsupported frame schema in " + list_path.string());
  int index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    sim::SimFrame frame =
        frame_from_json(detail::parse(line, list_path.string()), "frame " + std::to_string(index));
    frame.depth = read_depth_pgm(dir / "frames" / frame_image_name("depth", index));
    frame.mask = read_mask_pgm(dir / "frames" / frame_image_name("mask", index));
    run.frames.push_back(std::move(frame));
    ++index;
  }
  const int expected = detail::require(header, "frame_count", "frame header").get<int>();
  if (expected != index)
    throw IoError("frame count mismatch in " + list_path.string() + ": header says " +
                  std::to_string(expected) + ", found " + std::to_string(index));
  return run;
}

// --- results -------------------------------------------------------------

inline json result_to_json(int index, const FrameResult& r) {
  json boxes = json::array();
  for (const auto& b : r.structures)
    boxes.push_back(
        {{"center", detail::to_json(b.center)}, {"width", b.width}, {"length", b.length}});
  json targets = json::array();
  for (const auto& e : r.targets)
    targets.push_back({{"x", e.position.x},
                       {"y", e.position.y},
                       {"support", e.support},
                       {"direct", e.direct_count},
                       {"reflected", e.reflected_count},
                       {"cluster", e.cluster_id}});
  return json{{"frame", index},
              {"t", r.t},
              {"fixed", r.layout_fixed},
              {"gap", r.gap_frame},
              {"structures", boxes},
              {"targets", targets}};
}

inline FrameResult result_from_json(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"frame", "t", "fixed", "gap", "structures", "targets"}, where);
  FrameResult r;
  r.t = detail::as_number(detail::require(j, "t", where), where + ".t");
  r.layout_fixed = detail::require(j, "fixed", where).get<bool>();
  r.gap_frame = detail::require(j, "gap", where).get<bool>();
  for (const json& b : detail::require(j, "structures", where))
    r.structures.emplace_back(detail::as_point2(detail::require(b, "center", where), where),
                              detail::as_number(detail::require(b, "width", where), where),
                              detail::as_number(detail::require(b, "length", where), where));
  for (const json& e : detail::require(j, "targets", where)) {
    TargetEstimate est;
    est.position = {detail::as_number(detail::require(e, "x", where), where),
                    detail::as_number(detail::require(e, "y", where), where)};
    est.support = detail::require(e, "support", where).get<int>();
    est.direct_count = detail::require(e, "direct", where).get<int>();
    est.reflected_count = detail::require(e, "reflected", where).get<int>();
    est.cluster_id = detail::require(e, "cluster", where).get<int>();
    r.targets.push_back(est);
  }
  return r;
}

inline void write_results(std::span<const FrameResult> results, const std::string& scenario_id,
                          const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out);
  out << json{{"schema", kResultsSchema},
              {"scenario", scenario_id},
              {"frame_count", static_cast<int>(results.size())}}
             .dump()
      << '\n';
  for (int i = 0; i < static_cast<int>(results.size()); ++i)
    out << result_to_json(i, results[i]).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<FrameResult> read_results(const std::filesystem::path& path) {
  auto in = detail::open_in(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty result stream: " + path.string());
  const json header = detail::parse(line, path.string());
  if (detail::require(header, "schema", "result header").get<std::string>() != kResultsSchema)
    throw IoError("unsupported result schema in " + path.string());
  std::vector<FrameResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(result_from_json(detail::parse(line, path.string()),
                                   "result " + std::to_string(out.size())));
  }
  return out;
}

// --- evaluation report ---------------------------------------------------

inline json report_to_json(const std::string& scenario_id, const eval::RunEval& ev) {
  json peds = json::array();
  for (const auto& tl : ev.peds) {
    json p{{"detected", tl.detected},
           {"window_defined", tl.window_defined},
           {"window_frames", tl.window_frames},
           {"qualifying_frames", tl.qualifying_frames}};
    if (tl.detected) {
      p["t_detect"] = tl.t_detect;
      p["detection_distance"] = tl.detection_distance;
    }
    if (tl.has_full) p["t_full"] = tl.t_full;
    if (tl.window_defined) {
      p["time_advantage"] = tl.time_advantage;
      if (tl.qualifying_frames > 0)
        p["mean_error"] = tl.error_sum / tl.qualifying_frames;
    }
    peds.push_back(p);
  }
  json vehicles = json::array();
  for (const auto& v : ev.vehicles) {
    json e{{"matched", v.matched}, {"correct", v.correct}};
    if (v.matched) e["error"] = v.error;
    vehicles.push_back(e);
  }
  return json{{"schema", kReportSchema},
              {"scenario", scenario_id},
              {"accuracy", ev.accuracy},
              {"mean_error", ev.mean_error},
              {"any_window", ev.any_window},
              {"pedestrians", peds},
              {"vehicles", vehicles},
              {"layout_correct", ev.layout_correct}};
}

inline void write_report(const std::string& scenario_id, const eval::RunEval& ev,
                         const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out);
  out << report_to_json(scenario_id, ev).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// Per-frame match table, one row per associated estimate/pedestrian pair.
inline void write_matches_csv(const eval::RunEval& ev, const std::filesystem::path& path) {
  auto out = detail::open_out(path, std::ios::out);
  out << "frame,t,ped,estimate,error,iou\n";
  char buf[160];
  for (int f = 0; f < static_cast<int>(ev.frames.size()); ++f)
    for (const auto& m : ev.frames[f].matches) {
      std::snprintf(buf, sizeof buf, "%d,%.6f,%d,%d,%.6f,%.6f\n", f, ev.frames[f].t, m.ped,
                    m.estimate, m.error, m.overlap);
      out << buf;
    }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nlos::io
