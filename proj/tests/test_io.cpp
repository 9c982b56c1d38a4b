#include <unistd.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlos/evaluation.hpp"
#include "nlos/io.hpp"
#include "nlos/scenario.hpp"

using namespace nlos;
using namespace nlos::io;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("nlos-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

sim::Scenario noisy_sa() {
  sim::NoiseSpec n;
  n.range_sigma = 0.05;
  n.angle_sigma_deg = 0.5;
  n.depth_sigma_rel = 0.03;
  n.static_clutter_rate = 2.0;
  n.dynamic_clutter_rate = 2.0;
  n.dropout_prob = 0.01;
  return sim::builtin_scenario("SA", {}, n, 77);
}

// Small but valid scene for fast image-bearing round trips.
sim::Scenario tiny_scene() {
  sim::Scenario s;
  s.id = "tiny";
  s.camera.intrinsics = CameraIntrinsics{50.0, 50.0, 2.0, 1.5, 4, 3};
  s.vehicles = {AlignedBox{{3.0, 0.0}, 2.0, 4.0}};
  sim::PedTrajectory ped;
  ped.waypoints = {{0.0, {1.0, 3.0}}, {1.0, {1.0, 2.0}}};
  s.pedestrians = {ped};
  s.duration = 0.5;
  s.frame_rate = 2.0;
  return s;
}

}  // namespace

TEST_CASE("scenario survives a JSON round trip field for field") {
  const sim::Scenario a = noisy_sa();
  const json j = scenario_to_json(a);
  const sim::Scenario b = scenario_from_json(j);

  REQUIRE(b.id == a.id);
  REQUIRE(b.seed == a.seed);
  REQUIRE(b.frame_rate == a.frame_rate);
  REQUIRE(b.duration == a.duration);
  REQUIRE(b.ego_origin.x == a.ego_origin.x);
  REQUIRE(b.ego_origin.y == a.ego_origin.y);
  REQUIRE(b.camera.intrinsics.fx == a.camera.intrinsics.fx);
  REQUIRE(b.camera.intrinsics.cy == a.camera.intrinsics.cy);
  REQUIRE(b.camera.intrinsics.width == a.camera.intrinsics.width);
  REQUIRE(b.camera.position.z == a.camera.position.z);
  REQUIRE(b.camera.yaw == a.camera.yaw);
  REQUIRE(b.vehicles.size() == a.vehicles.size());
  for (std::size_t i = 0; i < a.vehicles.size(); ++i) REQUIRE(b.vehicles[i] == a.vehicles[i]);
  REQUIRE(b.pedestrians.size() == a.pedestrians.size());
  for (std::size_t i = 0; i < a.pedestrians.size(); ++i) {
    REQUIRE(b.pedestrians[i].waypoints.size() == a.pedestrians[i].waypoints.size());
    for (std::size_t w = 0; w < a.pedestrians[i].waypoints.size(); ++w) {
      REQUIRE(b.pedestrians[i].waypoints[w].t == a.pedestrians[i].waypoints[w].t);
      REQUIRE(b.pedestrians[i].waypoints[w].pos.x == a.pedestrians[i].waypoints[w].pos.x);
      REQUIRE(b.pedestrians[i].waypoints[w].pos.y == a.pedestrians[i].waypoints[w].pos.y);
    }
  }
  REQUIRE(b.noise.range_sigma == a.noise.range_sigma);
  REQUIRE(b.noise.angle_sigma_deg == a.noise.angle_sigma_deg);
  REQUIRE(b.noise.depth_sigma_rel == a.noise.depth_sigma_rel);
  REQUIRE(b.noise.static_clutter_rate == a.noise.static_clutter_rate);
  REQUIRE(b.noise.dynamic_clutter_rate == a.noise.dynamic_clutter_rate);
  REQUIRE(b.noise.dropout_prob == a.noise.dropout_prob);
  REQUIRE(b.returns_per_path == a.returns_per_path);
  REQUIRE(b.static_spacing == a.static_spacing);
  REQUIRE(b.dense_reference == a.dense_reference);
  REQUIRE(b.vehicle_height == a.vehicle_height);
  REQUIRE(b.ped_height == a.ped_height);
  REQUIRE(b.ped_radius == a.ped_radius);
  REQUIRE(b.peds_block_radar == a.peds_block_radar);
  REQUIRE(b.static_speed_threshold == a.static_speed_threshold);

  // Serialization is canonical: a second pass reproduces the bytes.
  REQUIRE(scenario_to_json(b).dump(2) == j.dump(2));

  TempDir tmp;
  save_scenario(a, tmp.path / "s.json");
  const sim::Scenario c = load_scenario(tmp.path / "s.json");
  REQUIRE(scenario_to_json(c).dump(2) == j.dump(2));
}

TEST_CASE("scenario parsing rejects unknown keys at every level") {
  const json base = scenario_to_json(noisy_sa());

  json top = base;
  top["extra"] = 1;
  REQUIRE_THROWS_AS(scenario_from_json(top), IoError);

  json cam = base;
  cam["camera"]["fov"] = 90;
  REQUIRE_THROWS_AS(scenario_from_json(cam), IoError);

  json noise = base;
  noise["noise"]["snow"] = 0.5;
  REQUIRE_THROWS_AS(scenario_from_json(noise), IoError);

  json veh = base;
  veh["vehicles"][0]["color"] = "red";
  REQUIRE_THROWS_AS(scenario_from_json(veh), IoError);

  json ped = base;
  ped["pedestrians"][0]["name"] = "p";
  REQUIRE_THROWS_AS(scenario_from_json(ped), IoError);

  json wp = base;
  wp["pedestrians"][0]["waypoints"][0]["vz"] = 0;
  REQUIRE_THROWS_AS(scenario_from_json(wp), IoError);
}

TEST_CASE("scenario parsing distinguishes schema, shape, and validity errors") {
  const json base = scenario_to_json(noisy_sa());

  json no_schema = base;
  no_schema.erase("schema");
  REQUIRE_THROWS_AS(scenario_from_json(no_schema), IoError);

  json bad_schema = base;
  bad_schema["schema"] = "nlos-scenario/999";
  REQUIRE_THROWS_AS(scenario_from_json(bad_schema), IoError);

  json no_id = base;
  no_id.erase("id");
  REQUIRE_THROWS_AS(scenario_from_json(no_id), IoError);

  json no_vehicles = base;
  no_vehicles.erase("vehicles");
  REQUIRE_THROWS_AS(scenario_from_json(no_vehicles), IoError);

  json bad_number = base;
  bad_number["frame_rate"] = "fast";
  REQUIRE_THROWS_AS(scenario_from_json(bad_number), IoError);

  json bad_point = base;
  bad_point["ego_origin"] = json::array({1.0});
  REQUIRE_THROWS_AS(scenario_from_json(bad_point), IoError);

  // Structurally fine JSON with impossible geometry fails validation instead.
  json overlapping = base;
  overlapping["vehicles"].push_back(overlapping["vehicles"][0]);
  REQUIRE_THROWS_AS(scenario_from_json(overlapping), ValidationError);
}

TEST_CASE("pipeline config overlays defaults and validates") {
  const PipelineConfig defaults;

  const PipelineConfig a = pipeline_config_from_json(json{{"pixel_stride", 3}});
  REQUIRE(a.pixel_stride == 3);
  REQUIRE(a.vehicle_eps == defaults.vehicle_eps);
  REQUIRE(a.smoothing_window == defaults.smoothing_window);

  const PipelineConfig b =
      pipeline_config_from_json(json{{"height_band", json::array({0.1, 2.0})},
                                     {"refine_step", 0.025},
                                     {"target_min_pts", 3}});
  REQUIRE(b.height_band.low == 0.1);
  REQUIRE(b.height_band.high == 2.0);
  REQUIRE(b.refine_step == 0.025);
  REQUIRE(b.target_min_pts == 3);

  REQUIRE_THROWS_AS(pipeline_config_from_json(json{{"stride", 3}}), IoError);
  REQUIRE_THROWS_AS(pipeline_config_from_json(json{{"height_band", json::array({0.1})}}), IoError);
  REQUIRE_THROWS_AS(pipeline_config_from_json(json{{"vehicle_eps", -1.0}}), ConfigError);
  REQUIRE_THROWS_AS(pipeline_config_from_json(json{{"height_band", json::array({2.0, 0.1})}}),
                    ConfigError);

  TempDir tmp;
  spit(tmp.path / "cfg.json", "{\"max_bounces\": 5}");
  REQUIRE(load_pipeline_config(tmp.path / "cfg.json").max_bounces == 5);
  spit(tmp.path / "bad.json", "{nope");
  REQUIRE_THROWS_AS(load_pipeline_config(tmp.path / "bad.json"), IoError);
}

TEST_CASE("depth images quantize to 2 mm and round trip exactly on the grid") {
  TempDir tmp;
  DepthGrid g(3, 2);
  g.values = {0.0, 0.002, 0.004, 1.0, 65535 * 0.002, 200.0};
  const fs::path p = tmp.path / "d.pgm";
  write_depth_pgm(g, p);
  const DepthGrid r = read_depth_pgm(p);
  REQUIRE(r.width == 3);
  REQUIRE(r.height == 2);
  REQUIRE(r.values[0] == 0.0);
  REQUIRE(r.values[1] == 0.002);
  REQUIRE(r.values[2] == 0.004);
  REQUIRE(r.values[3] == 1.0);
  REQUIRE(r.values[4] == 65535 * 0.002);
  REQUIRE(r.values[5] == 65535 * 0.002);  // clamped at the far plane

  // Arbitrary depths come back within half a quantization step.
  DepthGrid q(1, 1);
  q.values = {1.2345};
  write_depth_pgm(q, p);
  REQUIRE(read_depth_pgm(p).values[0] == Catch::Approx(1.2345).margin(0.001 + 1e-9));
}

TEST_CASE("depth PGM payload is big-endian 16 bit") {
  TempDir tmp;
  DepthGrid g(1, 1);
  g.values = {0.002};  // exactly one quantization unit
  const fs::path p = tmp.path / "one.pgm";
  write_depth_pgm(g, p);
  const std::string bytes = slurp(p);
  REQUIRE(bytes.size() >= 2);
  REQUIRE(static_cast<unsigned char>(bytes[bytes.size() - 2]) == 0x00);
  REQUIRE(static_cast<unsigned char>(bytes[bytes.size() - 1]) == 0x01);
}

TEST_CASE("malformed PGM files are rejected") {
  TempDir tmp;
  const fs::path p = tmp.path / "bad.pgm";

  spit(p, "P2\n1 1\n65535\n0");
  REQUIRE_THROWS_AS(read_depth_pgm(p), IoError);

  spit(p, std::string("P5\n1 1\n255\n") + '\0');
  REQUIRE_THROWS_AS(read_depth_pgm(p), IoError);  // wrong maxval for depth

  spit(p, std::string("P5\n2 2\n65535\n") + "\x01\x02");
  REQUIRE_THROWS_AS(read_depth_pgm(p), IoError);  // truncated payload

  spit(p, "P5\n2 2\n65535");
  REQUIRE_THROWS_AS(read_depth_pgm(p), IoError);

  REQUIRE_THROWS_AS(read_depth_pgm(tmp.path / "missing.pgm"), IoError);
}

TEST_CASE("mask images round trip and accept any nonzero as vehicle") {
  TempDir tmp;
  SegMask m(2, 2);
  m.values = {0, 1, 1, 0};
  const fs::path p = tmp.path / "m.pgm";
  write_mask_pgm(m, p);
  const std::string bytes = slurp(p);
  REQUIRE(static_cast<unsigned char>(bytes[bytes.size() - 4]) == 0);
  REQUIRE(static_cast<unsigned char>(bytes[bytes.size() - 3]) == 255);
  REQUIRE(read_mask_pgm(p).values == m.values);

  spit(p, std::string("P5\n2 1\n255\n") + '\x01' + '\x00');
  const SegMask r = read_mask_pgm(p);
  REQUIRE(r.values == std::vector<std::uint8_t>{1, 0});

  spit(p, "P5\n2 1\n65535\n..");
  REQUIRE_THROWS_AS(read_mask_pgm(p), IoError);  // wrong maxval for mask
}

TEST_CASE("frame image names are zero padded") {
  REQUIRE(frame_image_name("depth", 7) == "depth_00007.pgm");
  REQUIRE(frame_image_name("mask", 12345) == "mask_12345.pgm");
}

TEST_CASE("a simulated run survives the directory round trip") {
  const sim::Scenario s = tiny_scene();
  std::vector<sim::SimFrame> frames = sim::simulate_all(s);
  REQUIRE(frames.size() == 2);

  TempDir tmp;
  write_run(s, frames, tmp.path);
  REQUIRE(fs::exists(tmp.path / "scenario.json"));
  REQUIRE(fs::exists(tmp.path / "frames.jsonl"));
  REQUIRE(fs::exists(tmp.path / "frames" / "depth_00000.pgm"));
  REQUIRE(fs::exists(tmp.path / "frames" / "mask_00001.pgm"));

  const StoredRun run = read_run(tmp.path);
  REQUIRE(run.scenario.id == s.id);
  REQUIRE(run.frames.size() == frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& a = frames[f];
    const auto& b = run.frames[f];
    REQUIRE(b.radar.timestamp == a.radar.timestamp);
    REQUIRE(b.radar.points.size() == a.radar.points.size());
    for (std::size_t i = 0; i < a.radar.points.size(); ++i) {
      REQUIRE(b.radar.points[i].position.x == a.radar.points[i].position.x);
      REQUIRE(b.radar.points[i].position.y == a.radar.points[i].position.y);
      REQUIRE(b.radar.points[i].motion == a.radar.points[i].motion);
      REQUIRE(b.radar.points[i].id == a.radar.points[i].id);
    }
    REQUIRE(b.truth.peds.size() == a.truth.peds.size());
    for (std::size_t i = 0; i < a.truth.peds.size(); ++i) {
      REQUIRE(b.truth.peds[i].pos.x == a.truth.peds[i].pos.x);
      REQUIRE(b.truth.peds[i].speed == a.truth.peds[i].speed);
      REQUIRE(b.truth.peds[i].vis == a.truth.peds[i].vis);
    }
    REQUIRE(b.truth.labels.size() == a.truth.labels.size());
    for (std::size_t i = 0; i < a.truth.labels.size(); ++i) {
      REQUIRE(b.truth.labels[i].id == a.truth.labels[i].id);
      REQUIRE(b.truth.labels[i].kind == a.truth.labels[i].kind);
      REQUIRE(b.truth.labels[i].ped == a.truth.labels[i].ped);
      REQUIRE(b.truth.labels[i].reflected == a.truth.labels[i].reflected);
    }
    REQUIRE(b.mask.values == a.mask.values);
    // Noise-free depths here are exact ray parameters; after quantization the
    // stored copy sits within half a step of the original.
    REQUIRE(b.depth.values.size() == a.depth.values.size());
    for (std::size_t i = 0; i < a.depth.values.size(); ++i)
      REQUIRE(b.depth.values[i] == Catch::Approx(a.depth.values[i]).margin(0.001 + 1e-9));
  }

  // A frame count that disagrees with the header is an error.
  std::string listing = slurp(tmp.path / "frames.jsonl");
  const auto cut = listing.find('\n', listing.find('\n') + 1);
  spit(tmp.path / "frames.jsonl", listing.substr(0, cut + 1));
  REQUIRE_THROWS_AS(read_run(tmp.path), IoError);
}

TEST_CASE("results stream round trips bit for bit") {
  std::vector<FrameResult> results(2);
  results[0].t = 0.0;
  results[0].structures = {AlignedBox{{7.9, 3.45}, 1.8, 4.5}};
  results[0].layout_fixed = false;
  results[0].gap_frame = true;
  TargetEstimate e;
  e.position = {0.1 + 0.2, 1.0 / 3.0};  // deliberately non-representable decimals
  e.support = 6;
  e.direct_count = 2;
  e.reflected_count = 4;
  e.cluster_id = 1;
  results[1].t = 1.0 / 15.0;
  results[1].targets = {e};
  results[1].layout_fixed = true;

  TempDir tmp;
  const fs::path p = tmp.path / "results.jsonl";
  write_results(results, "SA", p);
  const std::vector<FrameResult> r = read_results(p);
  REQUIRE(r.size() == 2);
  REQUIRE(r[0].t == results[0].t);
  REQUIRE(r[0].gap_frame);
  REQUIRE_FALSE(r[0].layout_fixed);
  REQUIRE(r[0].structures.size() == 1);
  REQUIRE(r[0].structures[0] == results[0].structures[0]);
  REQUIRE(r[1].t == results[1].t);
  REQUIRE(r[1].layout_fixed);
  REQUIRE(r[1].targets.size() == 1);
  REQUIRE(r[1].targets[0].position.x == e.position.x);
  REQUIRE(r[1].targets[0].position.y == e.position.y);
  REQUIRE(r[1].targets[0].support == 6);
  REQUIRE(r[1].targets[0].direct_count == 2);
  REQUIRE(r[1].targets[0].reflected_count == 4);
  REQUIRE(r[1].targets[0].cluster_id == 1);

  // Re-writing what was read reproduces the file exactly.
  const fs::path p2 = tmp.path / "results2.jsonl";
  write_results(r, "SA", p2);
  REQUIRE(slurp(p) == slurp(p2));

  spit(p, "{\"schema\":\"nlos-results/999\",\"scenario\":\"x\",\"frame_count\":0}\n");
  REQUIRE_THROWS_AS(read_results(p), IoError);
}

TEST_CASE("report and match table writers emit well-formed output") {
  const sim::Scenario s = tiny_scene();
  eval::SimRun run = eval::run_simulated(s);
  const eval::RunEval ev = eval::evaluate_run(s, run.truths, run.results);

  TempDir tmp;
  write_report(s.id, ev, tmp.path / "report.json");
  const json rep = json::parse(slurp(tmp.path / "report.json"));
  REQUIRE(rep["schema"] == kReportSchema);
  REQUIRE(rep["scenario"] == "tiny");
  REQUIRE(rep["accuracy"].is_number());
  REQUIRE(rep["pedestrians"].is_array());
  REQUIRE(rep["pedestrians"].size() == 1);
  REQUIRE(rep["vehicles"].size() == 1);

  write_matches_csv(ev, tmp.path / "matches.csv");
  std::ifstream csv(tmp.path / "matches.csv");
  std::string header;
  REQUIRE(std::getline(csv, header));
  REQUIRE(header == "frame,t,ped,estimate,error,iou");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  std::size_t expected = 0;
  for (const auto& f : ev.frames) expected += f.matches.size();
  REQUIRE(rows == expected);
}
