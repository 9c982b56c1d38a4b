#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nlos/types.hpp"

namespace nlos::sim {

/// Timestamped position sample on a pedestrian path.
struct Waypoint {
  double t = 0.0;  // [s]
  Point2 pos;
};

/// Piecewise-linear pedestrian trajectory. The position clamps to the first
/// waypoint before the path starts and to the last one after it ends.
struct PedTrajectory {
  std::vector<Waypoint> waypoints;

  Point2 position_at(double t) const {
    if (waypoints.empty()) throw ValidationError("trajectory: no waypoints");
    if (t <= waypoints.front().t) return waypoints.front().pos;
    if (t >= waypoints.back().t) return waypoints.back().pos;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      if (t > waypoints[i].t) continue;
      const Waypoint& a = waypoints[i - 1];
      const Waypoint& b = waypoints[i];
      const double u = (t - a.t) / (b.t - a.t);
      return {a.pos.x + (b.pos.x - a.pos.x) * u, a.pos.y + (b.pos.y - a.pos.y) * u};
    }
    return waypoints.back().pos;
  }

  /// Instantaneous walking speed; zero while holding or outside the path.
  double speed_at(double t) const {
    if (waypoints.size() < 2 || t < waypoints.front().t || t >= waypoints.back().t) return 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      if (t >= waypoints[i].t) continue;
      const Waypoint& a = waypoints[i - 1];
      const Waypoint& b = waypoints[i];
      return distance(a.pos, b.pos) / (b.t - a.t);
    }
    return 0.0;
  }
};

/// Sensor corruption model. All parameters default to a noise-free sensor.
struct NoiseSpec {
  double range_sigma = 0.0;         // radial jitter on radar returns [m]
  double angle_sigma_deg = 0.0;     // bearing jitter on radar returns [deg]
  double depth_sigma_rel = 0.0;     // relative depth jitter per pixel
  double static_clutter_rate = 0.0; // Poisson mean of spurious static points per frame
  double dynamic_clutter_rate = 0.0;
  double dropout_prob = 0.0;        // chance of losing any emitted radar point
};

/// Forward camera mounted on the ego vehicle.
struct CameraRig {
  CameraIntrinsics intrinsics{210.0, 210.0, 128.0, 96.0, 256, 192};
  Point3 position{0.0, 0.0, 1.3};  // ego frame [m]
  double yaw = 0.0;                // [rad]

  RigidTransform extrinsics() const { return front_camera_pose(position, yaw); }
};

/// Complete description of a simulated encounter.
struct Scenario {
  std::string id = "custom";
  Point2 ego_origin;  // radar origin O
  std::vector<AlignedBox> vehicles;
  std::vector<PedTrajectory> pedestrians;
  CameraRig camera;
  double frame_rate = 15.0;  // [Hz]
  double duration = 7.0;     // [s]
  NoiseSpec noise;
  std::uint64_t seed = 1;

  // Emission model.
  int returns_per_path = 6;       // radar returns per resolved propagation path
  double static_spacing = 0.25;   // sampling pitch along visible vehicle edges [m]
  bool dense_reference = false;   // quadruple the static sampling density
  double vehicle_height = 1.5;    // extruded box height for rendering [m]
  double ped_height = 1.7;        // pedestrian render height [m]
  double ped_radius = 0.25;       // pedestrian footprint radius [m]
  bool peds_block_radar = true;   // pedestrians occlude radar propagation paths
  double static_speed_threshold = 0.05;  // below this a pedestrian reads as static [m/s]

  int frame_count() const { return static_cast<int>(std::floor(duration * frame_rate)) + 1; }
  double frame_time(int index) const { return index / frame_rate; }
  double effective_spacing() const { return dense_reference ? static_spacing / 4.0 : static_spacing; }
};

namespace detail {

inline bool segment_crosses_box(const Point2& a, const Point2& b, const AlignedBox& box) {
  // Slab clip of the closed segment against the box.
  double t0 = 0.0, t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double lo[2] = {box.x_min(), box.y_min()};
  const double hi[2] = {box.x_max(), box.y_max()};
  const double p[2] = {a.x, a.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) {
      if (p[axis] < lo[axis] || p[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - p[axis]) / d[axis];
    double tb = (hi[axis] - p[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace detail

/// Structural validation of a scenario before it is simulated or persisted.
inline void validate_scenario(const Scenario& s) {
  if (s.frame_rate <= 0.0 || !std::isfinite(s.frame_rate))
    throw ValidationError("scenario: frame_rate must be positive");
  if (s.duration < 0.0 || !std::isfinite(s.duration))
    throw ValidationError("scenario: duration must be non-negative");
  if (s.camera.intrinsics.width <= 0 || s.camera.intrinsics.fx <= 0.0)
    throw ValidationError("scenario: camera intrinsics missing or invalid");
  const NoiseSpec& n = s.noise;
  if (n.range_sigma < 0 || n.angle_sigma_deg < 0 || n.depth_sigma_rel < 0 ||
      n.static_clutter_rate < 0 || n.dynamic_clutter_rate < 0)
    throw ValidationError("scenario: noise parameters must be non-negative");
  if (n.dropout_prob < 0.0 || n.dropout_prob > 1.0)
    throw ValidationError("scenario: dropout_prob must lie in [0,1]");
  if (s.returns_per_path < 1) throw ValidationError("scenario: returns_per_path must be >= 1");
  if (s.static_spacing <= 0.0) throw ValidationError("scenario: static_spacing must be positive");
  if (s.vehicle_height <= 0.0 || s.ped_height <= 0.0 || s.ped_radius <= 0.0)
    throw ValidationError("scenario: render extents must be positive");

  for (std::size_t i = 0; i < s.vehicles.size(); ++i)
    for (std::size_t j = i + 1; j < s.vehicles.size(); ++j) {
      const AlignedBox& a = s.vehicles[i];
      const AlignedBox& b = s.vehicles[j];
      const bool overlap = a.x_min() < b.x_max() - 1e-12 && b.x_min() < a.x_max() - 1e-12 &&
                           a.y_min() < b.y_max() - 1e-12 && b.y_min() < a.y_max() - 1e-12;
      if (overlap) throw ValidationError("scenario: vehicle boxes overlap");
    }

  for (const auto& ped : s.pedestrians) {
    if (ped.waypoints.empty()) throw ValidationError("scenario: pedestrian without waypoints");
    for (std::size_t i = 1; i < ped.waypoints.size(); ++i)
      if (ped.waypoints[i].t < ped.waypoints[i - 1].t - 1e-12)
        throw ValidationError("scenario: pedestrian waypoints not time-ordered");
    for (const auto& v : s.vehicles) {
      for (const auto& w : ped.waypoints)
        if (v.contains(w.pos)) throw ValidationError("scenario: pedestrian waypoint inside a vehicle");
      for (std::size_t i = 1; i < ped.waypoints.size(); ++i)
        if (detail::segment_crosses_box(ped.waypoints[i - 1].pos, ped.waypoints[i].pos, v))
          throw ValidationError("scenario: pedestrian path crosses a vehicle");
    }
  }
}

/// Geometry knobs of the built-in encounter templates.
struct BuiltinParams {
  double gap = 1.2;         // opening between the parked vehicles [m]
  double stagger = 1.0;     // how far the far vehicle protrudes toward the road [m]
  double near_x = 4.0;      // nose of the near parked vehicle [m]
  double near_road_y = 2.2; // road-side face of the near parked vehicle [m]
  double ped_speed = 0.9;   // darting pedestrian speed [m/s]
  double frame_rate = 15.0;
};

namespace detail {

inline constexpr double kVehicleWidth = 1.8;
inline constexpr double kVehicleLength = 4.5;

inline PedTrajectory path_at_speed(double start_t, double speed,
                                   std::initializer_list<Point2> pts) {
  PedTrajectory traj;
  double t = start_t;
  Point2 prev;
  bool first = true;
  for (const Point2& p : pts) {
    if (!first) t += distance(prev, p) / speed;
    traj.waypoints.push_back({t, p});
    prev = p;
    first = false;
  }
  return traj;
}

}  // namespace detail

/// Built-in templates. "SA": one pedestrian darts out of the gap between two
/// parked vehicles. "SB": two pedestrians cross the same gap one after the
/// other. "SC": the darting pedestrian is joined by a second one already in
/// the open, walking toward the ego vehicle and briefly standing near the gap.
inline Scenario builtin_scenario(const std::string& name, const BuiltinParams& p = {},
                                 const NoiseSpec& noise = {}, std::uint64_t seed = 1) {
  using detail::kVehicleLength;
  using detail::kVehicleWidth;
  Scenario s;
  s.id = name;
  s.noise = noise;
  s.seed = seed;
  s.frame_rate = p.frame_rate;

  const double far_x = p.near_x + kVehicleWidth + p.gap;
  const double far_road_y = p.near_road_y - p.stagger;
  const AlignedBox near_vehicle{{p.near_x + kVehicleWidth / 2, p.near_road_y + kVehicleLength / 2},
                                kVehicleWidth, kVehicleLength};
  const AlignedBox far_vehicle{{far_x + kVehicleWidth / 2, far_road_y + kVehicleLength / 2},
                               kVehicleWidth, kVehicleLength};
  s.vehicles = {far_vehicle, near_vehicle};  // primary reflector first

  const double cross_x = p.near_x + kVehicleWidth + p.gap / 2.0;
  const Point2 emerge_top{cross_x, 4.8};
  const Point2 emerge_bot{cross_x, 0.8};

  if (name == "SA") {
    s.duration = 7.0;
    s.pedestrians = {detail::path_at_speed(0.8, p.ped_speed, {emerge_top, emerge_bot})};
  } else if (name == "SB") {
    s.duration = 8.5;
    s.pedestrians = {
        detail::path_at_speed(0.5, p.ped_speed, {emerge_top, emerge_bot, Point2{1.5, 0.8}}),
        detail::path_at_speed(3.2, p.ped_speed, {emerge_top, emerge_bot})};
  } else if (name == "SC") {
    s.duration = 7.0;
    PedTrajectory walker;
    walker.waypoints = {{0.0, {9.5, 0.6}}, {2.7, {6.8, 0.6}}, {4.2, {6.8, 0.6}}, {9.8, {1.2, 0.6}}};
    s.pedestrians = {walker, detail::path_at_speed(0.6, p.ped_speed, {emerge_top, emerge_bot})};
  } else {
    throw ConfigError("builtin_scenario: unknown template '" + name + "'");
  }

  validate_scenario(s);
  return s;
}

inline std::vector<Scenario> builtin_scenarios() {
  return {builtin_scenario("SA"), builtin_scenario("SB"), builtin_scenario("SC")};
}

}  // namespace nlos::sim
