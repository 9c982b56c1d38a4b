#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "nlos/reflection.hpp"
#include "nlos/scenario.hpp"
#include "nlos/types.hpp"

namespace nlos::sim {

/// Deterministic random source. Gaussian and Poisson draws are hand-rolled on
/// top of the engine's uniform output so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return (eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

 private:
  std::mt19937_64 eng_;
};

/// Splitmix-style mixing for independent per-frame, per-subsystem substreams.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t frame, std::uint64_t channel) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (frame + 1) + 0x94d049bb133111ebull * (channel + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

enum class Visibility : std::uint8_t { NLoS, Partial, Full };

/// Ground-truth pedestrian record for one frame.
struct PedSnapshot {
  Point2 pos;
  double speed = 0.0;
  Visibility vis = Visibility::NLoS;
};

enum class PointKind : std::uint8_t { Reflector, StaticClutter, Target, DynamicClutter };

/// Provenance of one emitted radar point, keyed by its id within the frame.
struct PointLabel {
  int id = 0;
  PointKind kind = PointKind::Reflector;
  int ped = -1;          // pedestrian index for Target points
  bool reflected = false;  // true when the point is a mirrored apparent position
};

struct FrameTruth {
  double t = 0.0;
  std::vector<PedSnapshot> peds;
  std::vector<PointLabel> labels;
};

struct SimFrame {
  RadarFrame radar;
  DepthGrid depth;
  SegMask mask;
  FrameTruth truth;
};

namespace detail {

/// True when the open interior of segment a->b passes through any box.
/// The first end_shrink fraction at each end is exempt, so segments may start
/// or finish on a box surface.
inline bool segment_blocked_by_boxes(const Point2& a, const Point2& b,
                                     std::span<const AlignedBox> boxes,
                                     double end_shrink = 1e-6) {
  const double d[2] = {b.x - a.x, b.y - a.y};
  for (const auto& box : boxes) {
    double t0 = end_shrink, t1 = 1.0 - end_shrink;
    const double lo[2] = {box.x_min(), box.y_min()};
    const double hi[2] = {box.x_max(), box.y_max()};
    const double p[2] = {a.x, a.y};
    bool miss = false;
    for (int axis = 0; axis < 2 && !miss; ++axis) {
      if (std::abs(d[axis]) < 1e-15) {
        if (p[axis] < lo[axis] || p[axis] > hi[axis]) miss = true;
        continue;
      }
      double ta = (lo[axis] - p[axis]) / d[axis];
      double tb = (hi[axis] - p[axis]) / d[axis];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) miss = true;
    }
    if (!miss && t1 - t0 > 1e-12) return true;
  }
  return false;
}

inline bool segment_hits_disc(const Point2& a, const Point2& b, const Point2& c, double r) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 < 1e-24) return distance(a, c) < r;
  const double t = std::clamp(dot(c - a, ab) / len2, 0.0, 1.0);
  return distance(a + ab * t, c) < r;
}

/// True when any pedestrian disc other than exempt_ped obstructs a->b.
inline bool segment_blocked_by_peds(const Point2& a, const Point2& b,
                                    std::span<const PedSnapshot> peds, double radius,
                                    int exempt_ped) {
  for (int i = 0; i < static_cast<int>(peds.size()); ++i) {
    if (i == exempt_ped) continue;
    if (segment_hits_disc(a, b, peds[i].pos, radius)) return true;
  }
  return false;
}

/// Applies polar range/bearing jitter about the radar origin.
inline Point2 jitter_polar(const Point2& p, const Point2& origin, const NoiseSpec& n, Rng& rng) {
  if (n.range_sigma <= 0.0 && n.angle_sigma_deg <= 0.0) return p;
  const Point2 rel = p - origin;
  const double r = std::max(0.0, rel.norm() + n.range_sigma * rng.normal());
  const double th = std::atan2(rel.y, rel.x) + n.angle_sigma_deg * kPi / 180.0 * rng.normal();
  return {origin.x + r * std::cos(th), origin.y + r * std::sin(th)};
}

struct Box3 {
  double lo[3];
  double hi[3];
  bool vehicle = false;
};

/// Nearest positive ray parameter against an extruded box, or +inf.
inline double ray_box3(const double o[3], const double d[3], const Box3& b) {
  double t0 = 1e-9, t1 = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(d[axis]) < 1e-15) {
      if (o[axis] < b.lo[axis] || o[axis] > b.hi[axis]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double ta = (b.lo[axis] - o[axis]) / d[axis];
    double tb = (b.hi[axis] - o[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

}  // namespace detail

/// Camera-side visibility of a pedestrian disc: Partial once any sample of the
/// disc has a clear in-field sight line from the camera, Full once all do.
/// Occlusion considers vehicle boxes only.
inline Visibility visibility_of(const Point2& ped, const Scenario& s) {
  const Point2 cam{s.camera.position.x, s.camera.position.y};
  const double half_fov = std::atan((s.camera.intrinsics.width / 2.0) / s.camera.intrinsics.fx);
  constexpr int kPerimeterSamples = 16;

  int visible = 0, total = 0;
  auto test = [&](const Point2& sample) {
    ++total;
    const Point2 rel = sample - cam;
    double bearing = std::atan2(rel.y, rel.x) - s.camera.yaw;
    while (bearing > kPi) bearing -= 2 * kPi;
    while (bearing < -kPi) bearing += 2 * kPi;
    if (std::abs(bearing) > half_fov) return;
    if (!detail::segment_blocked_by_boxes(cam, sample, s.vehicles)) ++visible;
  };

  test(ped);
  for (int i = 0; i < kPerimeterSamples; ++i) {
    const double a = 2 * kPi * i / kPerimeterSamples;
    test({ped.x + s.ped_radius * std::cos(a), ped.y + s.ped_radius * std::sin(a)});
  }
  if (visible == total) return Visibility::Full;
  if (visible > 0) return Visibility::Partial;
  return Visibility::NLoS;
}

namespace detail {

inline void emit_point(RadarFrame& frame, FrameTruth& truth, const Point2& p, Motion motion,
                       PointKind kind, int ped, bool reflected, const Scenario& s, Rng& rng) {
  if (s.noise.dropout_prob > 0.0 && rng.bernoulli(s.noise.dropout_prob)) return;
  const int id = static_cast<int>(frame.points.size());
  frame.points.push_back({p, motion, id});
  truth.labels.push_back({id, kind, ped, reflected});
}

inline void emit_static_returns(RadarFrame& frame, FrameTruth& truth, const Scenario& s,
                                std::span<const PedSnapshot> peds, Rng& rng) {
  const double spacing = s.effective_spacing();
  for (const auto& vehicle : s.vehicles) {
    const auto edges = box_edges(vehicle);
    for (const auto& edge : edges) {
      const double len = edge.length();
      const int n = std::max(1, static_cast<int>(std::floor(len / spacing)));
      const Point2 dir = edge.direction();
      for (int k = 0; k < n; ++k) {
        const double along = (k + 0.5) * spacing;
        if (along > len) break;
        const Point2 sample = edge.a + dir * along;
        if (segment_blocked_by_boxes(s.ego_origin, sample, s.vehicles)) continue;
        if (s.peds_block_radar &&
            segment_blocked_by_peds(s.ego_origin, sample, peds, s.ped_radius, -1))
          continue;
        emit_point(frame, truth, jitter_polar(sample, s.ego_origin, s.noise, rng), Motion::Static,
                   PointKind::Reflector, -1, false, s, rng);
      }
    }
  }
}

inline void emit_ped_returns(RadarFrame& frame, FrameTruth& truth, const Scenario& s,
                             std::span<const PedSnapshot> peds, Rng& rng) {
  for (int pi = 0; pi < static_cast<int>(peds.size()); ++pi) {
    const Point2 pos = peds[pi].pos;
    const Motion motion =
        peds[pi].speed < s.static_speed_threshold ? Motion::Static : Motion::Dynamic;

    const bool direct = !segment_blocked_by_boxes(s.ego_origin, pos, s.vehicles) &&
                        !(s.peds_block_radar &&
                          segment_blocked_by_peds(s.ego_origin, pos, peds, s.ped_radius, pi));
    if (direct) {
      for (int r = 0; r < s.returns_per_path; ++r)
        emit_point(frame, truth, jitter_polar(pos, s.ego_origin, s.noise, rng), motion,
                   PointKind::Target, pi, false, s, rng);
    }

    // Single-bounce mirror paths: origin -> edge -> pedestrian.
    for (int vi = 0; vi < static_cast<int>(s.vehicles.size()); ++vi) {
      const auto edges = box_edges(s.vehicles[vi]);
      for (int ei = 0; ei < 4; ++ei) {
        const Point2 image = mirror_point(pos, edges[ei]);
        const auto hit = first_hit(s.ego_origin, image, s.vehicles);
        if (!hit || hit->box_index != vi || hit->edge_index != ei) continue;
        if (segment_blocked_by_boxes(hit->q, pos, s.vehicles)) continue;
        if (s.peds_block_radar &&
            (segment_blocked_by_peds(s.ego_origin, hit->q, peds, s.ped_radius, pi) ||
             segment_blocked_by_peds(hit->q, pos, peds, s.ped_radius, pi)))
          continue;
        for (int r = 0; r < s.returns_per_path; ++r)
          emit_point(frame, truth, jitter_polar(image, s.ego_origin, s.noise, rng), motion,
                     PointKind::Target, pi, true, s, rng);
      }
    }
  }
}

inline AlignedBox clutter_region(const Scenario& s) {
  double x0 = s.ego_origin.x, x1 = s.ego_origin.x, y0 = s.ego_origin.y, y1 = s.ego_origin.y;
  auto grow = [&](double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const auto& v : s.vehicles) {
    grow(v.x_min(), v.y_min());
    grow(v.x_max(), v.y_max());
  }
  for (const auto& ped : s.pedestrians)
    for (const auto& w : ped.waypoints) grow(w.pos.x, w.pos.y);
  const double margin = 3.0;
  return {{(x0 + x1) / 2, (y0 + y1) / 2}, (x1 - x0) + 2 * margin, (y1 - y0) + 2 * margin};
}

inline void emit_clutter(RadarFrame& frame, FrameTruth& truth, const Scenario& s, Rng& rng) {
  const AlignedBox region = clutter_region(s);
  const int ns = rng.poisson(s.noise.static_clutter_rate);
  for (int i = 0; i < ns; ++i) {
    const Point2 p{rng.uniform(region.x_min(), region.x_max()),
                   rng.uniform(region.y_min(), region.y_max())};
    emit_point(frame, truth, p, Motion::Static, PointKind::StaticClutter, -1, false, s, rng);
  }
  const int nd = rng.poisson(s.noise.dynamic_clutter_rate);
  for (int i = 0; i < nd; ++i) {
    const Point2 p{rng.uniform(region.x_min(), region.x_max()),
                   rng.uniform(region.y_min(), region.y_max())};
    emit_point(frame, truth, p, Motion::Dynamic, PointKind::DynamicClutter, -1, false, s, rng);
  }
}

inline void render_views(DepthGrid& depth, SegMask& mask, const Scenario& s,
                         std::span<const PedSnapshot> peds, Rng& rng) {
  std::vector<Box3> boxes;
  boxes.reserve(s.vehicles.size() + peds.size());
  for (const auto& v : s.vehicles)
    boxes.push_back({{v.x_min(), v.y_min(), 0.0}, {v.x_max(), v.y_max(), s.vehicle_height}, true});
  for (const auto& ped : peds)
    boxes.push_back({{ped.pos.x - s.ped_radius, ped.pos.y - s.ped_radius, 0.0},
                     {ped.pos.x + s.ped_radius, ped.pos.y + s.ped_radius, s.ped_height},
                     false});

  const CameraIntrinsics& k = s.camera.intrinsics;
  const RigidTransform ego_from_cam = s.camera.extrinsics().inverse();
  const Point3 cam_pos = ego_from_cam.apply({0, 0, 0});
  const double o[3] = {cam_pos.x, cam_pos.y, cam_pos.z};

  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Point3 dir_cam{(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
      const Point3 dir = ego_from_cam.rotate(dir_cam);
      const double d[3] = {dir.x, dir.y, dir.z};
      double best = std::numeric_limits<double>::infinity();
      bool vehicle = false;
      for (const auto& b : boxes) {
        const double t = ray_box3(o, d, b);
        if (t < best) {
          best = t;
          vehicle = b.vehicle;
        }
      }
      if (!std::isfinite(best)) continue;
      double z = best;
      if (s.noise.depth_sigma_rel > 0.0)
        z = std::max(1e-3, z * (1.0 + s.noise.depth_sigma_rel * rng.normal()));
      depth.at(u, v) = z;
      mask.at(u, v) = vehicle ? 1 : 0;
    }
  }
}

}  // namespace detail

/// Produces one fully-populated simulated frame. Deterministic: the stream of
/// random draws is a pure function of (seed, frame index, subsystem).
inline SimFrame generate_frame(const Scenario& s, int frame_index) {
  const double t = s.frame_time(frame_index);

  SimFrame out;
  out.radar.timestamp = t;
  out.truth.t = t;
  out.depth = DepthGrid(s.camera.intrinsics.width, s.camera.intrinsics.height);
  out.mask = SegMask(s.camera.intrinsics.width, s.camera.intrinsics.height);

  for (const auto& ped : s.pedestrians) {
    PedSnapshot snap;
    snap.pos = ped.position_at(t);
    snap.speed = ped.speed_at(t);
    snap.vis = visibility_of(snap.pos, s);
    out.truth.peds.push_back(snap);
  }

  Rng rng_static(substream(s.seed, frame_index, 0));
  Rng rng_dynamic(substream(s.seed, frame_index, 1));
  Rng rng_clutter(substream(s.seed, frame_index, 2));
  Rng rng_depth(substream(s.seed, frame_index, 3));

  detail::emit_static_returns(out.radar, out.truth, s, out.truth.peds, rng_static);
  detail::emit_ped_returns(out.radar, out.truth, s, out.truth.peds, rng_dynamic);
  detail::emit_clutter(out.radar, out.truth, s, rng_clutter);
  detail::render_views(out.depth, out.mask, s, out.truth.peds, rng_depth);
  return out;
}

/// Convenience for tests and small scenes; large runs should stream frames.
inline std::vector<SimFrame> simulate_all(const Scenario& s) {
  std::vector<SimFrame> frames;
  frames.reserve(s.frame_count());
  for (int i = 0; i < s.frame_count(); ++i) frames.push_back(generate_frame(s, i));
  return frames;
}

}  // namespace nlos::sim
