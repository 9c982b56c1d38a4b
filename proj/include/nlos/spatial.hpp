#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <tuple>
#include <vector>

#include "nlos/camera.hpp"
#include "nlos/config.hpp"
#include "nlos/dbscan.hpp"
#include "nlos/types.hpp"

namespace nlos {

class InsufficientPointsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SurfaceOrientation : std::uint8_t {
  HasHorizontal,  // some fitted line flatter than 45 degrees: facing surface seen
  VerticalOnly,   // only steep lines: side surface seen
};

/// Line fitted to one half of a footprint cluster.
struct FittedSegment {
  Point2 start;
  Point2 end;
  double theta_deg = 0.0;  // |slope angle|; 90 for vertical fits
  bool vertical = false;
};

struct SurfaceEstimate {
  std::vector<FittedSegment> segments;  // one or two entries
  SurfaceOrientation orientation = SurfaceOrientation::VerticalOnly;
};

namespace detail {

/// Least-squares y-on-x fit over a group, or a vertical segment when the
/// x spread is too small to regress on.
inline FittedSegment fit_group(std::span<const Point2> pts) {
  double x_lo = pts[0].x, x_hi = pts[0].x, y_lo = pts[0].y, y_hi = pts[0].y;
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(pts.size());
  const double mx = sx / n, my = sy / n;

  FittedSegment seg;
  if (x_hi - x_lo <= 1e-6) {
    seg.vertical = true;
    seg.theta_deg = 90.0;
    seg.start = {mx, y_lo};
    seg.end = {mx, std::max(y_hi, y_lo + 1e-9)};
    return seg;
  }
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  seg.theta_deg = std::abs(std::atan(slope)) * 180.0 / kPi;
  seg.start = {x_lo, slope * x_lo + intercept};
  seg.end = {x_hi, slope * x_hi + intercept};
  return seg;
}

}  // namespace detail

/// Splits a footprint cluster at the median y and fits a line to each half.
/// A fit flatter than 45 degrees indicates the surface facing the sensor,
/// which drives how the footprint anchor is chosen downstream.
inline SurfaceEstimate classify_surfaces(std::span<const Point2> cluster) {
  if (cluster.size() < 4)
    throw InsufficientPointsError("classify_surfaces: need at least 4 points");

  std::vector<double> ys;
  ys.reserve(cluster.size());
  for (const auto& p : cluster) ys.push_back(p.y);
  std::sort(ys.begin(), ys.end());
  const std::size_t n = ys.size();
  const double median =
      (n % 2 == 1) ? ys[n / 2] : 0.5 * (ys[n / 2 - 1] + ys[n / 2]);

  std::vector<Point2> low, high;
  for (const auto& p : cluster)
    (p.y <= median ? low : high).push_back(p);

  SurfaceEstimate est;
  for (const auto* group : {&low, &high}) {
    if (group->size() < 2) continue;
    est.segments.push_back(detail::fit_group(*group));
  }
  bool has_horizontal = false;
  for (const auto& s : est.segments)
    if (!s.vertical && s.theta_deg < 45.0) has_horizontal = true;
  est.orientation =
      has_horizontal ? SurfaceOrientation::HasHorizontal : SurfaceOrientation::VerticalOnly;
  return est;
}

/// Axis-aligned extents of a point set.
struct ClusterExtents {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

inline ClusterExtents extents_of(std::span<const Point2> pts) {
  if (pts.empty()) throw std::invalid_argument("extents_of: empty point set");
  ClusterExtents e{pts[0].x, pts[0].x, pts[0].y, pts[0].y};
  for (const auto& p : pts) {
    e.x_min = std::min(e.x_min, p.x);
    e.x_max = std::max(e.x_max, p.x);
    e.y_min = std::min(e.y_min, p.y);
    e.y_max = std::max(e.y_max, p.y);
  }
  return e;
}

/// Rough footprint center from cluster extents and the footprint prior.
/// When the facing surface was seen, the near corner (x_min, y_min) anchors
/// the box; when only a side was seen, the box hangs from y_max instead.
inline Point2 rough_center(const ClusterExtents& e, SurfaceOrientation orientation, double width,
                           double length) {
  if (width <= 0 || length <= 0) throw ConfigError("rough_center: extents must be positive");
  if (orientation == SurfaceOrientation::HasHorizontal)
    return {e.x_min + width / 2.0, e.y_min + length / 2.0};
  return {e.x_min + width / 2.0, e.y_max - length / 2.0};
}

struct RefineParams {
  double tau = 0.15;   // edge-support distance [m]
  double delta = 0.5;  // search half-extent per axis [m]
  double step = 0.05;  // grid pitch [m]
};

struct RefineResult {
  AlignedBox box;
  int score = 0;
  bool low_confidence = false;  // no static points near the rough box
};

namespace detail {

inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  const Point2 c = a + ab * t;
  return distance(p, c);
}

inline int edge_support(const AlignedBox& box, std::span<const Point2> pts, double tau) {
  int score = 0;
  const auto edges = box_edges(box);
  for (const auto& p : pts) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& e : edges) d = std::min(d, point_segment_distance(p, e.a, e.b));
    if (d <= tau) ++score;
  }
  return score;
}

}  // namespace detail

/// Grid search around the rough footprint for the placement whose edges pick
/// up the most static radar support. Only static points inside the rough
/// window (center +- width, +- length) participate. Ties prefer the smallest
/// displacement, then the smaller |dx|, |dy|, then signed dx, dy.
inline RefineResult refine_box(const AlignedBox& rough, std::span<const Point2> static_points,
                               const RefineParams& params = {}) {
  if (params.tau <= 0 || params.step <= 0 || params.delta < 0)
    throw ConfigError("refine_box: parameters out of range");

  std::vector<Point2> near;
  for (const auto& p : static_points) {
    if (std::abs(p.x - rough.center.x) <= rough.width &&
        std::abs(p.y - rough.center.y) <= rough.length)
      near.push_back(p);
  }
  if (near.empty()) return {rough, 0, true};

  const int steps = static_cast<int>(std::floor(params.delta / params.step + 1e-9));
  struct Cand {
    int score;
    double disp2, adx, ady, dx, dy;
  };
  RefineResult best{rough, -1, false};
  Cand best_key{-1, 0, 0, 0, 0, 0};
  for (int i = -steps; i <= steps; ++i) {
    for (int j = -steps; j <= steps; ++j) {
      const double dx = i * params.step, dy = j * params.step;
      const AlignedBox cand{{rough.center.x + dx, rough.center.y + dy}, rough.width, rough.length};
      const Cand key{detail::edge_support(cand, near, params.tau), dx * dx + dy * dy,
                     std::abs(dx), std::abs(dy), dx, dy};
      const bool better =
          key.score > best_key.score ||
          (key.score == best_key.score &&
           std::tie(key.disp2, key.adx, key.ady, key.dx, key.dy) <
               std::tie(best_key.disp2, best_key.adx, best_key.ady, best_key.dx, best_key.dy));
      if (better) {
        best_key = key;
        best = {cand, key.score, false};
      }
    }
  }
  return best;
}

/// One persistent footprint track with its smoothing history.
struct TrackedVehicle {
  std::deque<Point2> center_history;  // most recent at the back, capped at the window
  AlignedBox smoothed;
  bool observed = false;  // matched in the latest update
};

/// Smoothed vehicle layout, frozen once a pedestrian has been detected.
struct SpatialState {
  std::vector<TrackedVehicle> tracks;
  bool fixed = false;

  /// Footprints available to the localizer this frame.
  std::vector<AlignedBox> boxes() const {
    std::vector<AlignedBox> out;
    for (const auto& t : tracks)
      if (t.observed || fixed) out.push_back(t.smoothed);
    return out;
  }
};

struct SmoothParams {
  int window = 5;
  double match_gate = 1.5;  // center association gate [m]
};

/// Folds this frame's footprint detections into the tracked layout: detections
/// match the nearest track center within the gate, matched tracks average the
/// last `window` centers, unmatched detections open new tracks, and unmatched
/// tracks sit out the frame until re-acquired. An empty detection list leaves
/// the previous layout in place. Once `pedestrian_detected` is seen the state
/// absorbs that update and then freezes for good.
inline void smooth_and_fix(SpatialState& state, std::span<const AlignedBox> new_boxes,
                           bool pedestrian_detected, const SmoothParams& params = {}) {
  if (params.window < 1 || params.match_gate <= 0)
    throw ConfigError("smooth_and_fix: parameters out of range");
  if (state.fixed) return;

  if (!new_boxes.empty()) {
    // Greedy nearest association between detections and existing tracks.
    struct Pair {
      double d;
      int box, track;
    };
    std::vector<Pair> pairs;
    for (int b = 0; b < static_cast<int>(new_boxes.size()); ++b)
      for (int t = 0; t < static_cast<int>(state.tracks.size()); ++t) {
        const double d = distance(new_boxes[b].center, state.tracks[t].smoothed.center);
        if (d <= params.match_gate) pairs.push_back({d, b, t});
      }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      return std::tie(a.d, a.box, a.track) < std::tie(b.d, b.box, b.track);
    });

    for (auto& t : state.tracks) t.observed = false;
    std::vector<std::int8_t> box_used(new_boxes.size(), 0);
    std::vector<int> assignment(new_boxes.size(), -1);
    for (const auto& pr : pairs) {
      if (box_used[pr.box] || state.tracks[pr.track].observed) continue;
      box_used[pr.box] = 1;
      state.tracks[pr.track].observed = true;
      assignment[pr.box] = pr.track;
    }

    for (int b = 0; b < static_cast<int>(new_boxes.size()); ++b) {
      if (assignment[b] < 0) {
        TrackedVehicle t;
        t.center_history.push_back(new_boxes[b].center);
        t.smoothed = new_boxes[b];
        t.observed = true;
        state.tracks.push_back(std::move(t));
        continue;
      }
      TrackedVehicle& t = state.tracks[assignment[b]];
      t.center_history.push_back(new_boxes[b].center);
      while (static_cast<int>(t.center_history.size()) > params.window)
        t.center_history.pop_front();
      double sx = 0.0, sy = 0.0;
      for (const auto& c : t.center_history) {
        sx += c.x;
        sy += c.y;
      }
      const double n = static_cast<double>(t.center_history.size());
      t.smoothed = {{sx / n, sy / n}, new_boxes[b].width, new_boxes[b].length};
    }
  }

  if (pedestrian_detected) state.fixed = true;
}

/// Per-frame diagnostics of the footprint inference stage.
struct SpatialDiagnostics {
  bool gap_frame = false;  // no usable clusters this frame
  int cluster_count = 0;
  int low_confidence_boxes = 0;
  std::vector<AlignedBox> raw_boxes;  // refined boxes before smoothing
};

/// Full per-frame footprint inference: camera cloud -> clusters -> surface
/// classification -> rough anchor -> radar refinement -> temporal smoothing.
/// Mutates `state`; returns diagnostics. Once the state is fixed the frame's
/// sensor data is left untouched.
inline SpatialDiagnostics infer_spatial(const DepthGrid& depth, const SegMask& mask,
                                        const CameraIntrinsics& k,
                                        const RigidTransform& extrinsics,
                                        std::span<const Point2> static_points, SpatialState& state,
                                        bool pedestrian_detected, const PipelineConfig& cfg) {
  SpatialDiagnostics diag;
  if (state.fixed) return diag;

  const std::vector<Point2> cloud =
      vehicle_depth_cloud(depth, mask, k, extrinsics, cfg.height_band, cfg.pixel_stride);
  std::vector<AlignedBox> boxes;
  if (!cloud.empty()) {
    const ClusterResult clusters = dbscan(cloud, cfg.vehicle_eps, cfg.vehicle_min_pts);
    for (const auto& idx : clusters.clusters) {
      if (idx.size() < 4) continue;
      std::vector<Point2> members;
      members.reserve(idx.size());
      for (int i : idx) members.push_back(cloud[i]);
      const SurfaceEstimate surf = classify_surfaces(members);
      const Point2 rc = rough_center(extents_of(members), surf.orientation, cfg.vehicle_width,
                                     cfg.vehicle_length);
      const AlignedBox rough{rc, cfg.vehicle_width, cfg.vehicle_length};
      const RefineResult refined =
          refine_box(rough, static_points, {cfg.refine_tau, cfg.refine_delta, cfg.refine_step});
      if (refined.low_confidence) ++diag.low_confidence_boxes;
      boxes.push_back(refined.box);
      ++diag.cluster_count;
    }
  }
  diag.gap_frame = boxes.empty();
  diag.raw_boxes = boxes;
  smooth_and_fix(state, boxes, pedestrian_detected, {cfg.smoothing_window, cfg.match_gate});
  return diag;
}

}  // namespace nlos
