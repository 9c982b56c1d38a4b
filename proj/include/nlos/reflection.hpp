#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "nlos/types.hpp"

namespace nlos {

/// Mirror image of p across the infinite line through the segment:
/// the foot of the perpendicular f satisfies p' = 2f - p.
inline Point2 mirror_point(const Point2& p, const LineSeg& line) {
  const Point2 d = line.direction();
  const Point2 ap = p - line.a;
  const double along = dot(ap, d);
  const Point2 foot = line.a + d * along;
  return foot * 2.0 - p;
}

/// Mirror image across the line y = alpha * x + beta. Equals mirror_point on
/// any segment of that line; vertical lines have no such form.
inline Point2 mirror_point_slope_intercept(const Point2& p, double alpha, double beta) {
  const double denom = alpha * alpha + 1.0;
  const double rx = (2.0 * p.x + 2.0 * alpha * (p.y - beta)) / denom - p.x;
  const double ry = alpha * (rx + p.x) + 2.0 * beta - p.y;
  return {rx, ry};
}

/// First structure intersection along the segment from origin to target.
struct Hit {
  Point2 q;
  int box_index = -1;
  int edge_index = -1;  // into box_edges order
  double t = 0.0;       // parameter along origin->target, in (0, 1]
};

/// Walks the open segment (origin, target] and returns the earliest edge
/// crossing. Hits within hit_eps of the origin are ignored so a ray can leave
/// a surface it starts on. Corner ties resolve to the lowest (box, edge) index.
inline std::optional<Hit> first_hit(const Point2& origin, const Point2& target,
                                    std::span<const AlignedBox> structures,
                                    double hit_eps = 1e-9) {
  const Point2 dir = target - origin;
  const double seg_len = dir.norm();
  if (seg_len <= hit_eps) return std::nullopt;

  std::optional<Hit> best;
  for (int bi = 0; bi < static_cast<int>(structures.size()); ++bi) {
    const auto edges = box_edges(structures[bi]);
    for (int ei = 0; ei < 4; ++ei) {
      const LineSeg& e = edges[ei];
      const Point2 ed = e.b - e.a;
      const double denom = dir.x * ed.y - dir.y * ed.x;
      if (std::abs(denom) < 1e-15) continue;  // parallel or collinear: no crossing
      const Point2 w = e.a - origin;
      const double t = (w.x * ed.y - w.y * ed.x) / denom;
      const double s = (w.x * dir.y - w.y * dir.x) / denom;
      if (s < -1e-12 || s > 1.0 + 1e-12) continue;
      if (t > 1.0 + 1e-12) continue;
      if (t * seg_len <= hit_eps) continue;
      const double tc = std::min(t, 1.0);
      if (!best || tc < best->t - 1e-15 ||
          (std::abs(tc - best->t) <= 1e-15 &&
           (bi < best->box_index || (bi == best->box_index && ei < best->edge_index)))) {
        best = Hit{origin + dir * tc, bi, ei, tc};
      }
    }
  }
  return best;
}

/// One mirror event along an unfolded propagation path.
struct Bounce {
  Point2 q;  // surface intersection
  int box_index = -1;
  int edge_index = -1;
};

/// Result of unfolding one dynamic radar return against the vehicle layout.
struct ReflectionTrace {
  Point2 input;
  Point2 corrected;
  std::vector<Bounce> bounces;
  bool truncated = false;  // bounce budget exhausted with a surface still ahead

  bool reflected() const { return !bounces.empty(); }
};

/// Folds an apparent radar return back through successive mirror reflections.
/// Each step finds the first structure edge between the current virtual origin
/// and the point, mirrors the point across that edge line, and continues from
/// the intersection. A point with a clear line of sight comes back unchanged.
inline ReflectionTrace unfold(const Point2& dynamic_point, const Point2& origin,
                              std::span<const AlignedBox> structures, int max_bounces = 3,
                              double hit_eps = 1e-9) {
  if (max_bounces < 1) throw ConfigError("unfold: max_bounces must be at least 1");
  ReflectionTrace trace;
  trace.input = dynamic_point;

  Point2 o = origin;
  Point2 p = dynamic_point;
  for (int i = 0; i < max_bounces; ++i) {
    const auto hit = first_hit(o, p, structures, hit_eps);
    if (!hit) break;
    const LineSeg edge = box_edges(structures[hit->box_index])[hit->edge_index];
    p = mirror_point(p, edge);
    trace.bounces.push_back({hit->q, hit->box_index, hit->edge_index});
    o = hit->q;
  }
  trace.truncated = first_hit(o, p, structures, hit_eps).has_value();
  trace.corrected = p;
  return trace;
}

}  // namespace nlos
