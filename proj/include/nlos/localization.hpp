#pragma once

#include <algorithm>
#include <span>
#include <tuple>
#include <vector>

#include "nlos/config.hpp"
#include "nlos/dbscan.hpp"
#include "nlos/reflection.hpp"
#include "nlos/types.hpp"

namespace nlos {

/// One localized moving target.
struct TargetEstimate {
  Point2 position;         // cluster centroid after unfolding
  int support = 0;         // traces in the cluster
  int direct_count = 0;    // traces that came back without a bounce
  int reflected_count = 0; // traces with at least one bounce
  int cluster_id = -1;
};

/// Localizes moving targets from one frame of dynamic radar returns.
/// Every return is unfolded against the vehicle layout; truncated traces are
/// discarded; the corrected points are density-clustered; clusters hugging a
/// structure or containing no reflected trace are rejected as ghosts.
/// Estimates come back ordered by support, largest first.
inline std::vector<TargetEstimate> localize(std::span<const Point2> dynamic_points,
                                            const Point2& origin,
                                            std::span<const AlignedBox> structures,
                                            const PipelineConfig& cfg = {}) {
  cfg.validate();

  std::vector<ReflectionTrace> traces;
  traces.reserve(dynamic_points.size());
  for (const auto& p : dynamic_points) {
    ReflectionTrace t = unfold(p, origin, structures, cfg.max_bounces, cfg.hit_eps);
    if (t.truncated) continue;
    traces.push_back(std::move(t));
  }
  if (traces.empty()) return {};

  std::vector<Point2> corrected;
  corrected.reserve(traces.size());
  for (const auto& t : traces) corrected.push_back(t.corrected);
  const ClusterResult clusters = dbscan(corrected, cfg.target_eps, cfg.target_min_pts);

  std::vector<TargetEstimate> out;
  for (int c = 0; c < static_cast<int>(clusters.clusters.size()); ++c) {
    const auto& idx = clusters.clusters[c];
    TargetEstimate est;
    est.cluster_id = c;
    est.support = static_cast<int>(idx.size());
    est.position = centroid_of(corrected, idx);
    for (int i : idx)
      (traces[i].reflected() ? est.reflected_count : est.direct_count) += 1;

    if (est.reflected_count == 0) continue;  // direct-only: ghost
    bool near_structure = false;
    for (const auto& b : structures)
      if (b.distance_to(est.position) <= cfg.structure_margin) near_structure = true;
    if (near_structure) continue;

    out.push_back(est);
  }

  std::sort(out.begin(), out.end(), [](const TargetEstimate& a, const TargetEstimate& b) {
    return std::tie(b.support, a.position.x, a.position.y) <
           std::tie(a.support, b.position.x, b.position.y);
  });
  return out;
}

/// Square footprint centered on a target estimate, for overlap scoring.
inline AlignedBox pedestrian_box(const Point2& center, double size = 1.7) {
  return {center, size, size};
}

}  // namespace nlos
