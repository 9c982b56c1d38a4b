#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "nlos/types.hpp"

namespace nlos {

/// DBSCAN output. labels[i] is the cluster index of point i or kNoise.
/// clusters[c] lists member indices in ascending order.
struct ClusterResult {
  static constexpr int kNoise = -1;
  std::vector<int> labels;
  std::vector<std::vector<int>> clusters;
};

namespace detail {

/// Uniform grid with eps-sized cells; neighbor queries scan the 3x3 block.
class EpsGrid {
 public:
  EpsGrid(std::span<const Point2> pts, double eps) : pts_(pts), eps_(eps) {
    cells_.reserve(pts.size());
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      cells_[key(cell_of(pts[i].x), cell_of(pts[i].y))].push_back(i);
  }

  /// Indices within eps of pts[i] (inclusive distance, self included), ascending.
  std::vector<int> neighbors(int i) const {
    std::vector<int> out;
    const Point2& p = pts_[i];
    const std::int64_t cx = cell_of(p.x), cy = cell_of(p.y);
    for (std::int64_t gx = cx - 1; gx <= cx + 1; ++gx)
      for (std::int64_t gy = cy - 1; gy <= cy + 1; ++gy) {
        const auto it = cells_.find(key(gx, gy));
        if (it == cells_.end()) continue;
        for (int j : it->second)
          if (distance(p, pts_[j]) <= eps_) out.push_back(j);
      }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / eps_)); }
  static std::uint64_t key(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(x) << 32) ^ (static_cast<std::uint64_t>(y) & 0xffffffffu);
  }

  std::span<const Point2> pts_;
  double eps_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace detail

/// Density clustering. A point is core when it has >= min_pts neighbors within
/// eps, counting itself; clusters grow from core points in index order, so
/// border points join the first core cluster that reaches them.
inline ClusterResult dbscan(std::span<const Point2> points, double eps, int min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("dbscan: eps must be positive");
  if (min_pts < 1) throw ConfigError("dbscan: min_pts must be at least 1");

  const int n = static_cast<int>(points.size());
  ClusterResult result;
  result.labels.assign(n, ClusterResult::kNoise);
  if (n == 0) return result;

  const detail::EpsGrid grid(points, eps);
  std::vector<std::int8_t> visited(n, 0);

  for (int i = 0; i < n; ++i) {
    if (visited[i]) continue;
    visited[i] = 1;
    const std::vector<int> seed = grid.neighbors(i);
    if (static_cast<int>(seed.size()) < min_pts) continue;  // noise unless reached later

    const int cluster_id = static_cast<int>(result.clusters.size());
    result.clusters.emplace_back();
    result.labels[i] = cluster_id;
    std::vector<int> queue(seed.begin(), seed.end());
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int j = queue[qi];
      if (result.labels[j] == ClusterResult::kNoise) result.labels[j] = cluster_id;
      if (visited[j]) continue;
      visited[j] = 1;
      const std::vector<int> nb = grid.neighbors(j);
      if (static_cast<int>(nb.size()) >= min_pts)
        queue.insert(queue.end(), nb.begin(), nb.end());
    }
  }

  for (int i = 0; i < n; ++i)
    if (result.labels[i] >= 0) result.clusters[result.labels[i]].push_back(i);
  return result;
}

/// Arithmetic mean of a point set.
inline Point2 centroid(std::span<const Point2> points) {
  if (points.empty()) throw std::invalid_argument("centroid: empty point set");
  double sx = 0.0, sy = 0.0;
  for (const auto& p : points) {
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(points.size());
  return {sx / n, sy / n};
}

/// Mean of the subset selected by indices.
inline Point2 centroid_of(std::span<const Point2> points, std::span<const int> indices) {
  if (indices.empty()) throw std::invalid_argument("centroid_of: empty index set");
  double sx = 0.0, sy = 0.0;
  for (int i : indices) {
    sx += points[i].x;
    sy += points[i].y;
  }
  const double n = static_cast<double>(indices.size());
  return {sx / n, sy / n};
}

}  // namespace nlos
