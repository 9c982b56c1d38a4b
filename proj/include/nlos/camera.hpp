#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "nlos/types.hpp"

namespace nlos {

/// Camera-frame point retained together with the pixel it came from.
struct DepthPoint {
  int u = 0;
  int v = 0;
  Point3 p;
};

using PixelSet = std::vector<std::pair<int, int>>;

/// Pixels where the mask is nonzero, in row-major scan order. A stride above 1
/// keeps every stride-th row and column.
inline PixelSet vehicle_pixels(const SegMask& mask, int stride = 1) {
  if (stride < 1) throw ConfigError("vehicle_pixels: stride must be >= 1");
  PixelSet out;
  for (int v = 0; v < mask.height; v += stride)
    for (int u = 0; u < mask.width; u += stride)
      if (mask.at(u, v) != 0) out.emplace_back(u, v);
  return out;
}

/// Back-projects valid-depth pixels through the pinhole model. With no pixel
/// selection, every valid pixel is used in row-major order. Pixels with
/// depth <= 0 are skipped.
inline std::vector<DepthPoint> unproject(const DepthGrid& depth, const CameraIntrinsics& k,
                                         const PixelSet* pixels = nullptr) {
  if (depth.width != k.width || depth.height != k.height)
    throw ConfigError("unproject: depth grid does not match intrinsics");
  std::vector<DepthPoint> out;
  auto emit = [&](int u, int v) {
    const double d = depth.at(u, v);
    if (d <= 0.0) return;
    out.push_back({u, v, Point3{d * (u - k.cx) / k.fx, d * (v - k.cy) / k.fy, d}});
  };
  if (pixels == nullptr) {
    for (int v = 0; v < depth.height; ++v)
      for (int u = 0; u < depth.width; ++u) emit(u, v);
  } else {
    for (const auto& [u, v] : *pixels) {
      if (u < 0 || u >= depth.width || v < 0 || v >= depth.height)
        throw ConfigError("unproject: pixel outside image bounds");
      emit(u, v);
    }
  }
  return out;
}

/// Forward pinhole projection; returns continuous pixel coordinates and depth.
inline Point3 project(const Point3& cam_point, const CameraIntrinsics& k) {
  if (cam_point.z <= 0.0) throw std::invalid_argument("project: point behind camera");
  return {k.fx * cam_point.x / cam_point.z + k.cx, k.fy * cam_point.y / cam_point.z + k.cy,
          cam_point.z};
}

/// Height interval for keeping unprojected points, expressed in the ego frame. [m]
struct HeightBand {
  double low = 0.2;
  double high = 2.2;
};

/// Vehicle point cloud on the ground plane: masked pixels are unprojected,
/// mapped into the ego frame, filtered to the height band, and flattened.
///
/// Each pixel's depth is replaced by the median depth of its image column
/// (over all masked rows) before unprojection. Vertical planar surfaces have
/// row-constant depth per column, so this is value-preserving on clean input
/// while suppressing per-pixel range noise by roughly the square root of the
/// column height. Assumes one surface per masked column.
inline std::vector<Point2> vehicle_depth_cloud(const DepthGrid& depth, const SegMask& mask,
                                               const CameraIntrinsics& k,
                                               const RigidTransform& extrinsics,
                                               const HeightBand& band = {}, int stride = 1) {
  if (mask.width != depth.width || mask.height != depth.height)
    throw ConfigError("vehicle_depth_cloud: mask does not match depth grid");
  if (depth.width != k.width || depth.height != k.height)
    throw ConfigError("vehicle_depth_cloud: depth grid does not match intrinsics");
  if (stride < 1) throw ConfigError("vehicle_depth_cloud: stride must be >= 1");

  const RigidTransform ego_from_cam = extrinsics.inverse();
  std::vector<Point2> out;
  std::vector<double> column;
  for (int u = 0; u < depth.width; u += stride) {
    column.clear();
    for (int v = 0; v < depth.height; ++v)
      if (mask.at(u, v) != 0 && depth.valid_at(u, v)) column.push_back(depth.at(u, v));
    if (column.empty()) continue;
    const auto mid = column.begin() + static_cast<std::ptrdiff_t>(column.size() / 2);
    std::nth_element(column.begin(), mid, column.end());
    const double d = *mid;
    for (int v = 0; v < depth.height; v += stride) {
      if (mask.at(u, v) == 0 || !depth.valid_at(u, v)) continue;
      const Point3 cam{d * (u - k.cx) / k.fx, d * (v - k.cy) / k.fy, d};
      const Point3 ego = ego_from_cam.apply(cam);
      if (ego.z < band.low || ego.z > band.high) continue;
      out.push_back(ground_point(ego));
    }
  }
  return out;
}

}  // namespace nlos
