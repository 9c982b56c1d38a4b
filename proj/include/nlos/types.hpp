#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlos {

inline constexpr double kPi = 3.14159265358979323846;

/// Scenario or sensor data violates a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter value is outside its admissible range.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or serialization failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline double checked_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite component");
  return v;
}
}  // namespace detail

/// Point on the ground plane. x is the ego-forward axis, y the ego-left axis. [m]
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2() = default;
  Point2(double x_, double y_)
      : x(detail::checked_finite(x_, "Point2")), y(detail::checked_finite(y_, "Point2")) {}

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point2& o) const = default;

  double norm() const { return std::hypot(x, y); }
};

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

/// Point in a 3D frame (camera or ego). [m]
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3() = default;
  Point3(double x_, double y_, double z_)
      : x(detail::checked_finite(x_, "Point3")),
        y(detail::checked_finite(y_, "Point3")),
        z(detail::checked_finite(z_, "Point3")) {}

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  bool operator==(const Point3& o) const = default;
};

/// Drops the height component of a point expressed in the ego frame.
inline Point2 ground_point(const Point3& p) { return {p.x, p.y}; }

enum class Motion : std::uint8_t { Static, Dynamic };

/// Single radar observation projected onto the ground plane.
struct RadarPoint {
  Point2 position;
  Motion motion = Motion::Static;
  int id = 0;
};

/// One radar sweep. Points keep their emission order; ids are unique per frame.
struct RadarFrame {
  double timestamp = 0.0;  // [s]
  std::vector<RadarPoint> points;

  std::vector<Point2> static_points() const {
    std::vector<Point2> out;
    for (const auto& p : points)
      if (p.motion == Motion::Static) out.push_back(p.position);
    return out;
  }

  std::vector<Point2> dynamic_points() const {
    std::vector<Point2> out;
    for (const auto& p : points)
      if (p.motion == Motion::Dynamic) out.push_back(p.position);
    return out;
  }
};

/// Non-degenerate ground-plane segment.
struct LineSeg {
  Point2 a;
  Point2 b;

  LineSeg(Point2 a_, Point2 b_) : a(a_), b(b_) {
    if (distance(a, b) <= 1e-9) throw std::invalid_argument("LineSeg: degenerate segment");
  }

  double length() const { return distance(a, b); }
  Point2 direction() const {
    const double len = length();
    return {(b.x - a.x) / len, (b.y - a.y) / len};
  }
  bool operator==(const LineSeg& o) const = default;
};

/// Axis-aligned vehicle footprint. width spans x, length spans y.
struct AlignedBox {
  Point2 center;
  double width = 0.0;   // x extent [m]
  double length = 0.0;  // y extent [m]

  AlignedBox() = default;
  AlignedBox(Point2 c, double w, double l) : center(c), width(w), length(l) {
    if (!std::isfinite(w) || !std::isfinite(l) || w <= 0.0 || l <= 0.0)
      throw std::invalid_argument("AlignedBox: extents must be positive and finite");
  }

  double x_min() const { return center.x - width / 2.0; }
  double x_max() const { return center.x + width / 2.0; }
  double y_min() const { return center.y - length / 2.0; }
  double y_max() const { return center.y + length / 2.0; }

  bool contains(const Point2& p) const {
    return p.x >= x_min() && p.x <= x_max() && p.y >= y_min() && p.y <= y_max();
  }

  /// Euclidean distance from p to the box; zero inside.
  double distance_to(const Point2& p) const {
    const double dx = std::max({x_min() - p.x, 0.0, p.x - x_max()});
    const double dy = std::max({y_min() - p.y, 0.0, p.y - y_max()});
    return std::hypot(dx, dy);
  }

  /// Corners in order: (x_min,y_min), (x_max,y_min), (x_max,y_max), (x_min,y_max).
  std::array<Point2, 4> corners() const {
    return {Point2{x_min(), y_min()}, Point2{x_max(), y_min()}, Point2{x_max(), y_max()},
            Point2{x_min(), y_max()}};
  }

  bool operator==(const AlignedBox& o) const = default;
};

/// Edges in a fixed order: 0 left (x_min), 1 right (x_max), 2 near (y_min), 3 far (y_max).
/// Endpoints run in ascending y for the vertical edges and ascending x for the others.
inline std::array<LineSeg, 4> box_edges(const AlignedBox& b) {
  return {LineSeg{{b.x_min(), b.y_min()}, {b.x_min(), b.y_max()}},
          LineSeg{{b.x_max(), b.y_min()}, {b.x_max(), b.y_max()}},
          LineSeg{{b.x_min(), b.y_min()}, {b.x_max(), b.y_min()}},
          LineSeg{{b.x_min(), b.y_max()}, {b.x_max(), b.y_max()}}};
}

/// Pinhole camera parameters. Pixel (u,v) indexes column u, row v.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    if (!(std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) && std::isfinite(cy)))
      throw std::invalid_argument("CameraIntrinsics: non-finite parameter");
    if (fx <= 0.0 || fy <= 0.0 || w <= 0 || h <= 0)
      throw std::invalid_argument("CameraIntrinsics: focal lengths and image size must be positive");
  }
};

/// Dense depth image. Values are metric depth along the optical axis; <= 0 marks
/// an invalid pixel. Row-major storage.
struct DepthGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  DepthGrid() = default;
  DepthGrid(int w, int h, double fill = 0.0) : width(w), height(h) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("DepthGrid: size must be positive");
    values.assign(static_cast<std::size_t>(w) * h, fill);
  }

  double at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  double& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  bool valid_at(int u, int v) const { return at(u, v) > 0.0; }
};

/// Binary vehicle segmentation mask, same layout as DepthGrid.
struct SegMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  SegMask() = default;
  SegMask(int w, int h, std::uint8_t fill = 0) : width(w), height(h) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("SegMask: size must be positive");
    values.assign(static_cast<std::size_t>(w) * h, fill);
  }

  std::uint8_t at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  std::uint8_t& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
};

/// Rigid map from the ego frame to the camera frame: p_cam = R * p_ego + t.
struct RigidTransform {
  std::array<double, 9> rot = {1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  Point3 trans;

  Point3 rotate(const Point3& p) const {
    return {rot[0] * p.x + rot[1] * p.y + rot[2] * p.z,
            rot[3] * p.x + rot[4] * p.y + rot[5] * p.z,
            rot[6] * p.x + rot[7] * p.y + rot[8] * p.z};
  }

  Point3 apply(const Point3& p) const { return rotate(p) + trans; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rot = {rot[0], rot[3], rot[6], rot[1], rot[4], rot[7], rot[2], rot[5], rot[8]};
    const Point3 rt = inv.rotate(trans);
    inv.trans = {-rt.x, -rt.y, -rt.z};
    return inv;
  }

  /// Composition: (this * other).apply(p) == this->apply(other.apply(p)).
  RigidTransform compose(const RigidTransform& o) const {
    RigidTransform out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += rot[r * 3 + k] * o.rot[k * 3 + c];
        out.rot[r * 3 + c] = s;
      }
    out.trans = rotate(o.trans) + trans;
    return out;
  }

  /// True when the rotation block is orthonormal with determinant +1.
  bool is_rigid(double tol = 1e-9) const {
    const RigidTransform rt{.rot = rot};
    const RigidTransform id = rt.compose(rt.inverse());
    for (int i = 0; i < 9; ++i) {
      const double want = (i % 4 == 0) ? 1.0 : 0.0;
      if (std::abs(id.rot[i] - want) > tol) return false;
    }
    const double det = rot[0] * (rot[4] * rot[8] - rot[5] * rot[7]) -
                       rot[1] * (rot[3] * rot[8] - rot[5] * rot[6]) +
                       rot[2] * (rot[3] * rot[7] - rot[4] * rot[6]);
    return std::abs(det - 1.0) <= tol;
  }

  static RigidTransform identity() { return {}; }

  /// Rotation about the ego vertical axis by yaw radians, no translation.
  static RigidTransform from_yaw(double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {.rot = {c, -s, 0, s, c, 0, 0, 0, 1}, .trans = {}};
  }
};

/// Extrinsics for a camera at cam_pos (ego frame) whose optical axis points
/// ego-forward after a yaw rotation. Camera axes: x right, y down, z forward.
inline RigidTransform front_camera_pose(const Point3& cam_pos, double yaw = 0.0) {
  const RigidTransform axes{.rot = {0, -1, 0, 0, 0, -1, 1, 0, 0}, .trans = {}};
  const RigidTransform cam_from_ego = axes.compose(RigidTransform::from_yaw(-yaw));
  RigidTransform out = cam_from_ego;
  const Point3 rc = cam_from_ego.rotate(cam_pos);
  out.trans = {-rc.x, -rc.y, -rc.z};
  return out;
}

/// Lifts a ground-plane ego point to 3D and maps it into the camera frame.
inline Point3 ego_to_camera(const Point2& p, const RigidTransform& extrinsics) {
  return extrinsics.apply({p.x, p.y, 0.0});
}

/// Maps a camera-frame point back into the ego frame.
inline Point3 camera_to_ego(const Point3& p, const RigidTransform& extrinsics) {
  return extrinsics.inverse().apply(p);
}

}  // namespace nlos
