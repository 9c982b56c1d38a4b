#pragma once

#include <vector>

#include "nlos/config.hpp"
#include "nlos/localization.hpp"
#include "nlos/spatial.hpp"
#include "nlos/types.hpp"

namespace nlos {

/// Output of one pipeline step.
struct FrameResult {
  double t = 0.0;
  std::vector<AlignedBox> structures;  // smoothed vehicle footprints in use
  bool layout_fixed = false;
  bool gap_frame = false;
  std::vector<TargetEstimate> targets;
};

/// Stateful per-frame processor. Feed frames in time order: each call first
/// updates the vehicle layout from the camera views and static radar points,
/// then localizes moving targets against that layout by unfolding reflected
/// returns. Once any target has been confirmed, the layout freezes and later
/// frames skip the camera stage.
class Pipeline {
 public:
  Pipeline(CameraIntrinsics intrinsics, RigidTransform extrinsics, Point2 radar_origin,
           PipelineConfig cfg = {})
      : intrinsics_(intrinsics),
        extrinsics_(extrinsics),
        origin_(radar_origin),
        cfg_(cfg) {
    cfg_.validate();
  }

  FrameResult process(const RadarFrame& radar, const DepthGrid& depth, const SegMask& mask) {
    const auto statics = radar.static_points();
    const SpatialDiagnostics diag = infer_spatial(depth, mask, intrinsics_, extrinsics_, statics,
                                                  state_, target_seen_, cfg_);

    FrameResult out;
    out.t = radar.timestamp;
    out.structures = state_.boxes();
    out.layout_fixed = state_.fixed;
    out.gap_frame = diag.gap_frame;

    const auto dynamics = radar.dynamic_points();
    out.targets = localize(dynamics, origin_, out.structures, cfg_);
    if (!out.targets.empty()) target_seen_ = true;
    return out;
  }

  const SpatialState& state() const { return state_; }
  bool target_seen() const { return target_seen_; }
  const PipelineConfig& config() const { return cfg_; }

 private:
  CameraIntrinsics intrinsics_;
  RigidTransform extrinsics_;
  Point2 origin_;
  PipelineConfig cfg_;
  SpatialState state_;
  bool target_seen_ = false;
};

}  // namespace nlos
