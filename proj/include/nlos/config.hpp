#pragma once

#include "nlos/camera.hpp"
#include "nlos/types.hpp"

namespace nlos {

/// Tunables for the full perception pipeline. Defaults reproduce the
/// reference setup; loaders overlay file values and flag overrides on top.
struct PipelineConfig {
  // Vehicle footprint prior [m].
  double vehicle_width = 1.8;
  double vehicle_length = 4.5;

  // Footprint clustering on the camera point cloud. The stride subsamples
  // mask pixels before unprojection; 1 uses every pixel.
  double vehicle_eps = 0.5;
  int vehicle_min_pts = 8;
  int pixel_stride = 2;

  // Grid refinement of the rough footprint against static radar points.
  double refine_tau = 0.15;
  double refine_delta = 0.5;
  double refine_step = 0.05;

  // Temporal smoothing of footprint centers.
  int smoothing_window = 5;
  double match_gate = 1.5;

  // Target clustering on corrected dynamic points.
  double target_eps = 0.6;
  int target_min_pts = 2;

  // Target filters and output geometry.
  double structure_margin = 0.3;
  double ped_box_size = 1.7;

  // Reflection unfolding.
  int max_bounces = 3;
  double hit_eps = 1e-9;

  // Height band for the vehicle depth cloud, ego frame [m].
  HeightBand height_band{0.2, 2.2};

  void validate() const {
    if (vehicle_width <= 0 || vehicle_length <= 0)
      throw ConfigError("config: vehicle extents must be positive");
    if (vehicle_eps <= 0 || target_eps <= 0) throw ConfigError("config: eps must be positive");
    if (vehicle_min_pts < 1 || target_min_pts < 1)
      throw ConfigError("config: min_pts must be at least 1");
    if (pixel_stride < 1) throw ConfigError("config: pixel stride must be at least 1");
    if (refine_tau <= 0 || refine_delta < 0 || refine_step <= 0)
      throw ConfigError("config: refinement parameters out of range");
    if (smoothing_window < 1) throw ConfigError("config: smoothing window must be at least 1");
    if (match_gate <= 0) throw ConfigError("config: match gate must be positive");
    if (structure_margin < 0) throw ConfigError("config: structure margin must be non-negative");
    if (ped_box_size <= 0) throw ConfigError("config: pedestrian box size must be positive");
    if (max_bounces < 1) throw ConfigError("config: max_bounces must be at least 1");
    if (hit_eps <= 0) throw ConfigError("config: hit epsilon must be positive");
    if (height_band.low >= height_band.high) throw ConfigError("config: empty height band");
  }
};

}  // namespace nlos
