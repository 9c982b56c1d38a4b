#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "nlos/pipeline.hpp"
#include "nlos/simulator.hpp"
#include "nlos/types.hpp"

namespace nlos::eval {

inline double euclid_error(const Point2& estimate, const Point2& truth) {
  return distance(estimate, truth);
}

/// A localization counts as correct when its center error is within tol.
inline bool position_correct(const Point2& estimate, const Point2& truth, double tol = 0.2) {
  return euclid_error(estimate, truth) <= tol;
}

inline double iou(const AlignedBox& a, const AlignedBox& b) {
  const double ix = std::max(0.0, std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min()));
  const double iy = std::max(0.0, std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min()));
  const double inter = ix * iy;
  const double uni = a.width * a.length + b.width * b.length - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// Detection succeeds only with strictly more than the threshold overlap.
inline bool detection_hit(const AlignedBox& estimate, const AlignedBox& truth,
                          double threshold = 0.2) {
  return iou(estimate, truth) > threshold;
}

struct MatchedPair {
  int estimate = -1;
  int ped = -1;
  double error = 0.0;
  double overlap = 0.0;  // IoU of the fixed-size boxes around both centers
};

/// Greedy nearest association between target estimates and ground-truth
/// pedestrians, gated by center distance.
inline std::vector<MatchedPair> match_frame(std::span<const TargetEstimate> estimates,
                                            std::span<const sim::PedSnapshot> peds,
                                            double box_size = 1.7, double gate = 2.0) {
  struct Cand {
    double d;
    int est, ped;
  };
  std::vector<Cand> cands;
  for (int e = 0; e < static_cast<int>(estimates.size()); ++e)
    for (int p = 0; p < static_cast<int>(peds.size()); ++p) {
      const double d = distance(estimates[e].position, peds[p].pos);
      if (d <= gate) cands.push_back({d, e, p});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.est != b.est) return a.est < b.est;
    return a.ped < b.ped;
  });

  std::vector<MatchedPair> out;
  std::vector<bool> est_used(estimates.size(), false), ped_used(peds.size(), false);
  for (const auto& c : cands) {
    if (est_used[c.est] || ped_used[c.ped]) continue;
    est_used[c.est] = ped_used[c.ped] = true;
    MatchedPair m;
    m.estimate = c.est;
    m.ped = c.ped;
    m.error = c.d;
    m.overlap = iou(pedestrian_box(estimates[c.est].position, box_size),
                    pedestrian_box(peds[c.ped].pos, box_size));
    out.push_back(m);
  }
  return out;
}

struct FrameEval {
  double t = 0.0;
  std::vector<MatchedPair> matches;
};

/// Detection story of one pedestrian across a run.
struct PedTimeline {
  bool detected = false;          // hit while still fully occluded
  double t_detect = 0.0;          // first occluded frame with an overlap hit
  double detection_distance = 0.0;  // forward distance at t_detect
  bool has_full = false;
  double t_full = 0.0;            // first frame fully visible to the camera
  double time_advantage = 0.0;    // t_full - t_detect
  bool window_defined = false;    // both endpoints exist
  int window_frames = 0;
  int qualifying_frames = 0;      // frames in the window with an overlap hit
  double error_sum = 0.0;         // center error summed over qualifying frames
};

struct VehicleEval {
  double error = std::numeric_limits<double>::infinity();
  bool correct = false;
  bool matched = false;
};

struct RunEval {
  std::vector<FrameEval> frames;
  std::vector<PedTimeline> peds;
  double accuracy = 0.0;    // pooled qualifying/window over peds with windows
  double mean_error = 0.0;  // pooled over qualifying frames
  bool any_window = false;
  std::vector<VehicleEval> vehicles;  // per ground-truth vehicle, final layout
  bool layout_correct = false;        // every vehicle matched within tolerance
};

namespace detail {

inline void score_vehicles(RunEval& ev, const sim::Scenario& scenario,
                           std::span<const AlignedBox> final_boxes, double tol) {
  ev.vehicles.assign(scenario.vehicles.size(), {});
  std::vector<bool> used(final_boxes.size(), false);
  struct Cand {
    double d;
    int gt, est;
  };
  std::vector<Cand> cands;
  for (int g = 0; g < static_cast<int>(scenario.vehicles.size()); ++g)
    for (int e = 0; e < static_cast<int>(final_boxes.size()); ++e)
      cands.push_back({distance(scenario.vehicles[g].center, final_boxes[e].center), g, e});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.gt != b.gt) return a.gt < b.gt;
    return a.est < b.est;
  });
  std::vector<bool> gt_used(scenario.vehicles.size(), false);
  for (const auto& c : cands) {
    if (gt_used[c.gt] || used[c.est]) continue;
    gt_used[c.gt] = used[c.est] = true;
    ev.vehicles[c.gt].matched = true;
    ev.vehicles[c.gt].error = c.d;
    ev.vehicles[c.gt].correct = c.d <= tol;
  }
  ev.layout_correct = !ev.vehicles.empty();
  for (const auto& v : ev.vehicles) ev.layout_correct = ev.layout_correct && v.correct;
}

}  // namespace detail

/// Simulates a scenario and feeds every frame through a fresh pipeline,
/// keeping only what evaluation needs.
struct SimRun {
  std::vector<sim::FrameTruth> truths;
  std::vector<FrameResult> results;
};

inline SimRun run_simulated(const sim::Scenario& s, const PipelineConfig& cfg = {}) {
  Pipeline pipe(s.camera.intrinsics, s.camera.extrinsics(), s.ego_origin, cfg);
  SimRun out;
  out.truths.reserve(s.frame_count());
  out.results.reserve(s.frame_count());
  for (int i = 0; i < s.frame_count(); ++i) {
    sim::SimFrame frame = sim::generate_frame(s, i);
    out.results.push_back(pipe.process(frame.radar, frame.depth, frame.mask));
    out.truths.push_back(std::move(frame.truth));
  }
  return out;
}

/// Scores a full run: frame-by-frame association, per-pedestrian detection
/// timelines with their evaluation windows, pooled accuracy and error, and the
/// final vehicle layout. `truths` and `results` must be parallel.
inline RunEval evaluate_run(const sim::Scenario& scenario, std::span<const sim::FrameTruth> truths,
                            std::span<const FrameResult> results, double box_size = 1.7,
                            double match_gate = 2.0, double position_tol = 0.2) {
  if (truths.size() != results.size())
    throw ConfigError("evaluate_run: truth and result streams differ in length");

  RunEval ev;
  const int ped_count = truths.empty() ? 0 : static_cast<int>(truths.front().peds.size());
  ev.peds.assign(ped_count, {});

  for (std::size_t f = 0; f < truths.size(); ++f) {
    FrameEval fe;
    fe.t = truths[f].t;
    fe.matches = match_frame(results[f].targets, truths[f].peds, box_size, match_gate);
    ev.frames.push_back(std::move(fe));
  }

  for (int p = 0; p < ped_count; ++p) {
    PedTimeline& tl = ev.peds[p];
    for (std::size_t f = 0; f < truths.size(); ++f) {
      const auto& snap = truths[f].peds[p];
      if (!tl.has_full && snap.vis == sim::Visibility::Full) {
        tl.has_full = true;
        tl.t_full = truths[f].t;
      }
      if (!tl.detected && snap.vis == sim::Visibility::NLoS) {
        for (const auto& m : ev.frames[f].matches) {
          if (m.ped == p && m.overlap > 0.2) {
            tl.detected = true;
            tl.t_detect = truths[f].t;
            tl.detection_distance = std::abs(snap.pos.x - scenario.ego_origin.x);
            break;
          }
        }
      }
    }
    tl.window_defined = tl.detected && tl.has_full && tl.t_full >= tl.t_detect;
    if (!tl.window_defined) continue;
    tl.time_advantage = tl.t_full - tl.t_detect;
    for (std::size_t f = 0; f < truths.size(); ++f) {
      const double t = truths[f].t;
      if (t < tl.t_detect - 1e-9 || t > tl.t_full + 1e-9) continue;
      ++tl.window_frames;
      for (const auto& m : ev.frames[f].matches) {
        if (m.ped == p && m.overlap > 0.2) {
          ++tl.qualifying_frames;
          tl.error_sum += m.error;
          break;
        }
      }
    }
  }

  long window_total = 0, qualifying_total = 0;
  double error_total = 0.0;
  for (const auto& tl : ev.peds) {
    if (!tl.window_defined) continue;
    ev.any_window = true;
    window_total += tl.window_frames;
    qualifying_total += tl.qualifying_frames;
    error_total += tl.error_sum;
  }
  ev.accuracy = window_total > 0 ? static_cast<double>(qualifying_total) / window_total : 0.0;
  ev.mean_error = qualifying_total > 0 ? error_total / qualifying_total : 0.0;

  detail::score_vehicles(ev, scenario,
                         results.empty() ? std::span<const AlignedBox>{}
                                         : std::span<const AlignedBox>(results.back().structures),
                         position_tol);
  return ev;
}

}  // namespace nlos::eval
