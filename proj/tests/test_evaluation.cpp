#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "nlos/evaluation.hpp"

using namespace nlos;
using namespace nlos::eval;
using sim::PedSnapshot;
using sim::Visibility;

namespace {

PedSnapshot snap(Point2 pos, Visibility vis) {
  PedSnapshot s;
  s.pos = pos;
  s.vis = vis;
  return s;
}

TargetEstimate target_at(Point2 pos) {
  TargetEstimate t;
  t.position = pos;
  t.support = 3;
  return t;
}

}  // namespace

TEST_CASE("intersection over union on axis-aligned boxes") {
  const AlignedBox a{{1.0, 1.0}, 2.0, 2.0};
  REQUIRE(iou(a, a) == 1.0);
  REQUIRE(iou(a, AlignedBox{{10.0, 1.0}, 2.0, 2.0}) == 0.0);
  // Unit shift of a 2x2 box: 2 of intersection over 6 of union.
  const AlignedBox b{{2.0, 1.0}, 2.0, 2.0};
  REQUIRE(iou(a, b) == 2.0 / 6.0);
  REQUIRE(iou(a, b) == iou(b, a));
  // Touching boxes share zero area.
  REQUIRE(iou(a, AlignedBox{{3.0, 1.0}, 2.0, 2.0}) == 0.0);
}

TEST_CASE("detection requires strictly more overlap than the threshold") {
  const AlignedBox a{{1.0, 1.0}, 2.0, 2.0};
  const AlignedBox b{{2.0, 1.0}, 2.0, 2.0};  // IoU exactly 1/3
  REQUIRE_FALSE(detection_hit(a, b, 1.0 / 3.0));
  REQUIRE(detection_hit(a, b, 0.33));
  REQUIRE_FALSE(detection_hit(a, b, 0.34));
}

TEST_CASE("position correctness includes the boundary") {
  REQUIRE(euclid_error({3.0, 4.0}, {0.0, 0.0}) == 5.0);
  REQUIRE(position_correct({0.25, 0.0}, {0.0, 0.0}, 0.25));
  REQUIRE_FALSE(position_correct({0.2500000001, 0.0}, {0.0, 0.0}, 0.25));
}

TEST_CASE("frame matching is greedy by distance and gated") {
  const std::vector<TargetEstimate> estimates{target_at({0.0, 0.0}), target_at({1.0, 0.0})};
  const std::vector<PedSnapshot> peds{snap({1.1, 0.0}, Visibility::NLoS),
                                      snap({-0.2, 0.0}, Visibility::NLoS)};

  const auto matches = match_frame(estimates, peds);
  REQUIRE(matches.size() == 2);
  // Closest pair (estimate 1, ped 0) claims both; estimate 0 falls to ped 1
  // even though ped 0 is nearer to it as well.
  REQUIRE(matches[0].estimate == 1);
  REQUIRE(matches[0].ped == 0);
  REQUIRE(matches[0].error == Catch::Approx(0.1).margin(1e-12));
  REQUIRE(matches[1].estimate == 0);
  REQUIRE(matches[1].ped == 1);
  REQUIRE(matches[1].error == Catch::Approx(0.2).margin(1e-12));

  // Perfect alignment gives full box overlap.
  const std::vector<TargetEstimate> exact{target_at({1.1, 0.0})};
  const auto hit = match_frame(exact, peds);
  REQUIRE(hit.size() == 1);
  REQUIRE(hit[0].overlap == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(hit[0].error == 0.0);

  // The gate is inclusive at the boundary and excludes beyond it.
  const std::vector<PedSnapshot> far{snap({0.0, 0.0}, Visibility::NLoS)};
  const std::vector<TargetEstimate> at_gate{target_at({2.0, 0.0})};
  const std::vector<TargetEstimate> past_gate{target_at({2.0000000001, 0.0})};
  REQUIRE(match_frame(at_gate, far).size() == 1);
  REQUIRE(match_frame(past_gate, far).empty());
}

namespace {

// Builds a hand-scripted run at 2 Hz: truth visibility states plus, per frame,
// the estimate offsets (in y) for each pedestrian that produced a detection.
struct Script {
  sim::Scenario scenario;
  std::vector<sim::FrameTruth> truths;
  std::vector<FrameResult> results;

  explicit Script(int frames) {
    scenario.id = "script";
    scenario.frame_rate = 2.0;
    truths.resize(frames);
    results.resize(frames);
    for (int f = 0; f < frames; ++f) {
      truths[f].t = f / 2.0;
      results[f].t = truths[f].t;
    }
  }
};

}  // namespace

TEST_CASE("pedestrian timelines anchor at first occluded hit and first full view") {
  // Two pedestrians far apart so the match gate keeps them independent.
  const Point2 p0{5.0, 0.0};
  const Point2 p1{5.0, 10.0};
  Script run(8);

  const Visibility vis0[8] = {Visibility::NLoS,    Visibility::NLoS, Visibility::NLoS,
                              Visibility::NLoS,    Visibility::Partial, Visibility::Full,
                              Visibility::Full,    Visibility::Full};
  const Visibility vis1[8] = {Visibility::NLoS, Visibility::NLoS, Visibility::NLoS,
                              Visibility::NLoS, Visibility::NLoS, Visibility::NLoS,
                              Visibility::Full, Visibility::Full};
  for (int f = 0; f < 8; ++f) {
    run.truths[f].peds = {snap(p0, vis0[f]), snap(p1, vis1[f])};
  }
  // Ped 0: hits at frames 2, 3, 5 offset by 0.125 m; frame 4 missed.
  for (int f : {2, 3, 5}) run.results[f].targets.push_back(target_at({p0.x, p0.y + 0.125}));
  // Ped 1: hits at frames 4 and 6 offset by 0.25 m; frame 5 missed.
  for (int f : {4, 6}) run.results[f].targets.push_back(target_at({p1.x, p1.y + 0.25}));

  const RunEval ev = evaluate_run(run.scenario, run.truths, run.results);
  REQUIRE(ev.peds.size() == 2);

  const PedTimeline& t0 = ev.peds[0];
  REQUIRE(t0.detected);
  REQUIRE(t0.t_detect == 1.0);
  REQUIRE(t0.detection_distance == 5.0);
  REQUIRE(t0.has_full);
  REQUIRE(t0.t_full == 2.5);
  REQUIRE(t0.window_defined);
  REQUIRE(t0.time_advantage == 1.5);
  REQUIRE(t0.window_frames == 4);      // t in [1.0, 2.5]: frames 2..5
  REQUIRE(t0.qualifying_frames == 3);  // frame 4 missed
  REQUIRE(t0.error_sum == Catch::Approx(0.375).margin(1e-12));

  const PedTimeline& t1 = ev.peds[1];
  REQUIRE(t1.t_detect == 2.0);
  REQUIRE(t1.t_full == 3.0);
  REQUIRE(t1.window_frames == 3);      // frames 4..6
  REQUIRE(t1.qualifying_frames == 2);
  REQUIRE(t1.error_sum == Catch::Approx(0.5).margin(1e-12));

  REQUIRE(ev.any_window);
  REQUIRE(ev.accuracy == Catch::Approx(5.0 / 7.0).margin(1e-12));
  REQUIRE(ev.mean_error == Catch::Approx(0.175).margin(1e-12));
}

TEST_CASE("a pedestrian that never becomes fully visible defines no window") {
  Script run(4);
  for (int f = 0; f < 4; ++f) run.truths[f].peds = {snap({5.0, 0.0}, Visibility::NLoS)};
  run.results[1].targets.push_back(target_at({5.0, 0.0}));

  const RunEval ev = evaluate_run(run.scenario, run.truths, run.results);
  REQUIRE(ev.peds[0].detected);
  REQUIRE_FALSE(ev.peds[0].has_full);
  REQUIRE_FALSE(ev.peds[0].window_defined);
  REQUIRE_FALSE(ev.any_window);
  REQUIRE(ev.accuracy == 0.0);
  REQUIRE(ev.mean_error == 0.0);
}

TEST_CASE("a full view before the first occluded hit voids the window") {
  Script run(4);
  const Visibility vis[4] = {Visibility::Full, Visibility::NLoS, Visibility::NLoS,
                             Visibility::NLoS};
  for (int f = 0; f < 4; ++f) run.truths[f].peds = {snap({5.0, 0.0}, vis[f])};
  run.results[2].targets.push_back(target_at({5.0, 0.0}));

  const RunEval ev = evaluate_run(run.scenario, run.truths, run.results);
  REQUIRE(ev.peds[0].detected);
  REQUIRE(ev.peds[0].has_full);
  REQUIRE(ev.peds[0].t_full < ev.peds[0].t_detect);
  REQUIRE_FALSE(ev.peds[0].window_defined);
}

TEST_CASE("evaluation rejects mismatched stream lengths") {
  Script run(3);
  run.results.pop_back();
  REQUIRE_THROWS_AS(evaluate_run(run.scenario, run.truths, run.results), ConfigError);
}

TEST_CASE("vehicle layout scoring matches greedily and tolerates nothing missing") {
  Script run(1);
  run.scenario.vehicles = {AlignedBox{{0.0, 0.0}, 1.8, 4.5}, AlignedBox{{1.0, 0.0}, 1.8, 4.5}};
  run.truths[0].peds = {};
  run.results[0].structures = {AlignedBox{{0.4, 0.0}, 1.8, 4.5},
                               AlignedBox{{1.1, 0.0}, 1.8, 4.5}};

  // Greedy order: (gt 1, est 1) at 0.1 wins first, then (gt 0, est 0) at 0.4.
  const RunEval ev = evaluate_run(run.scenario, run.truths, run.results, 1.7, 2.0, 0.5);
  REQUIRE(ev.vehicles.size() == 2);
  REQUIRE(ev.vehicles[0].matched);
  REQUIRE(ev.vehicles[0].error == Catch::Approx(0.4).margin(1e-12));
  REQUIRE(ev.vehicles[1].error == Catch::Approx(0.1).margin(1e-12));
  REQUIRE(ev.layout_correct);

  // The tolerance boundary is inclusive.
  const RunEval tight = evaluate_run(run.scenario, run.truths, run.results, 1.7, 2.0, 0.4);
  REQUIRE(tight.layout_correct);
  const RunEval tighter = evaluate_run(run.scenario, run.truths, run.results, 1.7, 2.0, 0.25);
  REQUIRE(tighter.vehicles[1].correct);
  REQUIRE_FALSE(tighter.vehicles[0].correct);
  REQUIRE_FALSE(tighter.layout_correct);

  // An unmatched ground-truth vehicle breaks the layout.
  Script missing(1);
  missing.scenario.vehicles = run.scenario.vehicles;
  missing.results[0].structures = {AlignedBox{{0.0, 0.0}, 1.8, 4.5}};
  const RunEval gap = evaluate_run(missing.scenario, missing.truths, missing.results, 1.7, 2.0, 0.5);
  REQUIRE(gap.vehicles[0].matched);
  REQUIRE_FALSE(gap.vehicles[1].matched);
  REQUIRE_FALSE(gap.layout_correct);

  // No ground-truth vehicles at all cannot claim a correct layout.
  Script none(1);
  const RunEval empty = evaluate_run(none.scenario, none.truths, none.results);
  REQUIRE(empty.vehicles.empty());
  REQUIRE_FALSE(empty.layout_correct);
}

TEST_CASE("pedestrian box is square and centered") {
  const AlignedBox b = pedestrian_box({3.0, -1.0}, 1.5);
  REQUIRE(b.center.x == 3.0);
  REQUIRE(b.center.y == -1.0);
  REQUIRE(b.width == 1.5);
  REQUIRE(b.length == 1.5);
}
