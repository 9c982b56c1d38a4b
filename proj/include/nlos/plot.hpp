#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "nlos/pipeline.hpp"
#include "nlos/scenario.hpp"
#include "nlos/simulator.hpp"

namespace nlos::plot {

/// Bird's-eye SVG of one frame: ground-truth vehicles in grey, inferred
/// footprints in blue, static returns as dark dots, dynamic returns in orange,
/// pedestrians as green discs, localized targets as red crosses. Forward (+x)
/// points up; output is deterministic for identical inputs.
inline void write_scene_svg(const sim::Scenario& s, const sim::SimFrame* frame,
                            const FrameResult* result, const std::filesystem::path& path) {
  double x0 = s.ego_origin.x, x1 = s.ego_origin.x, y0 = s.ego_origin.y, y1 = s.ego_origin.y;
  auto grow = [&](double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const auto& v : s.vehicles) {
    grow(v.x_min(), v.y_min());
    grow(v.x_max(), v.y_max());
  }
  for (const auto& ped : s.pedestrians)
    for (const auto& w : ped.waypoints) grow(w.pos.x, w.pos.y);

  const double pad = 1.5, scale = 40.0;
  const double wpx = (y1 - y0 + 2 * pad) * scale;
  const double hpx = (x1 - x0 + 2 * pad) * scale;
  auto px = [&](const Point2& p) {
    return std::pair<double, double>{(y1 + pad - p.y) * scale, (x1 + pad - p.x) * scale};
  };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                wpx, hpx, wpx, hpx);
  out << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto rect = [&](const AlignedBox& b, const char* style) {
    const auto [rx, ry] = px({b.x_max(), b.y_max()});
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" %s/>\n", rx, ry,
                  b.length * scale, b.width * scale, style);
    out << buf;
  };
  for (const auto& v : s.vehicles)
    rect(v, "fill=\"#d0d0d0\" stroke=\"#808080\" stroke-width=\"1\"");
  if (result)
    for (const auto& b : result->structures)
      rect(b, "fill=\"none\" stroke=\"#2060c0\" stroke-width=\"2\"");

  if (frame) {
    for (const auto& p : frame->radar.points) {
      const auto [cx, cy] = px(p.position);
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"2\" fill=\"%s\"/>\n", cx,
                    cy, p.motion == Motion::Static ? "#404040" : "#e08020");
      out << buf;
    }
    for (const auto& ped : frame->truth.peds) {
      const auto [cx, cy] = px(ped.pos);
      std::snprintf(buf, sizeof buf,
                    "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"%.1f\" fill=\"#30a040\" "
                    "fill-opacity=\"0.7\"/>\n",
                    cx, cy, s.ped_radius * scale);
      out << buf;
    }
  }
  if (result)
    for (const auto& e : result->targets) {
      const auto [cx, cy] = px(e.position);
      std::snprintf(buf, sizeof buf,
                    "<path d=\"M %.1f %.1f l 10 10 m -10 0 l 10 -10\" stroke=\"#d02020\" "
                    "stroke-width=\"2\" fill=\"none\"/>\n",
                    cx - 5.0, cy - 5.0);
      out << buf;
    }

  const auto [ox, oy] = px(s.ego_origin);
  std::snprintf(buf, sizeof buf,
                "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4\" fill=\"black\"/>\n", ox, oy);
  out << buf << "</svg>\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nlos::plot
