#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "open3d/flow.hpp"

namespace open3d {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void rect_tag(std::string& s, double x, double y, double w, double h,
              const std::string& style) {
  s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) +
       "\" height=\"" + fmt(h) + "\" " + style + "/>\n";
}

// Blue-to-red ramp; t in [0, 1].
std::string heat_color(double t) {
  const int r = static_cast<int>(40 + 215 * t);
  const int g = static_cast<int>(60 + 80 * (1.0 - std::abs(2 * t - 1)));
  const int b = static_cast<int>(255 - 215 * t);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_layout_svg(const Design& d, const Library& lib) {
  const int panels = d.is_3d() ? 2 : 1;
  const double die_w = to_um(d.die_bottom.width());
  const double die_h = to_um(d.die_bottom.height());
  const double scale = 560.0 / std::max({die_w, die_h, 1.0});
  const double pw = die_w * scale, ph = die_h * scale;
  const double margin = 20.0;
  const double total_w = margin + panels * (pw + margin);
  const double total_h = ph + 2 * margin;

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  fmt(total_w) + "\" height=\"" + fmt(total_h) + "\">\n";

  const bool density = d.components.size() > 20000;
  for (int panel = 0; panel < panels; ++panel) {
    const Die die = panel == 0 ? Die::BOTTOM : Die::TOP;
    const double ox = margin + panel * (pw + margin);
    const double oy = margin;
    auto px = [&](DbUnit v) { return ox + (to_um(v - d.die_bottom.lx)) * scale; };
    // SVG y grows downward.
    auto py = [&](DbUnit v) {
      return oy + ph - (to_um(v - d.die_bottom.ly)) * scale;
    };
    rect_tag(s, ox, oy, pw, ph,
             "fill=\"#fcfcfc\" stroke=\"#333333\" stroke-width=\"1\"");

    if (density) {
      constexpr int n = 64;
      std::vector<double> usage(n * n, 0.0);
      for (const Component& c : d.components) {
        if (c.die != die || c.status == PlaceStatus::UNPLACED) continue;
        const CellMaster& m = lib.at(c.master);
        if (m.is_macro()) continue;
        const double cx = to_um(c.x - d.die_bottom.lx) + to_um(m.width) / 2;
        const double cy = to_um(c.y - d.die_bottom.ly) + to_um(m.height) / 2;
        int bx = std::clamp(static_cast<int>(cx / die_w * n), 0, n - 1);
        int by = std::clamp(static_cast<int>(cy / die_h * n), 0, n - 1);
        usage[by * n + bx] += to_um(m.width) * to_um(m.height);
      }
      const double cap = (die_w / n) * (die_h / n);
      for (int by = 0; by < n; ++by)
        for (int bx = 0; bx < n; ++bx) {
          double u = std::min(1.0, usage[by * n + bx] / cap);
          if (u <= 0.0) continue;
          int shade = 245 - static_cast<int>(140 * u);
          char color[16];
          std::snprintf(color, sizeof color, "#%02x%02xf0", shade, shade);
          rect_tag(s, ox + bx * pw / n, oy + ph - (by + 1) * ph / n, pw / n,
                   ph / n, std::string("fill=\"") + color + "\"");
        }
    }
    for (const Component& c : d.components) {
      if (c.die != die || c.status == PlaceStatus::UNPLACED) continue;
      const CellMaster& m = lib.at(c.master);
      if (density && !m.is_macro()) continue;
      Rect r = component_rect(c, m);
      const std::string style =
          m.is_macro()
              ? "fill=\"#f4d7a0\" stroke=\"#a06000\" stroke-width=\"1\""
              : "fill=\"#9ecae1\"";
      rect_tag(s, px(r.lx), py(r.uy), to_um(r.width()) * scale,
               to_um(r.height()) * scale, style);
    }
  }
  s += "</svg>\n";
  return s;
}

std::string render_thermal_svg(const std::vector<double>& temps_c, int grid_n,
                               int planes) {
  const int n = grid_n;
  double t_min = temps_c.empty() ? 0.0 : temps_c[0];
  double t_max = t_min;
  for (double t : temps_c) {
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  const double range = t_max - t_min;

  const double cell = 32.0, margin = 20.0, legend_h = 30.0;
  const double pw = n * cell;
  const double total_w = margin + planes * (pw + margin);
  const double total_h = pw + 2 * margin + legend_h;

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  fmt(total_w) + "\" height=\"" + fmt(total_h) + "\">\n";
  for (int plane = 0; plane < planes; ++plane) {
    const double ox = margin + plane * (pw + margin);
    for (int row = 0; row < n; ++row)
      for (int col = 0; col < n; ++col) {
        const double t = temps_c[plane * n * n + row * n + col];
        const double u = range > 0.0 ? (t - t_min) / range : 0.0;
        rect_tag(s, ox + col * cell, margin + (n - 1 - row) * cell, cell, cell,
                 "fill=\"" + heat_color(u) + "\"");
      }
    rect_tag(s, ox, margin, pw, pw,
             "fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"");
  }
  // Legend: min and max with a small swatch each.
  const double ly = margin + pw + 10.0;
  rect_tag(s, margin, ly, 14, 14, "fill=\"" + heat_color(0.0) + "\"");
  s += "<text x=\"" + fmt(margin + 20) + "\" y=\"" + fmt(ly + 12) +
       "\" font-size=\"12\" font-family=\"monospace\">" + fmt(t_min) +
       " C</text>\n";
  rect_tag(s, margin + 120, ly, 14, 14, "fill=\"" + heat_color(1.0) + "\"");
  s += "<text x=\"" + fmt(margin + 140) + "\" y=\"" + fmt(ly + 12) +
       "\" font-size=\"12\" font-family=\"monospace\">" + fmt(t_max) +
       " C</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace open3d
