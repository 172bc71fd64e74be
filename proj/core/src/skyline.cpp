#include "open3d/skyline.hpp"

#include <algorithm>
#include <limits>

namespace open3d {

Skyline::Skyline(DbUnit width) : width_(width) {
  if (width <= 0) throw Error("skyline width must be positive");
  segments_.push_back({0, width, 0});
}

DbUnit Skyline::height_over(DbUnit x, DbUnit w) const {
  DbUnit hi = 0;
  for (const auto& s : segments_) {
    if (s.x_end <= x) continue;
    if (s.x_start >= x + w) break;
    hi = std::max(hi, s.height);
  }
  return hi;
}

void Skyline::raise(DbUnit x, DbUnit w, DbUnit new_height) {
  if (x < 0 || x + w > width_ || w <= 0)
    throw Error("skyline raise out of range");
  std::vector<SkylineSegment> next;
  next.reserve(segments_.size() + 2);
  for (const auto& s : segments_) {
    if (s.x_end <= x || s.x_start >= x + w) {
      next.push_back(s);
      continue;
    }
    if (s.x_start < x) next.push_back({s.x_start, x, s.height});
    if (s.x_end > x + w) next.push_back({x + w, s.x_end, s.height});
  }
  next.push_back({x, x + w, new_height});
  std::sort(next.begin(), next.end(),
            [](const SkylineSegment& a, const SkylineSegment& b) {
              return a.x_start < b.x_start;
            });
  segments_.clear();
  for (const auto& s : next) {
    if (!segments_.empty() && segments_.back().height == s.height)
      segments_.back().x_end = s.x_end;
    else
      segments_.push_back(s);
  }
}

DbUnit Skyline::max_height() const {
  DbUnit hi = 0;
  for (const auto& s : segments_) hi = std::max(hi, s.height);
  return hi;
}

double Skyline::area_under_um2() const {
  double a = 0.0;
  for (const auto& s : segments_)
    a += to_um(s.x_end - s.x_start) * to_um(s.height);
  return a;
}

void TilingParams::validate() const {
  if (height_target <= 0.0 || height_target >= 1.0)
    throw Error("height target must lie in (0, 1)");
  if (halo_step <= 0 || halo_max < 0) throw Error("bad halo sweep parameters");
}

std::vector<int> order_macros(const Design& d, const Library& lib,
                              const std::vector<int>& comp_indices) {
  std::vector<int> out = comp_indices;
  std::sort(out.begin(), out.end(), [&](int a, int b) {
    const CellMaster& ma = lib.at(d.components[a].master);
    const CellMaster& mb = lib.at(d.components[b].master);
    const auto area_a = static_cast<__int128>(ma.width) * ma.height;
    const auto area_b = static_cast<__int128>(mb.width) * mb.height;
    if (area_a != area_b) return area_a > area_b;
    if (ma.height != mb.height) return ma.height > mb.height;
    return d.components[a].name < d.components[b].name;
  });
  return out;
}

SkylineResult skyline_place(const Design& d, const Library& lib,
                            const std::vector<int>& ordered, const Rect& die,
                            DbUnit halo) {
  SkylineResult out;
  Skyline sky(die.width());
  for (int ci : ordered) {
    const CellMaster& m = lib.at(d.components[ci].master);
    const DbUnit w = m.width + 2 * halo;
    const DbUnit h = m.height + 2 * halo;
    DbUnit best_x = -1, best_y = std::numeric_limits<DbUnit>::max();
    for (const auto& seg : sky.segments()) {
      const DbUnit x = seg.x_start;
      if (x + w > die.width()) continue;
      const DbUnit y = sky.height_over(x, w);
      if (y + h > die.height()) continue;
      if (y < best_y || (y == best_y && x < best_x)) {
        best_y = y;
        best_x = x;
      }
    }
    if (best_x < 0) return out;  // infeasible, positions incomplete
    sky.raise(best_x, w, best_y + h);
    out.positions.push_back(
        {ci, die.lx + best_x + halo, die.ly + best_y + halo});
  }
  out.feasible = true;
  out.max_height = sky.max_height();
  return out;
}

TilingOutcome tile_top_die(Design& d, const Library& lib,
                           const TilingParams& params) {
  params.validate();
  if (!d.die_top) throw Error("tile_top_die requires a 3D design");
  std::vector<int> macros;
  for (int i = 0; i < static_cast<int>(d.components.size()); ++i) {
    const Component& c = d.components[i];
    if (c.die == Die::TOP && lib.at(c.master).is_macro()) macros.push_back(i);
  }
  const std::vector<int> ordered = order_macros(d, lib, macros);
  const Rect& die = *d.die_top;
  const DbUnit target =
      static_cast<DbUnit>(params.height_target * static_cast<double>(die.height()));

  TilingOutcome chosen;
  bool have_feasible = false;
  for (DbUnit halo = 0; halo <= params.halo_max; halo += params.halo_step) {
    SkylineResult r = skyline_place(d, lib, ordered, die, halo);
    if (!r.feasible) break;
    chosen = {halo, std::move(r)};
    have_feasible = true;
    if (chosen.result.max_height >= target) break;
  }
  if (!have_feasible && !ordered.empty())
    throw InfeasibleError("top-die macros do not fit at halo 0");
  if (ordered.empty()) {
    chosen.result.feasible = true;
    have_feasible = true;
  }

  for (const auto& p : chosen.result.positions) {
    Component& c = d.components[p.comp_index];
    c.x = p.x;
    c.y = p.y;
    c.orient = Orient::N;
    c.status = PlaceStatus::FIXED;
  }
  return chosen;
}

}  // namespace open3d
