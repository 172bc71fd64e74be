#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "open3d/placer.hpp"

namespace open3d {

namespace {

// Occupied spans of one row, in site units, kept sorted and merged.
class RowSpans {
 public:
  // Returns the best start slot for a block of `w` slots near `want`,
  // within [0, row_slots - w]; nullopt when the row is full.
  std::optional<std::int64_t> best_slot(std::int64_t want, std::int64_t w,
                                        std::int64_t row_slots) const {
    if (w > row_slots) return std::nullopt;
    want = std::clamp<std::int64_t>(want, 0, row_slots - w);
    std::int64_t best = -1;
    std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
    // Gaps between consecutive occupied spans (plus both row ends).
    std::int64_t gap_start = 0;
    auto consider_gap = [&](std::int64_t a, std::int64_t b) {
      if (b - a < w) return;
      std::int64_t x = std::clamp(want, a, b - w);
      std::int64_t cost = std::abs(x - want);
      if (cost < best_cost) {
        best_cost = cost;
        best = x;
      }
    };
    for (const auto& [s, e] : spans_) {
      consider_gap(gap_start, s);
      gap_start = std::max(gap_start, e);
    }
    consider_gap(gap_start, row_slots);
    if (best < 0) return std::nullopt;
    return best;
  }

  void occupy(std::int64_t a, std::int64_t b) {
    auto it = spans_.lower_bound(a);
    if (it != spans_.begin()) {
      auto prev = std::prev(it);
      if (prev->second >= a) {
        a = prev->first;
        b = std::max(b, prev->second);
        it = spans_.erase(prev);
      }
    }
    while (it != spans_.end() && it->first <= b) {
      b = std::max(b, it->second);
      it = spans_.erase(it);
    }
    spans_[a] = b;
  }

 private:
  std::map<std::int64_t, std::int64_t> spans_;
};

std::int64_t ceil_div(DbUnit a, DbUnit b) { return (a + b - 1) / b; }

}  // namespace

LegalizeStats legalize(Design& d, const Library& lib, Die die,
                       const Rect& die_rect, const Site& site) {
  if (site.width <= 0 || site.height <= 0) throw Error("invalid site");
  const std::int64_t num_rows = die_rect.height() / site.height;
  const std::int64_t row_slots = die_rect.width() / site.width;
  if (num_rows <= 0 || row_slots <= 0)
    throw InfeasibleError("die too small for a single row");

  std::vector<RowSpans> rows(num_rows);
  auto block = [&](const Rect& r) {
    std::int64_t r0 = std::max<std::int64_t>(0, (r.ly - die_rect.ly) / site.height);
    std::int64_t r1 = std::min<std::int64_t>(
        num_rows - 1, ceil_div(r.uy - die_rect.ly, site.height) - 1);
    std::int64_t a = std::max<std::int64_t>(0, (r.lx - die_rect.lx) / site.width);
    std::int64_t b = std::min<std::int64_t>(
        row_slots, ceil_div(r.ux - die_rect.lx, site.width));
    if (b <= a) return;
    for (std::int64_t row = r0; row <= r1; ++row) rows[row].occupy(a, b);
  };

  std::vector<int> cells;
  for (int i = 0; i < static_cast<int>(d.components.size()); ++i) {
    const Component& c = d.components[i];
    if (c.die != die) continue;
    const CellMaster& m = lib.at(c.master);
    if (m.is_macro() || c.status == PlaceStatus::FIXED) {
      Rect r = component_rect(c, m).intersect(die_rect);
      if (r.width() > 0 && r.height() > 0) block(r);
    } else {
      cells.push_back(i);
    }
  }

  std::sort(cells.begin(), cells.end(), [&](int a, int b) {
    if (d.components[a].x != d.components[b].x)
      return d.components[a].x < d.components[b].x;
    return d.components[a].name < d.components[b].name;
  });

  LegalizeStats stats;
  double total_disp = 0.0;
  for (int ci : cells) {
    Component& c = d.components[ci];
    const CellMaster& m = lib.at(c.master);
    const std::int64_t w_slots = ceil_div(m.width, site.width);
    const std::int64_t want_slot =
        std::clamp<std::int64_t>((c.x - die_rect.lx + site.width / 2) / site.width,
                                 0, std::max<std::int64_t>(0, row_slots - w_slots));
    const double want_row_f =
        static_cast<double>(c.y - die_rect.ly) / site.height;

    // Rows visited by increasing vertical distance; early exit once the
    // vertical cost alone exceeds the best total found.
    std::int64_t center_row = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::llround(want_row_f)), 0, num_rows - 1);
    std::int64_t best_row = -1, best_slot = 0;
    double best_cost = std::numeric_limits<double>::max();
    for (std::int64_t offset = 0; offset < num_rows; ++offset) {
      bool any_candidate = false;
      for (int sign : {1, -1}) {
        if (offset == 0 && sign < 0) continue;
        std::int64_t row = center_row + sign * offset;
        if (row < 0 || row >= num_rows) continue;
        double dy = std::abs(static_cast<double>(row * site.height) -
                             static_cast<double>(c.y - die_rect.ly));
        if (dy >= best_cost) continue;
        any_candidate = true;
        auto slot = rows[row].best_slot(want_slot, w_slots, row_slots);
        if (!slot) continue;
        double dx = std::abs(static_cast<double>(*slot * site.width) -
                             static_cast<double>(c.x - die_rect.lx));
        if (dx + dy < best_cost) {
          best_cost = dx + dy;
          best_row = row;
          best_slot = *slot;
        }
      }
      if (!any_candidate && best_row >= 0) break;
    }
    if (best_row < 0)
      throw InfeasibleError("insufficient row capacity for cell " + c.name);

    rows[best_row].occupy(best_slot, best_slot + w_slots);
    DbUnit nx = die_rect.lx + best_slot * site.width;
    DbUnit ny = die_rect.ly + best_row * site.height;
    if (nx != c.x || ny != c.y) ++stats.moved;
    double disp = to_um(std::abs(nx - c.x)) + to_um(std::abs(ny - c.y));
    total_disp += disp;
    stats.max_displacement_um = std::max(stats.max_displacement_um, disp);
    c.x = nx;
    c.y = ny;
    c.orient = (best_row % 2 == 0) ? Orient::N : Orient::FS;
    c.status = PlaceStatus::PLACED;
  }
  if (!cells.empty())
    stats.mean_displacement_um = total_disp / static_cast<double>(cells.size());
  return stats;
}

void macro_legalize(Design& d, const Library& lib,
                    const std::vector<int>& macro_indices, const Rect& die_rect,
                    const Site& site) {
  auto snap_down = [&](DbUnit v, DbUnit pitch, DbUnit origin) {
    DbUnit rel = v - origin;
    DbUnit snapped = (rel >= 0 ? rel / pitch : -ceil_div(-rel, pitch)) * pitch;
    return origin + snapped;
  };
  auto snap_up = [&](DbUnit v, DbUnit pitch, DbUnit origin) {
    DbUnit rel = v - origin;
    return origin + ceil_div(rel, pitch) * pitch;
  };

  if (macro_indices.empty()) return;
  const Die die = d.components[macro_indices[0]].die;
  std::vector<Rect> placed;
  for (int i = 0; i < static_cast<int>(d.components.size()); ++i) {
    const Component& c = d.components[i];
    if (c.die != die || c.status != PlaceStatus::FIXED) continue;
    if (std::find(macro_indices.begin(), macro_indices.end(), i) !=
        macro_indices.end())
      continue;
    placed.push_back(component_rect(c, lib.at(c.master)));
  }

  std::vector<int> order = macro_indices;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const CellMaster& ma = lib.at(d.components[a].master);
    const CellMaster& mb = lib.at(d.components[b].master);
    const auto area_a = static_cast<__int128>(ma.width) * ma.height;
    const auto area_b = static_cast<__int128>(mb.width) * mb.height;
    if (area_a != area_b) return area_a > area_b;
    return d.components[a].name < d.components[b].name;
  });

  for (int mi : order) {
    Component& c = d.components[mi];
    const CellMaster& m = lib.at(c.master);
    const DbUnit w = m.width, h = m.height;
    if (w > die_rect.width() || h > die_rect.height())
      throw InfeasibleError("macro " + c.name + " larger than the die");

    std::vector<DbUnit> xs{snap_down(c.x, site.width, die_rect.lx),
                           snap_up(c.x, site.width, die_rect.lx),
                           die_rect.lx,
                           snap_down(die_rect.ux - w, site.width, die_rect.lx)};
    std::vector<DbUnit> ys{snap_down(c.y, site.height, die_rect.ly),
                           snap_up(c.y, site.height, die_rect.ly),
                           die_rect.ly,
                           snap_down(die_rect.uy - h, site.height, die_rect.ly)};
    for (const Rect& r : placed) {
      xs.push_back(snap_up(r.ux, site.width, die_rect.lx));
      xs.push_back(snap_down(r.lx - w, site.width, die_rect.lx));
      ys.push_back(snap_up(r.uy, site.height, die_rect.ly));
      ys.push_back(snap_down(r.ly - h, site.height, die_rect.ly));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    DbUnit best_x = 0, best_y = 0;
    double best_cost = std::numeric_limits<double>::max();
    for (DbUnit x : xs) {
      if (x < die_rect.lx || x + w > die_rect.ux) continue;
      for (DbUnit y : ys) {
        if (y < die_rect.ly || y + h > die_rect.uy) continue;
        double cost = to_um(std::abs(x - c.x)) + to_um(std::abs(y - c.y));
        if (cost >= best_cost) continue;
        Rect cand{x, y, x + w, y + h};
        bool free = true;
        for (const Rect& r : placed)
          if (cand.overlaps(r)) {
            free = false;
            break;
          }
        if (free) {
          best_cost = cost;
          best_x = x;
          best_y = y;
        }
      }
    }
    if (best_cost == std::numeric_limits<double>::max())
      throw InfeasibleError("no legal position for macro " + c.name);
    c.x = best_x;
    c.y = best_y;
    c.orient = Orient::N;
    c.status = PlaceStatus::FIXED;
    placed.push_back(component_rect(c, m));
  }
}

}  // namespace open3d
