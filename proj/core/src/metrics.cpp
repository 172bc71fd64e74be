#include "open3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace open3d {

namespace {

// Absolute pin position in half-DBU, or the port position doubled.
Point pin_pos_2x(const Design& d, const DesignIndex& idx, const Library& lib,
                 const Net& net, const NetPinRef& ref) {
  if (ref.is_port) {
    int pi = idx.port(ref.pin);
    if (pi < 0) throw Error("net " + net.name + ": unknown port " + ref.pin);
    const Port& p = d.io_ports[pi];
    return Point{2 * p.x, 2 * p.y};
  }
  int ci = idx.component(ref.comp);
  if (ci < 0) throw Error("net " + net.name + ": unknown component " + ref.comp);
  const Component& c = d.components[ci];
  if (c.status == PlaceStatus::UNPLACED)
    throw Error("net " + net.name + ": component " + c.name + " is unplaced");
  const CellMaster& m = lib.at(c.master);
  const MasterPin* pin = m.find_pin(ref.pin);
  if (!pin)
    throw Error("net " + net.name + ": master " + m.name + " has no pin " +
                ref.pin);
  return component_pin_center_2x(c, m, *pin);
}

}  // namespace

double hpwl_um(const Design& d, const Library& lib) {
  DesignIndex idx(d);
  std::int64_t total_2x = 0;
  for (const Net& net : d.nets) {
    if (net.pins.size() < 2) continue;
    DbUnit min_x = std::numeric_limits<DbUnit>::max(), max_x = -min_x;
    DbUnit min_y = min_x, max_y = -min_x;
    for (const NetPinRef& ref : net.pins) {
      Point p = pin_pos_2x(d, idx, lib, net, ref);
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    total_2x += (max_x - min_x) + (max_y - min_y);
  }
  return static_cast<double>(total_2x) / (2.0 * kDbuPerMicron);
}

int count_cut_nets(const Design& d, const Library& lib) {
  (void)lib;
  DesignIndex idx(d);
  int cut = 0;
  for (const Net& net : d.nets) {
    bool top = false, bottom = false;
    for (const NetPinRef& ref : net.pins) {
      Die die;
      if (ref.is_port) {
        int pi = idx.port(ref.pin);
        if (pi < 0) throw Error("net " + net.name + ": unknown port " + ref.pin);
        die = d.io_ports[pi].die;
      } else {
        int ci = idx.component(ref.comp);
        if (ci < 0)
          throw Error("net " + net.name + ": unknown component " + ref.comp);
        die = d.components[ci].die;
      }
      (die == Die::TOP ? top : bottom) = true;
    }
    if (top && bottom) ++cut;
  }
  return cut;
}

double overflow_um2(const Design& d, const Library& lib, int grid_n,
                    double target) {
  if (grid_n <= 0) throw Error("overflow grid must be positive");
  auto die_overflow = [&](Die die, const Rect& die_rect) {
    const int n = grid_n;
    std::vector<double> usage(static_cast<std::size_t>(n) * n, 0.0);
    const double bw = to_um(die_rect.width()) / n;
    const double bh = to_um(die_rect.height()) / n;
    const double x0 = to_um(die_rect.lx), y0 = to_um(die_rect.ly);
    for (const Component& c : d.components) {
      if (c.die != die || c.status == PlaceStatus::UNPLACED) continue;
      Rect r = component_rect(c, lib.at(c.master));
      const double rlx = to_um(r.lx), rly = to_um(r.ly);
      const double rux = to_um(r.ux), ruy = to_um(r.uy);
      int bx0 = std::clamp(static_cast<int>(std::floor((rlx - x0) / bw)), 0, n - 1);
      int bx1 = std::clamp(static_cast<int>(std::floor((rux - x0) / bw)), 0, n - 1);
      int by0 = std::clamp(static_cast<int>(std::floor((rly - y0) / bh)), 0, n - 1);
      int by1 = std::clamp(static_cast<int>(std::floor((ruy - y0) / bh)), 0, n - 1);
      for (int bx = bx0; bx <= bx1; ++bx) {
        double ox = std::max(0.0, std::min(rux, x0 + (bx + 1) * bw) -
                                      std::max(rlx, x0 + bx * bw));
        if (ox <= 0.0) continue;
        for (int by = by0; by <= by1; ++by) {
          double oy = std::max(0.0, std::min(ruy, y0 + (by + 1) * bh) -
                                        std::max(rly, y0 + by * bh));
          if (oy > 0.0) usage[static_cast<std::size_t>(by) * n + bx] += ox * oy;
        }
      }
    }
    const double cap = bw * bh;
    double over = 0.0;
    for (double u : usage) over += std::max(0.0, u - target * cap);
    return over;
  };

  double total = die_overflow(Die::BOTTOM, d.die_bottom);
  if (d.die_top) total += die_overflow(Die::TOP, *d.die_top);
  return total;
}

std::vector<double> component_power_w(const Design& d, const Library& lib,
                                      const std::optional<PowerMap>& power) {
  std::vector<double> out(d.components.size(), 0.0);
  if (power) {
    std::size_t used = 0;
    for (std::size_t i = 0; i < d.components.size(); ++i) {
      auto it = power->find(d.components[i].name);
      if (it == power->end())
        throw Error("power file has no entry for component " +
                    d.components[i].name);
      if (it->second < 0.0)
        throw Error("negative power for component " + d.components[i].name);
      out[i] = it->second;
      ++used;
    }
    if (used != power->size()) {
      DesignIndex idx(d);
      for (const auto& [name, w] : *power)
        if (idx.component(name) < 0)
          throw Error("power file entry for unknown component " + name);
    }
  } else {
    for (std::size_t i = 0; i < d.components.size(); ++i) {
      const CellMaster& m = lib.at(d.components[i].master);
      const double area_mm2 =
          to_um(m.width) * to_um(m.height) / 1e6;
      out[i] = area_mm2 * kDefaultPowerDensityWPerMm2;
    }
  }
  return out;
}

double power_proxy(const Design& d, const Library& lib,
                   const std::optional<PowerMap>& power) {
  double total = 0.0;
  for (double w : component_power_w(d, lib, power)) total += w;
  return total;
}

Report make_report(const Design& d, const Library& lib, int overflow_grid_n,
                   double overflow_target,
                   const std::optional<PowerMap>& power) {
  Report r;
  r.area_mm2 = d.die_bottom.area_um2() / 1e6;
  r.hpwl_um = hpwl_um(d, lib);
  r.cut_nets = d.is_3d() ? count_cut_nets(d, lib) : 0;
  r.hbt_estimate = r.cut_nets;
  r.overflow_um2 = overflow_um2(d, lib, overflow_grid_n, overflow_target);
  double area_top = 0.0, area_bottom = 0.0;
  for (const Component& c : d.components) {
    const CellMaster& m = lib.at(c.master);
    const double a = to_um(m.width) * to_um(m.height);
    (c.die == Die::TOP ? area_top : area_bottom) += a;
  }
  r.util_bottom = area_bottom / d.die_bottom.area_um2();
  r.util_top = d.die_top ? area_top / d.die_top->area_um2() : 0.0;
  r.power_w = power_proxy(d, lib, power);
  return r;
}

}  // namespace open3d
