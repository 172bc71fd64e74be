#include "open3d/placer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "open3d/rng.hpp"

namespace open3d {

void PlacerParams::validate() const {
  if (gamma_um < 0.0) throw Error("gamma must be non-negative");
  if (target_density <= 0.0 || target_density > 1.0)
    throw Error("target density must lie in (0, 1]");
  if (overflow_stop <= 0.0) throw Error("overflow_stop must be positive");
  if (lambda_growth < 1.0) throw Error("lambda growth must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0)
    throw Error("momentum must lie in [0, 1)");
  if (bin_grid < 1 || max_iters < 0) throw Error("bad placer parameters");
}

PlaceModel::PlaceModel(const Design& d, const Library& lib,
                       std::vector<int> movable, const Rect& region,
                       int bin_grid, double target_density)
    : region_(region), target_density_(target_density), movable_(std::move(movable)) {
  const int ncomp = static_cast<int>(d.components.size());
  nodes_.resize(ncomp);
  for (int i = 0; i < ncomp; ++i) {
    const Component& c = d.components[i];
    const CellMaster& m = lib.at(c.master);
    Node& n = nodes_[i];
    n.w = to_um(m.width);
    n.h = to_um(m.height);
    n.x = to_um(2 * c.x + m.width) / 2.0;
    n.y = to_um(2 * c.y + m.height) / 2.0;
  }
  for (int s = 0; s < static_cast<int>(movable_.size()); ++s) {
    Node& n = nodes_[movable_[s]];
    n.movable_slot = s;
    total_movable_area_ += n.w * n.h;
  }
  mx_.resize(movable_.size());
  my_.resize(movable_.size());
  for (int s = 0; s < static_cast<int>(movable_.size()); ++s) {
    mx_[s] = nodes_[movable_[s]].x;
    my_[s] = nodes_[movable_[s]].y;
  }

  // Bin grid sized to the instance: ~sqrt(#components) bins per side.
  int natural = static_cast<int>(std::floor(std::sqrt(std::max(1, ncomp))));
  grid_n_ = std::max(1, std::min(bin_grid, std::max(4, natural)));
  bin_w_ = to_um(region_.width()) / grid_n_;
  bin_h_ = to_um(region_.height()) / grid_n_;

  DesignIndex index(d);
  nets_.reserve(d.nets.size());
  for (const auto& net : d.nets) {
    std::vector<PinEntry> entries;
    for (const auto& ref : net.pins) {
      PinEntry e;
      if (ref.is_port) {
        const Port& p = d.io_ports[index.port(ref.pin)];
        e.node = -1;
        e.ox = to_um(p.x);
        e.oy = to_um(p.y);
      } else {
        int ci = index.component(ref.comp);
        const Component& c = d.components[ci];
        const CellMaster& m = lib.at(c.master);
        const MasterPin* pin = m.find_pin(ref.pin);
        if (!pin) throw Error("net pin not found: " + ref.comp + "/" + ref.pin);
        Point local2x = pin->center_2x();
        Point oriented = orient_point(c.orient, local2x, 2 * m.width, 2 * m.height);
        e.node = ci;
        // offset from the component center
        e.ox = to_um(oriented.x - m.width) / 2.0;
        e.oy = to_um(oriented.y - m.height) / 2.0;
      }
      entries.push_back(e);
    }
    if (entries.size() >= 2) nets_.push_back(std::move(entries));
  }

  // Fixed area per bin never changes during optimization.
  fixed_usage_.assign(static_cast<std::size_t>(grid_n_) * grid_n_, 0.0);
  const double rlx = to_um(region_.lx), rly = to_um(region_.ly);
  for (const Node& n : nodes_) {
    if (n.movable_slot >= 0) continue;
    double lx = n.x - n.w / 2, ux = n.x + n.w / 2;
    double ly = n.y - n.h / 2, uy = n.y + n.h / 2;
    int bx0 = std::max(0, static_cast<int>(std::floor((lx - rlx) / bin_w_)));
    int bx1 = std::min(grid_n_ - 1, static_cast<int>(std::floor((ux - rlx) / bin_w_)));
    int by0 = std::max(0, static_cast<int>(std::floor((ly - rly) / bin_h_)));
    int by1 = std::min(grid_n_ - 1, static_cast<int>(std::floor((uy - rly) / bin_h_)));
    for (int by = by0; by <= by1; ++by) {
      double bl = rly + by * bin_h_, bu = bl + bin_h_;
      double oy = std::min(uy, bu) - std::max(ly, bl);
      if (oy <= 0) continue;
      for (int bx = bx0; bx <= bx1; ++bx) {
        double bl2 = rlx + bx * bin_w_, bu2 = bl2 + bin_w_;
        double ox = std::min(ux, bu2) - std::max(lx, bl2);
        if (ox <= 0) continue;
        fixed_usage_[static_cast<std::size_t>(by) * grid_n_ + bx] += ox * oy;
      }
    }
  }
}

double PlaceModel::node_x(const PinEntry& p) const {
  if (p.node < 0) return p.ox;
  const Node& n = nodes_[p.node];
  return (n.movable_slot >= 0 ? mx_[n.movable_slot] : n.x) + p.ox;
}

double PlaceModel::node_y(const PinEntry& p) const {
  if (p.node < 0) return p.oy;
  const Node& n = nodes_[p.node];
  return (n.movable_slot >= 0 ? my_[n.movable_slot] : n.y) + p.oy;
}

ObjectiveTerm PlaceModel::smooth_wirelength(double gamma_um) const {
  ObjectiveTerm out;
  out.gx.assign(movable_.size(), 0.0);
  out.gy.assign(movable_.size(), 0.0);
  const double gamma = gamma_um > 0 ? gamma_um : 1.0;
  std::vector<double> coords;
  std::vector<int> slots;
  for (const auto& net : nets_) {
    for (int axis = 0; axis < 2; ++axis) {
      coords.clear();
      slots.clear();
      for (const auto& pin : net) {
        coords.push_back(axis == 0 ? node_x(pin) : node_y(pin));
        slots.push_back(pin.node >= 0 ? nodes_[pin.node].movable_slot : -1);
      }
      double hi = *std::max_element(coords.begin(), coords.end());
      double lo = *std::min_element(coords.begin(), coords.end());
      // max side: hi + gamma*log sum exp((v-hi)/gamma)
      double sum_hi = 0.0, sum_lo = 0.0;
      for (double v : coords) {
        sum_hi += std::exp((v - hi) / gamma);
        sum_lo += std::exp(-(v - lo) / gamma);
      }
      double smax = hi + gamma * std::log(sum_hi);
      double smin = lo - gamma * std::log(sum_lo);
      out.value += smax - smin;
      auto& grad = axis == 0 ? out.gx : out.gy;
      for (std::size_t i = 0; i < coords.size(); ++i) {
        if (slots[i] < 0) continue;
        double w_hi = std::exp((coords[i] - hi) / gamma) / sum_hi;
        double w_lo = std::exp(-(coords[i] - lo) / gamma) / sum_lo;
        grad[slots[i]] += w_hi - w_lo;
      }
    }
  }
  return out;
}

double PlaceModel::exact_hpwl_um() const {
  double total = 0.0;
  for (const auto& net : nets_) {
    double lx = std::numeric_limits<double>::max(), ly = lx;
    double ux = std::numeric_limits<double>::lowest(), uy = ux;
    for (const auto& pin : net) {
      double x = node_x(pin), y = node_y(pin);
      lx = std::min(lx, x);
      ux = std::max(ux, x);
      ly = std::min(ly, y);
      uy = std::max(uy, y);
    }
    total += (ux - lx) + (uy - ly);
  }
  return total;
}

ObjectiveTerm PlaceModel::density_penalty() const {
  ObjectiveTerm out;
  out.gx.assign(movable_.size(), 0.0);
  out.gy.assign(movable_.size(), 0.0);

  const std::size_t nbins = fixed_usage_.size();
  std::vector<double> usage = fixed_usage_;
  const double rlx = to_um(region_.lx), rly = to_um(region_.ly);

  auto bin_span = [&](double lo, double hi, double origin, double step,
                      int& b0, int& b1) {
    b0 = std::max(0, static_cast<int>(std::floor((lo - origin) / step)));
    b1 = std::min(grid_n_ - 1, static_cast<int>(std::floor((hi - origin) / step)));
  };

  for (std::size_t s = 0; s < movable_.size(); ++s) {
    const Node& n = nodes_[movable_[s]];
    double lx = mx_[s] - n.w / 2, ux = mx_[s] + n.w / 2;
    double ly = my_[s] - n.h / 2, uy = my_[s] + n.h / 2;
    int bx0, bx1, by0, by1;
    bin_span(lx, ux, rlx, bin_w_, bx0, bx1);
    bin_span(ly, uy, rly, bin_h_, by0, by1);
    for (int by = by0; by <= by1; ++by) {
      double bl = rly + by * bin_h_, bu = bl + bin_h_;
      double oy = std::min(uy, bu) - std::max(ly, bl);
      if (oy <= 0) continue;
      for (int bx = bx0; bx <= bx1; ++bx) {
        double bl2 = rlx + bx * bin_w_, bu2 = bl2 + bin_w_;
        double ox = std::min(ux, bu2) - std::max(lx, bl2);
        if (ox <= 0) continue;
        usage[static_cast<std::size_t>(by) * grid_n_ + bx] += ox * oy;
      }
    }
  }

  const double cap = bin_w_ * bin_h_ * target_density_;
  std::vector<double> over(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    over[b] = std::max(0.0, usage[b] - cap);
    out.value += over[b] * over[b];
  }

  for (std::size_t s = 0; s < movable_.size(); ++s) {
    const Node& n = nodes_[movable_[s]];
    double lx = mx_[s] - n.w / 2, ux = mx_[s] + n.w / 2;
    double ly = my_[s] - n.h / 2, uy = my_[s] + n.h / 2;
    int bx0, bx1, by0, by1;
    bin_span(lx, ux, rlx, bin_w_, bx0, bx1);
    bin_span(ly, uy, rly, bin_h_, by0, by1);
    for (int by = by0; by <= by1; ++by) {
      double bl = rly + by * bin_h_, bu = bl + bin_h_;
      double oy = std::min(uy, bu) - std::max(ly, bl);
      if (oy <= 0) continue;
      double doy = (uy < bu ? 1.0 : 0.0) - (ly > bl ? 1.0 : 0.0);
      for (int bx = bx0; bx <= bx1; ++bx) {
        double bl2 = rlx + bx * bin_w_, bu2 = bl2 + bin_w_;
        double ox = std::min(ux, bu2) - std::max(lx, bl2);
        if (ox <= 0) continue;
        double o = over[static_cast<std::size_t>(by) * grid_n_ + bx];
        if (o <= 0) continue;
        double dox = (ux < bu2 ? 1.0 : 0.0) - (lx > bl2 ? 1.0 : 0.0);
        out.gx[s] += 2.0 * o * dox * oy;
        out.gy[s] += 2.0 * o * ox * doy;
      }
    }
  }
  return out;
}

double PlaceModel::overflow_ratio() const {
  if (total_movable_area_ <= 0.0) return 0.0;
  const std::size_t nbins = fixed_usage_.size();
  std::vector<double> mov(nbins, 0.0);
  const double rlx = to_um(region_.lx), rly = to_um(region_.ly);
  for (std::size_t s = 0; s < movable_.size(); ++s) {
    const Node& n = nodes_[movable_[s]];
    double lx = mx_[s] - n.w / 2, ux = mx_[s] + n.w / 2;
    double ly = my_[s] - n.h / 2, uy = my_[s] + n.h / 2;
    int bx0 = std::max(0, static_cast<int>(std::floor((lx - rlx) / bin_w_)));
    int bx1 = std::min(grid_n_ - 1, static_cast<int>(std::floor((ux - rlx) / bin_w_)));
    int by0 = std::max(0, static_cast<int>(std::floor((ly - rly) / bin_h_)));
    int by1 = std::min(grid_n_ - 1, static_cast<int>(std::floor((uy - rly) / bin_h_)));
    for (int by = by0; by <= by1; ++by) {
      double bl = rly + by * bin_h_, bu = bl + bin_h_;
      double oy = std::min(uy, bu) - std::max(ly, bl);
      if (oy <= 0) continue;
      for (int bx = bx0; bx <= bx1; ++bx) {
        double bl2 = rlx + bx * bin_w_, bu2 = bl2 + bin_w_;
        double ox = std::min(ux, bu2) - std::max(lx, bl2);
        if (ox <= 0) continue;
        mov[static_cast<std::size_t>(by) * grid_n_ + bx] += ox * oy;
      }
    }
  }
  const double bin_area = bin_w_ * bin_h_;
  double total_over = 0.0;
  for (std::size_t b = 0; b < nbins; ++b) {
    double free_cap = std::max(0.0, bin_area - fixed_usage_[b]);
    total_over += std::max(0.0, mov[b] - target_density_ * free_cap);
  }
  return total_over / total_movable_area_;
}

void PlaceModel::clamp() {
  const double rlx = to_um(region_.lx), rux = to_um(region_.ux);
  const double rly = to_um(region_.ly), ruy = to_um(region_.uy);
  for (std::size_t s = 0; s < movable_.size(); ++s) {
    const Node& n = nodes_[movable_[s]];
    double half_w = n.w / 2, half_h = n.h / 2;
    if (rux - rlx >= n.w)
      mx_[s] = std::clamp(mx_[s], rlx + half_w, rux - half_w);
    else
      mx_[s] = (rlx + rux) / 2;
    if (ruy - rly >= n.h)
      my_[s] = std::clamp(my_[s], rly + half_h, ruy - half_h);
    else
      my_[s] = (rly + ruy) / 2;
  }
}

void PlaceModel::commit(Design& d) const {
  for (std::size_t s = 0; s < movable_.size(); ++s) {
    const Node& n = nodes_[movable_[s]];
    Component& c = d.components[movable_[s]];
    c.x = from_um(mx_[s] - n.w / 2);
    c.y = from_um(my_[s] - n.h / 2);
    if (c.status == PlaceStatus::UNPLACED) c.status = PlaceStatus::PLACED;
  }
}

GlobalPlaceStats global_place(Design& d, const Library& lib,
                              const std::vector<int>& movable,
                              const Rect& region, const PlacerParams& params) {
  params.validate();
  GlobalPlaceStats stats;
  if (movable.empty()) return stats;

  PlaceModel model(d, lib, movable, region, params.bin_grid,
                   params.target_density);
  const double gamma = params.gamma_um > 0
                           ? params.gamma_um
                           : 4.0 * std::max(model.bin_w(), model.bin_h());

  // Center initialization with jitter of up to one bin.
  Rng rng(params.seed);
  const double cx = to_um(region.lx + region.ux) / 2.0;
  const double cy = to_um(region.ly + region.uy) / 2.0;
  for (int s = 0; s < model.num_movable(); ++s) {
    model.xs()[s] = cx + rng.uniform(-model.bin_w(), model.bin_w());
    model.ys()[s] = cy + rng.uniform(-model.bin_h(), model.bin_h());
  }
  model.clamp();

  auto objective = [&](double lambda, ObjectiveTerm* wl_out,
                       ObjectiveTerm* den_out) {
    ObjectiveTerm wl = model.smooth_wirelength(gamma);
    ObjectiveTerm den = model.density_penalty();
    if (wl_out) *wl_out = std::move(wl);
    if (den_out) *den_out = std::move(den);
    const ObjectiveTerm& w = wl_out ? *wl_out : wl;
    const ObjectiveTerm& dn = den_out ? *den_out : den;
    return w.value + lambda * dn.value;
  };

  auto inf_norm = [](const ObjectiveTerm& t) {
    double m = 0.0;
    for (double v : t.gx) m = std::max(m, std::abs(v));
    for (double v : t.gy) m = std::max(m, std::abs(v));
    return m;
  };

  // lambda0 from the gradient-norm ratio at iteration 0.
  double lambda = params.lambda0;
  {
    ObjectiveTerm wl = model.smooth_wirelength(gamma);
    ObjectiveTerm den = model.density_penalty();
    if (lambda <= 0.0) {
      double nw = inf_norm(wl), nd = inf_norm(den);
      lambda = nd > 0.0 ? 0.1 * nw / nd : 0.0;
    }
  }

  const double step0 =
      params.step_um > 0 ? params.step_um : std::max(model.bin_w(), model.bin_h());
  double step = step0;
  const int n = model.num_movable();
  std::vector<double> vx(n, 0.0), vy(n, 0.0);
  std::vector<double> sx(n), sy(n);

  double best_hpwl = std::numeric_limits<double>::max();
  int stagnant = 0;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    ObjectiveTerm wl, den;
    double obj = objective(lambda, &wl, &den);
    if (!std::isfinite(obj))
      throw ConvergenceError("objective diverged to a non-finite value");

    double gmax = 0.0;
    for (int s = 0; s < n; ++s) {
      double gx = wl.gx[s] + lambda * den.gx[s];
      double gy = wl.gy[s] + lambda * den.gy[s];
      sx[s] = gx;
      sy[s] = gy;
      gmax = std::max(gmax, std::max(std::abs(gx), std::abs(gy)));
    }
    if (gmax <= 0.0) break;

    std::vector<double> x0 = model.xs(), y0 = model.ys();
    bool accepted = false;
    for (int attempt = 0; attempt < 20 && !accepted; ++attempt) {
      const double scale = step / gmax;
      for (int s = 0; s < n; ++s) {
        double nvx = params.momentum * vx[s] - scale * sx[s];
        double nvy = params.momentum * vy[s] - scale * sy[s];
        model.xs()[s] = x0[s] + nvx;
        model.ys()[s] = y0[s] + nvy;
      }
      model.clamp();
      double trial = objective(lambda, nullptr, nullptr);
      if (std::isfinite(trial) && trial <= obj) {
        for (int s = 0; s < n; ++s) {
          vx[s] = model.xs()[s] - x0[s];
          vy[s] = model.ys()[s] - y0[s];
        }
        step = std::min(step * 1.1, 2.0 * step0);
        stats.trace.push_back({obj, trial, lambda, 0.0});
        accepted = true;
      } else {
        if (attempt == 19 && !std::isfinite(trial))
          throw ConvergenceError("step halving failed to restore a finite objective");
        step *= 0.5;
        std::fill(vx.begin(), vx.end(), 0.0);
        std::fill(vy.begin(), vy.end(), 0.0);
      }
    }
    if (!accepted) {
      model.xs() = x0;
      model.ys() = y0;
      break;
    }

    ++stats.iterations;
    double overflow = model.overflow_ratio();
    stats.trace.back().overflow = overflow;

    double hpwl = model.exact_hpwl_um();
    if (hpwl < best_hpwl * (1.0 - 1e-5)) {
      best_hpwl = hpwl;
      stagnant = 0;
    } else {
      ++stagnant;
    }
    if (overflow <= params.overflow_stop && stagnant >= 25) break;

    lambda = std::max(lambda * params.lambda_growth, 1e-12);
  }

  stats.final_overflow = model.overflow_ratio();
  stats.final_hpwl_um = model.exact_hpwl_um();
  model.commit(d);
  return stats;
}

}  // namespace open3d
