#include "open3d/thermal.hpp"

#include <algorithm>
#include <cmath>

namespace open3d {

void ThermalParams::validate() const {
  if (grid_n < 1) throw Error("thermal grid_n must be >= 1");
  if (power_scale <= 0.0) throw Error("thermal power_scale must be positive");
  if (r_lateral <= 0.0 || r_sink <= 0.0 || r_vertical < 0.0 ||
      g_sink_top < 0.0)
    throw Error("thermal resistances must be positive (r_vertical may be 0)");
  if (max_sweeps < 1) throw Error("thermal max_sweeps must be >= 1");
}

std::vector<double> aggregate_power(const Design& d, const Library& lib,
                                    const std::optional<PowerMap>& power,
                                    int grid_n, double scale) {
  const int n = grid_n;
  const int planes = d.is_3d() ? 2 : 1;
  std::vector<double> out(static_cast<std::size_t>(planes) * n * n, 0.0);
  const std::vector<double> comp_w = component_power_w(d, lib, power);

  for (std::size_t ci = 0; ci < d.components.size(); ++ci) {
    const Component& c = d.components[ci];
    if (c.status == PlaceStatus::UNPLACED)
      throw Error("thermal aggregation: component " + c.name + " is unplaced");
    const int plane = (c.die == Die::TOP) ? 1 : 0;
    const Rect& die_rect = (plane == 1) ? *d.die_top : d.die_bottom;
    const double bw = to_um(die_rect.width()) / n;
    const double bh = to_um(die_rect.height()) / n;
    const double x0 = to_um(die_rect.lx), y0 = to_um(die_rect.ly);

    Rect r = component_rect(c, lib.at(c.master));
    const double rlx = to_um(r.lx), rly = to_um(r.ly);
    const double rux = to_um(r.ux), ruy = to_um(r.uy);
    const double area = (rux - rlx) * (ruy - rly);
    if (area <= 0.0 || comp_w[ci] == 0.0) continue;
    const double w_per_um2 = comp_w[ci] * scale / area;

    int bx0 = std::clamp(static_cast<int>(std::floor((rlx - x0) / bw)), 0, n - 1);
    int bx1 = std::clamp(static_cast<int>(std::floor((rux - x0) / bw)), 0, n - 1);
    int by0 = std::clamp(static_cast<int>(std::floor((rly - y0) / bh)), 0, n - 1);
    int by1 = std::clamp(static_cast<int>(std::floor((ruy - y0) / bh)), 0, n - 1);
    for (int by = by0; by <= by1; ++by) {
      double oy = std::min(ruy, y0 + (by + 1) * bh) - std::max(rly, y0 + by * bh);
      if (oy <= 0.0) continue;
      for (int bx = bx0; bx <= bx1; ++bx) {
        double ox =
            std::min(rux, x0 + (bx + 1) * bw) - std::max(rlx, x0 + bx * bw);
        if (ox <= 0.0) continue;
        out[static_cast<std::size_t>(plane) * n * n + by * n + bx] +=
            w_per_um2 * ox * oy;
      }
    }
  }
  return out;
}

ThermalNetwork build_network(const Design& d, const Library& lib,
                             const std::optional<PowerMap>& power,
                             const ThermalParams& params) {
  params.validate();
  const int n = params.grid_n;
  const int design_planes = d.is_3d() ? 2 : 1;
  const bool merge = d.is_3d() && params.r_vertical == 0.0;

  ThermalNetwork net;
  net.grid_n = n;
  net.num_planes = merge ? 1 : design_planes;
  net.power = aggregate_power(d, lib, power, n, params.power_scale);
  if (merge) {
    for (int i = 0; i < n * n; ++i) net.power[i] += net.power[n * n + i];
    net.power.resize(static_cast<std::size_t>(n) * n);
  }
  net.sink_g.assign(net.num_nodes(), 0.0);

  const double die_w_mm = to_um(d.die_bottom.width()) / 1000.0;
  const double die_h_mm = to_um(d.die_bottom.height()) / 1000.0;
  const double dx = die_w_mm / n, dy = die_h_mm / n;
  const double cell_area = dx * dy;
  constexpr double kRefCellArea = 0.01;  // mm^2, 10x10 grid on 1 mm^2

  const double g_x = 1.0 / (params.r_lateral * (dx / dy));
  const double g_y = 1.0 / (params.r_lateral * (dy / dx));
  // r_sink and r_vertical are per-cell values at the 10x10 / 1 mm^2
  // reference; contact conductance scales with the actual cell footprint.
  const double g_sink = cell_area / (params.r_sink * kRefCellArea);
  const double g_vert = (params.r_vertical > 0.0)
                            ? cell_area / (params.r_vertical * kRefCellArea)
                            : 0.0;

  for (int plane = 0; plane < net.num_planes; ++plane) {
    const int base = plane * n * n;
    for (int row = 0; row < n; ++row)
      for (int col = 0; col < n; ++col) {
        const int node = base + row * n + col;
        if (col + 1 < n) net.edges.push_back({node, node + 1, g_x});
        if (row + 1 < n) net.edges.push_back({node, node + n, g_y});
        if (plane == 0) {
          net.sink_g[node] = g_sink;
          if (net.num_planes == 2)
            net.edges.push_back({node, node + n * n, g_vert});
        } else {
          net.sink_g[node] = params.g_sink_top;
        }
      }
  }
  if (merge) {
    // Merged planes see both sinks.
    for (int i = 0; i < n * n; ++i) net.sink_g[i] += params.g_sink_top;
  }
  return net;
}

namespace {

struct Assembled {
  std::vector<std::vector<std::pair<int, double>>> adj;  // (neighbor, g)
  std::vector<double> diag;  // sink_g + sum of incident g
  std::vector<double> rhs;   // power + sink_g * ambient
};

Assembled assemble(const ThermalNetwork& net, const ThermalParams& params) {
  const int nn = net.num_nodes();
  Assembled a;
  a.adj.resize(nn);
  a.diag.assign(nn, 0.0);
  a.rhs.assign(nn, 0.0);
  for (const auto& e : net.edges) {
    a.adj[e.a].push_back({e.b, e.g});
    a.adj[e.b].push_back({e.a, e.g});
    a.diag[e.a] += e.g;
    a.diag[e.b] += e.g;
  }
  for (int i = 0; i < nn; ++i) {
    a.diag[i] += net.sink_g[i];
    a.rhs[i] = net.power[i] + net.sink_g[i] * params.ambient_c;
    if (a.diag[i] <= 0.0)
      throw Error("thermal node " + std::to_string(i) +
                  " has no conductance path");
  }
  return a;
}

double residual_inf(const Assembled& a, const std::vector<double>& t) {
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double flow = a.diag[i] * t[i];
    for (const auto& [j, g] : a.adj[i]) flow -= g * t[j];
    worst = std::max(worst, std::abs(flow - a.rhs[i]));
  }
  return worst;
}

}  // namespace

ThermalSolution solve_steady(const ThermalNetwork& net,
                             const ThermalParams& params) {
  params.validate();
  const Assembled a = assemble(net, params);
  const int nn = net.num_nodes();

  double p_max = 1.0;
  for (double p : a.rhs) p_max = std::max(p_max, std::abs(p));
  const double tol = 1e-9 * p_max;

  ThermalSolution sol;

  // The all-ambient field is exact whenever no power is injected.
  sol.temps_c.assign(nn, params.ambient_c);
  sol.residual = residual_inf(a, sol.temps_c);
  if (sol.residual <= tol) {
    sol.sweeps = 0;
    sol.t_max_c = params.ambient_c;
    return sol;
  }

  // Small systems go straight to the exact direct solve; Gauss-Seidel is for
  // grids too large to eliminate densely.
  if (nn <= 1000) {
    sol.temps_c = solve_dense(net, params);
    sol.sweeps = 0;
    sol.residual = residual_inf(a, sol.temps_c);
    sol.t_max_c = *std::max_element(sol.temps_c.begin(), sol.temps_c.end());
    return sol;
  }

  for (int sweep = 1; sweep <= params.max_sweeps; ++sweep) {
    for (int i = 0; i < nn; ++i) {
      double acc = a.rhs[i];
      for (const auto& [j, g] : a.adj[i]) acc += g * sol.temps_c[j];
      sol.temps_c[i] = acc / a.diag[i];
    }
    sol.sweeps = sweep;
    // Residual checked every few sweeps; it dominates the sweep cost.
    if (sweep % 4 == 0 || sweep == params.max_sweeps) {
      sol.residual = residual_inf(a, sol.temps_c);
      if (sol.residual <= tol) {
        sol.t_max_c = *std::max_element(sol.temps_c.begin(), sol.temps_c.end());
        return sol;
      }
    }
  }
  throw ConvergenceError("thermal solve did not converge in " +
                         std::to_string(params.max_sweeps) + " sweeps");
}

std::vector<double> solve_dense(const ThermalNetwork& net,
                                const ThermalParams& params) {
  const Assembled a = assemble(net, params);
  const int nn = net.num_nodes();
  std::vector<std::vector<double>> m(nn, std::vector<double>(nn + 1, 0.0));
  for (int i = 0; i < nn; ++i) {
    m[i][i] = a.diag[i];
    for (const auto& [j, g] : a.adj[i]) m[i][j] -= g;
    m[i][nn] = a.rhs[i];
  }
  // Partial-pivot Gaussian elimination.
  for (int col = 0; col < nn; ++col) {
    int piv = col;
    for (int r = col + 1; r < nn; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    if (m[col][col] == 0.0) throw Error("singular thermal system");
    for (int r = 0; r < nn; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (int k = col; k <= nn; ++k) m[r][k] -= f * m[col][k];
    }
  }
  std::vector<double> t(nn);
  for (int i = 0; i < nn; ++i) t[i] = m[i][nn] / m[i][i];
  return t;
}

ThermalSolution evaluate_thermal(const Design& d, const Library& lib,
                                 const std::optional<PowerMap>& power,
                                 const ThermalParams& params) {
  return solve_steady(build_network(d, lib, power, params), params);
}

std::pair<double, double> compare_2d_3d(const Design& d2, const Library& lib2,
                                        const Design& d3, const Library& lib3,
                                        const ThermalParams& params,
                                        const std::optional<PowerMap>& power2,
                                        const std::optional<PowerMap>& power3) {
  const double t2 = evaluate_thermal(d2, lib2, power2, params).t_max_c;
  const double t3 = evaluate_thermal(d3, lib3, power3, params).t_max_c;
  return {t2, t3};
}

}  // namespace open3d
