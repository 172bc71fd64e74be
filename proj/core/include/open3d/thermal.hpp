#ifndef OPEN3D_THERMAL_HPP
#define OPEN3D_THERMAL_HPP

#include <optional>
#include <utility>
#include <vector>

#include "open3d/metrics.hpp"
#include "open3d/model.hpp"

namespace open3d {

struct ThermalParams {
  int grid_n = 10;
  double power_scale = 10.0;
  double ambient_c = 45.0;
  // Resistances are calibrated at a 10x10 grid on a 1 mm^2 die (square cells
  // of 0.01 mm^2) and scaled with the actual cell geometry: lateral by the
  // aspect ratio of the flow path, vertical/sink inversely with cell area.
  double r_lateral = 0.02;   // K/W between adjacent cells at square aspect
  double r_vertical = 0.5;   // K/W per cell pair between dies; 0 merges planes
  double r_sink = 2.0;       // K/W per bottom cell to ambient
  double g_sink_top = 0.0;   // extra top-die conductance to ambient, W/K
  int max_sweeps = 500000;

  void validate() const;
};

struct ThermalNetwork {
  int grid_n = 0;
  int num_planes = 1;  // bottom plane first, then top
  struct Edge {
    int a = 0, b = 0;
    double g = 0.0;  // conductance, W/K
  };
  std::vector<Edge> edges;
  std::vector<double> sink_g;  // per node, conductance to ambient
  std::vector<double> power;   // per node, already power_scale'd, W

  int num_nodes() const { return grid_n * grid_n * num_planes; }
};

// Per-node injected power: each component's power split among bins of its die
// plane proportionally to area overlap, times scale. Node index is
// plane*grid_n^2 + row*grid_n + col with row along y.
std::vector<double> aggregate_power(const Design& d, const Library& lib,
                                    const std::optional<PowerMap>& power,
                                    int grid_n, double scale);

// RC network of the stack. Heat leaves through the bottom-die sink; the top
// die couples to ambient only through the bottom die unless g_sink_top > 0.
// r_vertical == 0 collapses both planes into one (exactly merged nodes).
ThermalNetwork build_network(const Design& d, const Library& lib,
                             const std::optional<PowerMap>& power,
                             const ThermalParams& params);

struct ThermalSolution {
  std::vector<double> temps_c;  // per node, network ordering
  double t_max_c = 0.0;
  int sweeps = 0;
  double residual = 0.0;
};

// Gauss-Seidel on G*T = P with the ambient Dirichlet tie folded into the
// right-hand side; throws ConvergenceError at the sweep cap.
ThermalSolution solve_steady(const ThermalNetwork& net,
                             const ThermalParams& params);

// Dense Gaussian-elimination solve of the same system; O(n^3), intended as a
// cross-check for small networks.
std::vector<double> solve_dense(const ThermalNetwork& net,
                                const ThermalParams& params);

ThermalSolution evaluate_thermal(const Design& d, const Library& lib,
                                 const std::optional<PowerMap>& power,
                                 const ThermalParams& params);

// Peak temperature of a 2D and a 3D design under identical parameters.
std::pair<double, double> compare_2d_3d(
    const Design& d2, const Library& lib2, const Design& d3,
    const Library& lib3, const ThermalParams& params,
    const std::optional<PowerMap>& power2 = std::nullopt,
    const std::optional<PowerMap>& power3 = std::nullopt);

}  // namespace open3d

#endif
