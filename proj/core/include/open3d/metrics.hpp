#ifndef OPEN3D_METRICS_HPP
#define OPEN3D_METRICS_HPP

#include <map>
#include <optional>
#include <string>

#include "open3d/model.hpp"

namespace open3d {

// Area-proportional power fallback when no per-component file is supplied.
constexpr double kDefaultPowerDensityWPerMm2 = 0.05;

using PowerMap = std::map<std::string, double>;  // component name -> W

struct Report {
  double area_mm2 = 0.0;  // single-die footprint
  double hpwl_um = 0.0;
  int cut_nets = 0;
  int hbt_estimate = 0;
  double overflow_um2 = 0.0;
  double util_top = 0.0;
  double util_bottom = 0.0;
  double power_w = 0.0;
  std::optional<double> t_max_c;  // filled by the thermal stage
};

// Half-perimeter wirelength over all nets, dies projected onto one plane.
// Throws when a net references an UNPLACED component.
double hpwl_um(const Design& d, const Library& lib);

// Nets spanning both dies; one bond terminal each is the physical minimum.
int count_cut_nets(const Design& d, const Library& lib);
inline int hbt_estimate(const Design& d, const Library& lib) {
  return count_cut_nets(d, lib);
}

// Bin-density overflow: sum over bins of max(0, usage - target*capacity),
// computed per die and summed, in um^2.
double overflow_um2(const Design& d, const Library& lib, int grid_n,
                    double target);

// Per-component power: file entries when given (every component must be
// covered and no entry may reference an unknown component), otherwise
// area * kDefaultPowerDensityWPerMm2.
std::vector<double> component_power_w(const Design& d, const Library& lib,
                                      const std::optional<PowerMap>& power);
double power_proxy(const Design& d, const Library& lib,
                   const std::optional<PowerMap>& power);

// Fills everything except t_max_c.
Report make_report(const Design& d, const Library& lib, int overflow_grid_n,
                   double overflow_target,
                   const std::optional<PowerMap>& power = std::nullopt);

}  // namespace open3d

#endif
