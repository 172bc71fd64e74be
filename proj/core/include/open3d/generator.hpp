#ifndef OPEN3D_GENERATOR_HPP
#define OPEN3D_GENERATOR_HPP

#include <cstdint>
#include <string>

#include "open3d/model.hpp"

namespace open3d {

struct GenParams {
  int num_macros = 8;
  int num_cells = 400;
  int num_ports = 24;
  int num_nets = 700;
  // Macro masters get log-normal footprints rescaled so total macro area is
  // this fraction of total component area.
  double macro_area_frac = 0.35;
  std::uint64_t seed = 1;

  void validate() const;
};

// Named presets; "small" keeps runs in the sub-second range, "ariane-like"
// matches the scale of a mid-size RISC-V core netlist (132 macros, ~168k
// cells, ~204k nets).
GenParams preset_params(const std::string& preset, std::uint64_t seed);

struct Generated {
  Technology tech;                  // 2D stack, 10 routing layers, one site
  std::vector<CellMaster> masters;  // BASE masters referenced by the design
  Design design;                    // components unplaced, nets wired
};

// Seeded synthetic netlist: macros with log-normal sizes, row-height cells,
// clustered multi-pin nets with mostly-local connectivity, boundary ports.
Generated generate_design(const GenParams& params);

}  // namespace open3d

#endif
