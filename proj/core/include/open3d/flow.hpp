#ifndef OPEN3D_FLOW_HPP
#define OPEN3D_FLOW_HPP

#include <string>
#include <utility>
#include <vector>

#include "open3d/metrics.hpp"
#include "open3d/model.hpp"
#include "open3d/partition.hpp"
#include "open3d/pdk3d.hpp"
#include "open3d/placer.hpp"
#include "open3d/skyline.hpp"
#include "open3d/thermal.hpp"

namespace open3d {

enum class FlowKind { FLOW_2D, FLOW_3D_TILING, FLOW_3D_DMP };

const char* flow_name(FlowKind k);
FlowKind flow_from_name(const std::string& s);

struct FlowConfig {
  std::string tech_lef;
  std::string cells_lef;
  std::string def;
  FlowKind flow = FlowKind::FLOW_2D;
  double utilization = 0.5;
  double aspect = 1.0;
  std::uint64_t seed = 1;
  std::string out_dir;     // empty: compute only, write nothing
  std::string power_file;  // optional component -> watts JSON

  Pdk3dConfig pdk;
  PartitionParams partition;
  TilingParams tiling;
  PlacerParams placer;
  ThermalParams thermal;

  void validate() const;
};

// Parses the flow-run JSON config. Unknown keys are rejected.
FlowConfig parse_flow_config(const std::string& json_text);
PowerMap parse_power_json(const std::string& json_text);

struct FloorplanSpec {
  Rect die;           // per-die outline; 3D uses two identical outlines
  int num_rows = 0;
  bool two_dies = false;
};

// Die outline from total component area: 2D sized at area/utilization, 3D at
// exactly half of that per die, both at the given aspect ratio with each
// dimension rounded up to the site grid.
FloorplanSpec size_die(const Design& d, const Library& lib, FlowKind flow,
                       double utilization, double aspect, const Site& site);

// Seeded uniform port sampling over boundary slots (1 um pitch), all ports on
// the bottom die. When ports outnumber slots, spacing is relaxed to DBU
// granularity with a warning.
std::vector<std::string> place_io(const FloorplanSpec& spec, Design& d,
                                  std::uint64_t seed);

struct FlowResult {
  Report report;
  std::vector<std::pair<std::string, double>> stage_runtime_s;
  std::vector<std::string> warnings;
};

// End-to-end pipeline; writes report.json, DEFs, SVGs and runtimes.json into
// config.out_dir when set. Stage failures rethrow with the stage name
// prefixed, preserving the error type.
FlowResult run_flow(const FlowConfig& config);

// Flat JSON object with the report fields. runtime_s is always null (wall
// times would break the byte-determinism contract) with the reason inline;
// measured values go to runtimes_json.
std::string report_json(const Report& r);
std::string runtimes_json(
    const std::vector<std::pair<std::string, double>>& stages);

// Deterministic layout rendering: one panel per die, macros outlined, cells
// filled (density shading above 20k components).
std::string render_layout_svg(const Design& d, const Library& lib);

// Color-mapped temperature grid, one panel per plane, with a min/max legend.
std::string render_thermal_svg(const std::vector<double>& temps_c, int grid_n,
                               int planes);

}  // namespace open3d

#endif
