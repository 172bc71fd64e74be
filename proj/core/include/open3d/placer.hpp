#ifndef OPEN3D_PLACER_HPP
#define OPEN3D_PLACER_HPP

#include <cstdint>
#include <vector>

#include "open3d/model.hpp"

namespace open3d {

struct PlacerParams {
  double gamma_um = 0.0;        // wirelength smoothing; 0 = auto (4x bin size)
  int bin_grid = 64;            // clamped down for tiny designs
  double lambda0 = 0.0;         // 0 = auto from gradient-norm ratio
  double lambda_growth = 1.05;  // per iteration
  double target_density = 0.8;
  int max_iters = 1000;
  double overflow_stop = 0.07;
  double momentum = 0.9;
  double step_um = 0.0;         // max per-coordinate move; 0 = auto (one bin)
  std::uint64_t seed = 1;

  void validate() const;
};

struct ObjectiveTerm {
  double value = 0.0;
  std::vector<double> gx;  // per movable component, d value / d center
  std::vector<double> gy;
};

// Flattened placement view over one die plane: every component and port of
// the design participates (fixed ones as anchors/obstacles); gradients flow
// to the chosen movable subset only. All coordinates are centers in microns.
class PlaceModel {
 public:
  PlaceModel(const Design& d, const Library& lib, std::vector<int> movable,
             const Rect& region, int bin_grid, double target_density);

  int num_movable() const { return static_cast<int>(movable_.size()); }
  const std::vector<int>& movable() const { return movable_; }

  std::vector<double>& xs() { return mx_; }
  std::vector<double>& ys() { return my_; }
  const std::vector<double>& xs() const { return mx_; }
  const std::vector<double>& ys() const { return my_; }

  double bin_w() const { return bin_w_; }
  double bin_h() const { return bin_h_; }
  int grid_n() const { return grid_n_; }
  const Rect& region() const { return region_; }

  // Log-sum-exp smoothed HPWL over all nets with >= 2 pins. Always an upper
  // bound on the exact HPWL.
  ObjectiveTerm smooth_wirelength(double gamma_um) const;
  double exact_hpwl_um() const;

  // Quadratic bin-overflow penalty: sum_b max(0, usage - target*capacity)^2
  // with usage covering movable and fixed area.
  ObjectiveTerm density_penalty() const;

  // Movable overflow against free (fixed-excluded) capacity, normalized by
  // total movable area; the global_place stopping signal.
  double overflow_ratio() const;

  // Clamps every movable center so the component lies inside the region.
  void clamp();

  // Writes movable centers back as rounded DBU origins with status PLACED.
  void commit(Design& d) const;

 private:
  struct Node {
    double w = 0.0, h = 0.0;  // um
    double x = 0.0, y = 0.0;  // center, um; fixed nodes never move
    int movable_slot = -1;
  };
  struct PinEntry {
    int node = -1;  // -1: port (absolute position in ox/oy)
    double ox = 0.0, oy = 0.0;
  };

  double node_x(const PinEntry& p) const;
  double node_y(const PinEntry& p) const;

  Rect region_;
  double target_density_;
  int grid_n_ = 1;
  double bin_w_ = 1.0, bin_h_ = 1.0;
  std::vector<Node> nodes_;
  std::vector<int> movable_;            // component indices
  std::vector<double> mx_, my_;         // movable centers
  std::vector<std::vector<PinEntry>> nets_;
  std::vector<double> fixed_usage_;     // per bin, um^2
  double total_movable_area_ = 0.0;
};

struct IterStat {
  double objective_before = 0.0;
  double objective_after = 0.0;
  double lambda = 0.0;
  double overflow = 0.0;
};

struct GlobalPlaceStats {
  int iterations = 0;
  double final_overflow = 0.0;
  double final_hpwl_um = 0.0;
  std::vector<IterStat> trace;
};

// Momentum gradient descent on smoothed wirelength + lambda * density with
// geometric lambda growth and monotone step acceptance (step halving on a
// worse or non-finite trial). Deterministic given the seed.
GlobalPlaceStats global_place(Design& d, const Library& lib,
                              const std::vector<int>& movable,
                              const Rect& region, const PlacerParams& params);

// Swaps the component master for its shrunk variant, center-anchored so that
// absolute pin positions are unchanged. Identity for already-shrunk
// components.
void scale_to_minimal(Component& c, const Library& lib);

struct LegalizeStats {
  int moved = 0;
  double mean_displacement_um = 0.0;
  double max_displacement_um = 0.0;
};

// Greedy row-based legalization of CORE cells on one die: cells sorted by x,
// each assigned to the row/site slot of minimal displacement. FIXED
// components and macros act as blockages. Alternating rows flip to FS.
LegalizeStats legalize(Design& d, const Library& lib, Die die, const Rect& die_rect,
                       const Site& site);

// Min-displacement overlap removal for macros after mixed-size global
// placement: corner candidates off already-legalized macros, site-aligned.
void macro_legalize(Design& d, const Library& lib,
                    const std::vector<int>& macro_indices, const Rect& die_rect,
                    const Site& site);

// Three-stage pseudo-3D placement: (a) top-die macro placement with the
// bottom die shrunk and integrated, (b) bottom-die macro placement with top
// macros projected shrunk, (c) bottom-die cell placement and legalization.
void run_dmp(Design& d, const Library& lib, const PlacerParams& params,
             const Site& site);

// Tiling-flow companion: top macros already FIXED; projects them shrunk and
// runs mixed-size placement plus legalization of the bottom die.
void project_and_place_cells(Design& d, const Library& lib,
                             const PlacerParams& params, const Site& site);

}  // namespace open3d

#endif
