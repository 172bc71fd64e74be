#ifndef OPEN3D_SKYLINE_HPP
#define OPEN3D_SKYLINE_HPP

#include <vector>

#include "open3d/model.hpp"

namespace open3d {

struct SkylineSegment {
  DbUnit x_start = 0;
  DbUnit x_end = 0;
  DbUnit height = 0;
  friend bool operator==(const SkylineSegment&, const SkylineSegment&) = default;
};

// Upper envelope of the packed region. Segments partition [0, width] exactly
// and adjacent segments always have distinct heights.
class Skyline {
 public:
  explicit Skyline(DbUnit width);

  const std::vector<SkylineSegment>& segments() const { return segments_; }
  DbUnit width() const { return width_; }

  // Max height over [x, x+w).
  DbUnit height_over(DbUnit x, DbUnit w) const;
  // Sets [x, x+w) to new_height and re-merges equal neighbors.
  void raise(DbUnit x, DbUnit w, DbUnit new_height);

  DbUnit max_height() const;
  double area_under_um2() const;

 private:
  DbUnit width_;
  std::vector<SkylineSegment> segments_;
};

struct TilingParams {
  double height_target = 0.8;
  DbUnit halo_step = 500;  // 0.5 um
  DbUnit halo_max = 50000; // 50 um

  void validate() const;
};

struct MacroPosition {
  int comp_index = -1;
  DbUnit x = 0;  // macro origin after halo removal
  DbUnit y = 0;
};

struct SkylineResult {
  bool feasible = false;
  std::vector<MacroPosition> positions;
  DbUnit max_height = 0;  // of the final skyline, halo included
};

// Sorted by decreasing area, ties by decreasing height, then name ascending.
std::vector<int> order_macros(const Design& d, const Library& lib,
                              const std::vector<int>& comp_indices);

// Packs halo-inflated macros bottom-left: candidate x positions are segment
// left edges; the feasible candidate with minimal y (then minimal x) wins.
SkylineResult skyline_place(const Design& d, const Library& lib,
                            const std::vector<int>& ordered, const Rect& die,
                            DbUnit halo);

struct TilingOutcome {
  DbUnit halo = 0;
  SkylineResult result;
};

// Sweeps the halo upward from zero until the skyline reaches
// height_target * die height (or the largest feasible halo when the sweep
// hits infeasibility first), then fixes all TOP macros at the chosen
// positions. Throws InfeasibleError when halo 0 already fails.
TilingOutcome tile_top_die(Design& d, const Library& lib,
                           const TilingParams& params);

}  // namespace open3d

#endif
