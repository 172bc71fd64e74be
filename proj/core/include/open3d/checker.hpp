#ifndef OPEN3D_CHECKER_HPP
#define OPEN3D_CHECKER_HPP

#include <string>
#include <vector>

#include "open3d/model.hpp"

namespace open3d {

struct LegalityReport {
  int overlaps = 0;
  int off_site = 0;     // CORE cells off the site/row grid
  int outside_die = 0;
  int unplaced = 0;
  std::vector<std::string> messages;  // capped at 50 entries

  bool ok() const {
    return overlaps == 0 && off_site == 0 && outside_die == 0 && unplaced == 0;
  }
};

// Geometric legality over both dies: every component placed, inside its die
// outline, pairwise disjoint per die; CORE cells aligned to the site grid.
LegalityReport check_legal(const Design& d, const Library& lib,
                           const Site& site);

}  // namespace open3d

#endif
