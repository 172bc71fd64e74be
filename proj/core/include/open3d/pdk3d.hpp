#ifndef OPEN3D_PDK3D_HPP
#define OPEN3D_PDK3D_HPP

#include <unordered_map>

#include "open3d/model.hpp"

namespace open3d {

struct Pdk3dConfig {
  DbUnit hbt_size = 500;       // 0.5 um square bond cut
  DbUnit hbt_pitch = 1500;     // 1.5 um
  DbUnit shrunk_width = 190;   // one site
  DbUnit shrunk_height = 1400; // single row

  void validate() const;
};

// Duplicates the metal/via stack of a 2D technology and inverts the copy
// above the topmost layer, inserting one BOND cut layer between the two
// halves. Layer k of the bottom half pairs with layer 2n+1-k of the top half.
Technology mirror_metal_stack(const Technology& tech2d,
                              const Pdk3dConfig& config);

// Bijective, self-inverse name map pairing bottom-die layers with their
// top-die mirror images (the bond layer maps to itself).
std::unordered_map<std::string, std::string> layer_mirror_map(
    const Technology& tech3d);

// For every BASE master M emits M_bottom, M_top, M_bottom_shrunk and
// M_top_shrunk, sorted by base master name. Top variants have all pin rects
// and obstructions remapped through the layer mirror. Shrunk variants
// collapse the outline to one site; their pin rects are re-anchored so that
// a center-preserving instance swap keeps absolute pin positions.
std::vector<CellMaster> split_library(const std::vector<CellMaster>& masters,
                                      const Technology& tech3d,
                                      const Pdk3dConfig& config);

// Offset applied to a component origin when swapping a full master for its
// shrunk variant so the instance stays centered.
Point shrunk_anchor_shift(const CellMaster& full, const CellMaster& shrunk);

}  // namespace open3d

#endif
