#ifndef OPEN3D_LEFDEF_HPP
#define OPEN3D_LEFDEF_HPP

#include <optional>
#include <string>
#include <vector>

#include "open3d/model.hpp"

namespace open3d {

// Subset LEF/DEF readers and writers. Statements outside the subset are
// skipped and recorded as warnings, never treated as errors.

struct LefFile {
  std::optional<Technology> tech;  // present when LAYER statements occur
  std::vector<CellMaster> masters;
  std::vector<std::string> warnings;
};

LefFile parse_lef(const std::string& text);

// Emits VERSION/UNITS, LAYER/VIA/SITE when tech is present, then MACROs.
std::string write_lef(const std::optional<Technology>& tech,
                      const std::vector<CellMaster>& masters);

struct DefFile {
  Design design;
  std::vector<std::string> warnings;
};

DefFile parse_def(const std::string& text, const Library& masters);

enum class DefMode { COMBINED, TOP_ONLY, BOTTOM_ONLY };

// TOP_ONLY/BOTTOM_ONLY filter components and ports by die and restore full
// (non-shrunk) master names; nets keep only refs to retained endpoints and
// empty nets are dropped.
std::string write_def(const Design& d, DefMode mode = DefMode::COMBINED);

}  // namespace open3d

#endif
