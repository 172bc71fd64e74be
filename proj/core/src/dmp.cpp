#include <algorithm>

#include "open3d/placer.hpp"
#include "open3d/pdk3d.hpp"

namespace open3d {

void scale_to_minimal(Component& c, const Library& lib) {
  const CellMaster& full = lib.at(c.master);
  if (full.variant == MasterVariant::SHRUNK_TOP ||
      full.variant == MasterVariant::SHRUNK_BOTTOM)
    return;
  const CellMaster* shrunk = lib.find(c.master + "_shrunk");
  if (!shrunk) throw Error("missing shrunk variant for master " + c.master);
  const Point shift = shrunk_anchor_shift(full, *shrunk);
  c.x += shift.x;
  c.y += shift.y;
  c.master = shrunk->name;
}

namespace {

struct CompClasses {
  std::vector<int> top_macros, bottom_macros, bottom_cells, top_all;
};

CompClasses classify(const Design& d, const Library& lib) {
  CompClasses out;
  for (int i = 0; i < static_cast<int>(d.components.size()); ++i) {
    const Component& c = d.components[i];
    const bool macro = lib.at(c.master).is_macro();
    if (c.die == Die::TOP) {
      out.top_all.push_back(i);
      if (macro) out.top_macros.push_back(i);
    } else if (macro) {
      out.bottom_macros.push_back(i);
    } else {
      out.bottom_cells.push_back(i);
    }
  }
  return out;
}

std::vector<int> movable_of(const Design& d, const std::vector<int>& pool) {
  std::vector<int> out;
  for (int i : pool)
    if (d.components[i].status != PlaceStatus::FIXED) out.push_back(i);
  return out;
}

}  // namespace

void run_dmp(Design& d, const Library& lib, const PlacerParams& params,
             const Site& site) {
  if (!d.die_top) throw Error("run_dmp requires a 3D design");
  const CompClasses cls = classify(d, lib);

  // Stage a: bottom die shrunk and integrated onto the top plane; top macros
  // co-placed with everything, only their positions retained.
  {
    Design work = d;
    for (auto& c : work.components)
      if (c.die == Die::BOTTOM) scale_to_minimal(c, lib);
    std::vector<int> movable;
    for (int i = 0; i < static_cast<int>(work.components.size()); ++i)
      if (work.components[i].status != PlaceStatus::FIXED) movable.push_back(i);
    global_place(work, lib, movable, *d.die_top, params);
    for (int i : cls.top_macros) {
      d.components[i].x = work.components[i].x;
      d.components[i].y = work.components[i].y;
      d.components[i].orient = Orient::N;
      d.components[i].status = PlaceStatus::PLACED;
    }
    macro_legalize(d, lib, cls.top_macros, *d.die_top, site);
  }

  // Stage b: top macros projected shrunk and fixed; bottom macros co-placed
  // with the cells, only macro positions retained.
  {
    Design work = d;
    for (int i : cls.top_all) {
      scale_to_minimal(work.components[i], lib);
      work.components[i].status = PlaceStatus::FIXED;
    }
    std::vector<int> bottom_all = cls.bottom_macros;
    bottom_all.insert(bottom_all.end(), cls.bottom_cells.begin(),
                      cls.bottom_cells.end());
    std::sort(bottom_all.begin(), bottom_all.end());
    PlacerParams p = params;
    p.seed = params.seed + 1;
    global_place(work, lib, movable_of(work, bottom_all), d.die_bottom, p);
    for (int i : cls.bottom_macros) {
      d.components[i].x = work.components[i].x;
      d.components[i].y = work.components[i].y;
      d.components[i].orient = Orient::N;
      d.components[i].status = PlaceStatus::PLACED;
    }
    macro_legalize(d, lib, cls.bottom_macros, d.die_bottom, site);
  }

  // Stage c: all macros fixed, bottom cells placed and legalized.
  {
    Design work = d;
    for (int i : cls.top_all) {
      scale_to_minimal(work.components[i], lib);
      work.components[i].status = PlaceStatus::FIXED;
    }
    PlacerParams p = params;
    p.seed = params.seed + 2;
    global_place(work, lib, movable_of(work, cls.bottom_cells), d.die_bottom, p);
    legalize(work, lib, Die::BOTTOM, d.die_bottom, site);
    for (int i : cls.bottom_cells) {
      d.components[i].x = work.components[i].x;
      d.components[i].y = work.components[i].y;
      d.components[i].orient = work.components[i].orient;
      d.components[i].status = work.components[i].status;
    }
  }
}

void project_and_place_cells(Design& d, const Library& lib,
                             const PlacerParams& params, const Site& site) {
  const CompClasses cls = classify(d, lib);
  Design work = d;
  for (int i : cls.top_all) {
    scale_to_minimal(work.components[i], lib);
    work.components[i].status = PlaceStatus::FIXED;
  }
  std::vector<int> movable;
  for (int i : cls.bottom_macros) movable.push_back(i);
  for (int i : cls.bottom_cells) movable.push_back(i);
  movable = movable_of(work, movable);
  global_place(work, lib, movable, d.die_bottom, params);

  for (int i : cls.bottom_macros) {
    d.components[i].x = work.components[i].x;
    d.components[i].y = work.components[i].y;
    d.components[i].orient = Orient::N;
    d.components[i].status = PlaceStatus::PLACED;
  }
  macro_legalize(d, lib, cls.bottom_macros, d.die_bottom, site);

  for (int i : cls.bottom_cells) {
    d.components[i].x = work.components[i].x;
    d.components[i].y = work.components[i].y;
    d.components[i].status = work.components[i].status;
  }
  legalize(d, lib, Die::BOTTOM, d.die_bottom, site);
}

}  // namespace open3d
