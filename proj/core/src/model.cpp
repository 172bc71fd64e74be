#include "open3d/model.hpp"

#include <limits>

namespace open3d {

const Layer* Technology::find_layer(const std::string& name) const {
  for (const auto& l : layers)
    if (l.name == name) return &l;
  return nullptr;
}

std::vector<const Layer*> Technology::routing_layers() const {
  std::vector<const Layer*> out;
  for (const auto& l : layers)
    if (l.kind == LayerKind::ROUTING) out.push_back(&l);
  return out;
}

bool Technology::has_bond_layer() const {
  for (const auto& l : layers)
    if (l.die_side == DieSide::BOND) return true;
  return false;
}

Point MasterPin::center_2x() const {
  if (rects.empty()) return {0, 0};
  DbUnit lx = std::numeric_limits<DbUnit>::max(), ly = lx;
  DbUnit ux = std::numeric_limits<DbUnit>::min(), uy = ux;
  for (const auto& r : rects) {
    lx = std::min(lx, r.rect.lx);
    ly = std::min(ly, r.rect.ly);
    ux = std::max(ux, r.rect.ux);
    uy = std::max(uy, r.rect.uy);
  }
  return {lx + ux, ly + uy};
}

const MasterPin* CellMaster::find_pin(const std::string& pin_name) const {
  for (const auto& p : pins)
    if (p.name == pin_name) return &p;
  return nullptr;
}

namespace {
bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}
}  // namespace

MasterVariant variant_from_name(const std::string& name) {
  if (ends_with(name, "_top_shrunk")) return MasterVariant::SHRUNK_TOP;
  if (ends_with(name, "_bottom_shrunk")) return MasterVariant::SHRUNK_BOTTOM;
  if (ends_with(name, "_top")) return MasterVariant::TOP;
  if (ends_with(name, "_bottom")) return MasterVariant::BOTTOM;
  return MasterVariant::BASE;
}

std::string base_master_name(const std::string& name) {
  for (const char* suf : {"_top_shrunk", "_bottom_shrunk", "_top", "_bottom"})
    if (ends_with(name, suf)) return name.substr(0, name.size() - std::string(suf).size());
  return name;
}

void Library::add(CellMaster m) {
  auto [it, inserted] = index_.emplace(m.name, masters.size());
  if (!inserted) throw Error("duplicate master: " + m.name);
  masters.push_back(std::move(m));
}

const CellMaster* Library::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &masters[it->second];
}

const CellMaster& Library::at(const std::string& name) const {
  const CellMaster* m = find(name);
  if (!m) throw Error("unknown master: " + name);
  return *m;
}

DesignIndex::DesignIndex(const Design& d) {
  for (int i = 0; i < static_cast<int>(d.components.size()); ++i)
    comps_.emplace(d.components[i].name, i);
  for (int i = 0; i < static_cast<int>(d.io_ports.size()); ++i)
    ports_.emplace(d.io_ports[i].name, i);
}

int DesignIndex::component(const std::string& name) const {
  auto it = comps_.find(name);
  return it == comps_.end() ? -1 : it->second;
}

int DesignIndex::port(const std::string& name) const {
  auto it = ports_.find(name);
  return it == ports_.end() ? -1 : it->second;
}

Point component_pin_center_2x(const Component& c, const CellMaster& m,
                              const MasterPin& pin) {
  Point local2x = pin.center_2x();
  // orient_point operates on single-DBU coordinates; scale master size to 2x.
  Point oriented =
      orient_point(c.orient, local2x, 2 * m.width, 2 * m.height);
  return {2 * c.x + oriented.x, 2 * c.y + oriented.y};
}

Rect component_rect(const Component& c, const CellMaster& m) {
  // N/S/FN/FS all preserve the outline size.
  return Rect{c.x, c.y, c.x + m.width, c.y + m.height};
}

double total_component_area_um2(const Design& d, const Library& lib) {
  double total = 0.0;
  for (const auto& c : d.components) {
    const CellMaster& m = lib.at(c.master);
    total += to_um(m.width) * to_um(m.height);
  }
  return total;
}

}  // namespace open3d
