#include "open3d/pdk3d.hpp"

#include <algorithm>
#include <cctype>

namespace open3d {

void Pdk3dConfig::validate() const {
  if (hbt_size <= 0 || hbt_pitch <= 0 || shrunk_width <= 0 || shrunk_height <= 0)
    throw Error("pdk3d config values must be positive");
  if (hbt_pitch < hbt_size)
    throw Error("hbt pitch must be at least the hbt size");
}

namespace {

// Splits a trailing integer off a layer name ("metal_7" -> {"metal_", 7}).
bool split_trailing_number(const std::string& name, std::string& prefix,
                           int& number) {
  std::size_t i = name.size();
  while (i > 0 && std::isdigit(static_cast<unsigned char>(name[i - 1]))) --i;
  if (i == name.size()) return false;
  prefix = name.substr(0, i);
  number = std::stoi(name.substr(i));
  return true;
}

std::string mirrored_name(const std::string& name, LayerKind kind, int n) {
  std::string prefix;
  int k = 0;
  if (split_trailing_number(name, prefix, k)) {
    int target = kind == LayerKind::ROUTING ? 2 * n + 1 - k : 2 * n - k;
    return prefix + std::to_string(target);
  }
  return name + "_mirror";
}

}  // namespace

Technology mirror_metal_stack(const Technology& tech2d,
                              const Pdk3dConfig& config) {
  config.validate();
  if (tech2d.has_bond_layer())
    throw Error("technology already contains a bond layer");
  const int n = static_cast<int>(tech2d.routing_layers().size());
  if (n < 1) throw Error("technology has no routing layers");

  Technology out;
  out.dbu_per_micron = tech2d.dbu_per_micron;
  out.sites = tech2d.sites;

  std::unordered_map<std::string, std::string> rename;
  for (const Layer& l : tech2d.layers) {
    Layer bottom = l;
    bottom.die_side = DieSide::BOTTOM;
    out.layers.push_back(bottom);
    rename[l.name] = mirrored_name(l.name, l.kind, n);
  }

  const std::string top_metal = tech2d.routing_layers().back()->name;
  Layer bond;
  bond.name = "hbt";
  bond.kind = LayerKind::CUT;
  bond.die_side = DieSide::BOND;
  bond.width = config.hbt_size;
  bond.pitch = config.hbt_pitch;
  out.layers.push_back(bond);

  for (auto it = tech2d.layers.rbegin(); it != tech2d.layers.rend(); ++it) {
    Layer top = *it;
    top.name = rename.at(it->name);
    top.die_side = DieSide::TOP;
    out.layers.push_back(top);
  }

  out.vias = tech2d.vias;
  for (const ViaDef& v : tech2d.vias) {
    ViaDef m = v;
    m.name = v.name + "_m";
    for (auto& g : m.geometry) g.layer = rename.at(g.layer);
    out.vias.push_back(std::move(m));
  }

  ViaDef hbt_via;
  hbt_via.name = "hbt_via";
  const DbUnit half = config.hbt_size / 2;
  const Rect cut{-half, -half, config.hbt_size - half, config.hbt_size - half};
  hbt_via.geometry.push_back({top_metal, cut});
  hbt_via.geometry.push_back({bond.name, cut});
  hbt_via.geometry.push_back({rename.at(top_metal), cut});
  out.vias.push_back(std::move(hbt_via));

  return out;
}

std::unordered_map<std::string, std::string> layer_mirror_map(
    const Technology& tech3d) {
  std::vector<const Layer*> bottom_routing, top_routing;
  std::vector<const Layer*> bottom_cut, top_cut;
  for (const Layer& l : tech3d.layers) {
    if (l.die_side == DieSide::BOND) continue;
    auto& routing = l.die_side == DieSide::BOTTOM ? bottom_routing : top_routing;
    auto& cut = l.die_side == DieSide::BOTTOM ? bottom_cut : top_cut;
    (l.kind == LayerKind::ROUTING ? routing : cut).push_back(&l);
  }
  if (bottom_routing.size() != top_routing.size() ||
      bottom_cut.size() != top_cut.size())
    throw Error("technology halves are not symmetric");

  std::unordered_map<std::string, std::string> map;
  auto pair_up = [&](const std::vector<const Layer*>& bottom,
                     const std::vector<const Layer*>& top) {
    // Top-half layers appear in inverted stack order.
    for (std::size_t i = 0; i < bottom.size(); ++i) {
      const std::string& b = bottom[i]->name;
      const std::string& t = top[top.size() - 1 - i]->name;
      map[b] = t;
      map[t] = b;
    }
  };
  pair_up(bottom_routing, top_routing);
  pair_up(bottom_cut, top_cut);
  for (const Layer& l : tech3d.layers)
    if (l.die_side == DieSide::BOND) map[l.name] = l.name;
  return map;
}

Point shrunk_anchor_shift(const CellMaster& full, const CellMaster& shrunk) {
  return Point{(full.width - shrunk.width) / 2,
               (full.height - shrunk.height) / 2};
}

namespace {

std::vector<LayerRect> remap_layers(
    const std::vector<LayerRect>& rects,
    const std::unordered_map<std::string, std::string>& mirror,
    const std::string& master) {
  std::vector<LayerRect> out;
  out.reserve(rects.size());
  for (const auto& r : rects) {
    auto it = mirror.find(r.layer);
    if (it == mirror.end())
      throw Error("pin on layer '" + r.layer + "' with no mirror image in " +
                  master);
    out.push_back({it->second, r.rect});
  }
  return out;
}

CellMaster make_shrunk(const CellMaster& full, const Pdk3dConfig& config) {
  CellMaster s = full;
  s.name = full.name + "_shrunk";
  s.variant = full.variant == MasterVariant::TOP ? MasterVariant::SHRUNK_TOP
                                                 : MasterVariant::SHRUNK_BOTTOM;
  s.width = config.shrunk_width;
  s.height = config.shrunk_height;
  const Point shift = shrunk_anchor_shift(full, s);
  for (auto& p : s.pins)
    for (auto& r : p.rects) r.rect = r.rect.translated(-shift.x, -shift.y);
  for (auto& o : s.obstructions) o.rect = o.rect.translated(-shift.x, -shift.y);
  return s;
}

}  // namespace

std::vector<CellMaster> split_library(const std::vector<CellMaster>& masters,
                                      const Technology& tech3d,
                                      const Pdk3dConfig& config) {
  config.validate();
  const auto mirror = layer_mirror_map(tech3d);

  std::vector<const CellMaster*> sorted;
  for (const auto& m : masters) {
    if (m.variant != MasterVariant::BASE)
      throw Error("split_library expects BASE masters, got " + m.name);
    sorted.push_back(&m);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const CellMaster* a, const CellMaster* b) {
              return a->name < b->name;
            });

  std::vector<CellMaster> out;
  out.reserve(masters.size() * 4);
  for (const CellMaster* base : sorted) {
    CellMaster bottom = *base;
    bottom.name = base->name + "_bottom";
    bottom.variant = MasterVariant::BOTTOM;

    CellMaster top = *base;
    top.name = base->name + "_top";
    top.variant = MasterVariant::TOP;
    for (auto& p : top.pins) p.rects = remap_layers(p.rects, mirror, base->name);
    top.obstructions = remap_layers(base->obstructions, mirror, base->name);

    out.push_back(make_shrunk(bottom, config));
    out.push_back(bottom);
    out.push_back(make_shrunk(top, config));
    out.push_back(top);
  }
  return out;
}

}  // namespace open3d
