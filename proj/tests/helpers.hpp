#ifndef OPEN3D_TESTS_HELPERS_HPP
#define OPEN3D_TESTS_HELPERS_HPP

#include <string>
#include <vector>

#include "open3d/model.hpp"

namespace open3d::testutil {

// CORE cell with evenly spaced metal_1 pins on the bottom edge.
inline CellMaster make_cell(const std::string& name, DbUnit w, DbUnit h,
                            const std::vector<std::string>& pin_names,
                            const std::string& layer = "metal_1") {
  CellMaster m;
  m.name = name;
  m.cls = MasterClass::CORE;
  m.width = w;
  m.height = h;
  m.variant = variant_from_name(name);
  const DbUnit n = static_cast<DbUnit>(pin_names.size());
  for (DbUnit i = 0; i < n; ++i) {
    MasterPin p;
    p.name = pin_names[static_cast<std::size_t>(i)];
    p.direction = (i + 1 == n) ? PinDir::OUTPUT : PinDir::INPUT;
    const DbUnit cx = w * (i + 1) / (n + 1);
    p.rects.push_back({layer, Rect{cx - 40, 60, cx + 40, 140}});
    m.pins.push_back(std::move(p));
  }
  return m;
}

inline CellMaster make_macro(const std::string& name, DbUnit w, DbUnit h,
                             int num_pins = 4,
                             const std::string& layer = "metal_4") {
  CellMaster m;
  m.name = name;
  m.cls = MasterClass::BLOCK;
  m.width = w;
  m.height = h;
  m.variant = variant_from_name(name);
  for (int p = 0; p < num_pins; ++p) {
    MasterPin pin;
    pin.name = "PIN_" + std::to_string(p);
    pin.direction = (p % 2 == 0) ? PinDir::INPUT : PinDir::OUTPUT;
    const DbUnit cx = w * (p + 1) / (num_pins + 1);
    pin.rects.push_back({layer, Rect{cx - 100, 100, cx + 100, 300}});
    m.pins.push_back(std::move(pin));
  }
  return m;
}

inline Component make_comp(const std::string& name, const std::string& master,
                           DbUnit x = 0, DbUnit y = 0,
                           PlaceStatus status = PlaceStatus::PLACED,
                           Die die = Die::BOTTOM, Orient orient = Orient::N) {
  Component c;
  c.name = name;
  c.master = master;
  c.x = x;
  c.y = y;
  c.status = status;
  c.die = die;
  c.orient = orient;
  return c;
}

inline Port make_port(const std::string& name, DbUnit x, DbUnit y,
                      Die die = Die::BOTTOM,
                      const std::string& layer = "metal_10") {
  Port p;
  p.name = name;
  p.x = x;
  p.y = y;
  p.die = die;
  p.layer = layer;
  return p;
}

inline NetPinRef cref(const std::string& comp, const std::string& pin) {
  return NetPinRef{false, comp, pin};
}

inline NetPinRef pref(const std::string& port) {
  return NetPinRef{true, "", port};
}

inline Net make_net(const std::string& name, std::vector<NetPinRef> pins) {
  Net n;
  n.name = name;
  n.pins = std::move(pins);
  return n;
}

// Minimal technology: a handful of routing layers with interleaved cuts plus
// one site, enough for mirroring and LEF round trips.
inline Technology make_tech(int routing_layers = 4) {
  Technology t;
  for (int k = 1; k <= routing_layers; ++k) {
    Layer m;
    m.name = "metal_" + std::to_string(k);
    m.kind = LayerKind::ROUTING;
    m.direction = (k % 2 == 1) ? LayerDir::HORIZONTAL : LayerDir::VERTICAL;
    m.pitch = 380 + 40 * (k - 1);
    m.width = m.pitch / 2;
    t.layers.push_back(m);
    if (k < routing_layers) {
      Layer v;
      v.name = "via_" + std::to_string(k);
      v.kind = LayerKind::CUT;
      v.width = 100;
      t.layers.push_back(v);
    }
  }
  t.sites.push_back({"core", 190, 1400});
  return t;
}

inline Library make_library(const std::vector<CellMaster>& masters) {
  Library lib;
  for (const CellMaster& m : masters) lib.add(m);
  return lib;
}

}  // namespace open3d::testutil

#endif
