#ifndef OPEN3D_MODEL_HPP
#define OPEN3D_MODEL_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "open3d/geometry.hpp"

namespace open3d {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  ParseError(const std::string& msg, int line, int col)
      : Error(msg + " at line " + std::to_string(line) + ", column " +
              std::to_string(col)),
        line(line),
        column(col) {}
  int line = 0;
  int column = 0;
};

struct InfeasibleError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Technology
// ---------------------------------------------------------------------------

enum class LayerKind { ROUTING, CUT };
enum class LayerDir { HORIZONTAL, VERTICAL };
enum class DieSide { BOTTOM, TOP, BOND };

struct Layer {
  std::string name;
  LayerKind kind = LayerKind::ROUTING;
  LayerDir direction = LayerDir::HORIZONTAL;  // ROUTING only
  DbUnit pitch = 0;
  DbUnit width = 0;
  DieSide die_side = DieSide::BOTTOM;
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct ViaLayerRect {
  std::string layer;
  Rect rect;
  friend bool operator==(const ViaLayerRect&, const ViaLayerRect&) = default;
};

struct ViaDef {
  std::string name;
  std::vector<ViaLayerRect> geometry;
  friend bool operator==(const ViaDef&, const ViaDef&) = default;
};

struct Site {
  std::string name;
  DbUnit width = 0;
  DbUnit height = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

struct Technology {
  int dbu_per_micron = static_cast<int>(kDbuPerMicron);
  std::vector<Layer> layers;  // stack order, ROUTING/CUT interleaved
  std::vector<ViaDef> vias;
  std::vector<Site> sites;

  const Layer* find_layer(const std::string& name) const;
  std::vector<const Layer*> routing_layers() const;
  bool has_bond_layer() const;
  friend bool operator==(const Technology&, const Technology&) = default;
};

// ---------------------------------------------------------------------------
// Library
// ---------------------------------------------------------------------------

enum class MasterClass { CORE, BLOCK };
enum class MasterVariant { BASE, TOP, BOTTOM, SHRUNK_TOP, SHRUNK_BOTTOM };
enum class PinDir { INPUT, OUTPUT, INOUT };

struct LayerRect {
  std::string layer;
  Rect rect;
  friend bool operator==(const LayerRect&, const LayerRect&) = default;
};

struct MasterPin {
  std::string name;
  PinDir direction = PinDir::INPUT;
  std::vector<LayerRect> rects;

  // Center of the bounding box over all pin rects, in half-DBU so the value
  // stays exact.
  Point center_2x() const;
  friend bool operator==(const MasterPin&, const MasterPin&) = default;
};

struct CellMaster {
  std::string name;
  MasterClass cls = MasterClass::CORE;
  DbUnit width = 0;
  DbUnit height = 0;
  std::vector<MasterPin> pins;
  std::vector<LayerRect> obstructions;
  MasterVariant variant = MasterVariant::BASE;

  bool is_macro() const { return cls == MasterClass::BLOCK; }
  const MasterPin* find_pin(const std::string& name) const;
  friend bool operator==(const CellMaster&, const CellMaster&) = default;
};

// Variant inferred from the trailing name suffix.
MasterVariant variant_from_name(const std::string& name);
// Base name with any variant suffix stripped.
std::string base_master_name(const std::string& name);

struct Library {
  std::vector<CellMaster> masters;

  void add(CellMaster m);
  const CellMaster* find(const std::string& name) const;
  const CellMaster& at(const std::string& name) const;

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Design
// ---------------------------------------------------------------------------

enum class Die { BOTTOM, TOP };
enum class PlaceStatus { UNPLACED, PLACED, FIXED };

struct Component {
  std::string name;
  std::string master;
  DbUnit x = 0;  // origin (lower-left) in DBU
  DbUnit y = 0;
  Orient orient = Orient::N;
  PlaceStatus status = PlaceStatus::UNPLACED;
  Die die = Die::BOTTOM;
  friend bool operator==(const Component&, const Component&) = default;
};

struct Port {
  std::string name;
  PinDir direction = PinDir::INPUT;
  DbUnit x = 0;
  DbUnit y = 0;
  std::string layer;
  Die die = Die::BOTTOM;
  friend bool operator==(const Port&, const Port&) = default;
};

struct NetPinRef {
  bool is_port = false;
  std::string comp;  // empty for ports
  std::string pin;   // pin name, or port name when is_port
  friend bool operator==(const NetPinRef&, const NetPinRef&) = default;
};

struct Net {
  std::string name;
  std::vector<NetPinRef> pins;
  friend bool operator==(const Net&, const Net&) = default;
};

struct Design {
  std::string name;
  Rect die_bottom;
  std::optional<Rect> die_top;  // present iff 3D; dimensions equal die_bottom
  std::vector<Component> components;
  std::vector<Port> io_ports;
  std::vector<Net> nets;

  bool is_3d() const { return die_top.has_value(); }
  friend bool operator==(const Design&, const Design&) = default;
};

// Name-to-index lookup built once over an immutable design.
struct DesignIndex {
  explicit DesignIndex(const Design& d);
  int component(const std::string& name) const;  // -1 when missing
  int port(const std::string& name) const;

 private:
  std::unordered_map<std::string, int> comps_;
  std::unordered_map<std::string, int> ports_;
};

// Absolute center of a component pin in half-DBU.
Point component_pin_center_2x(const Component& c, const CellMaster& m,
                              const MasterPin& pin);

// Outline rect of a placed component.
Rect component_rect(const Component& c, const CellMaster& m);

// Sum of master areas over all components, in um^2.
double total_component_area_um2(const Design& d, const Library& lib);

}  // namespace open3d

#endif
