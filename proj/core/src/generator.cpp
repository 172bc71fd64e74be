#include "open3d/generator.hpp"

#include <algorithm>
#include <cmath>

#include "open3d/rng.hpp"

namespace open3d {

void GenParams::validate() const {
  if (num_macros < 0 || num_cells < 1 || num_ports < 0 || num_nets < 1)
    throw Error("generator: counts out of range");
  if (macro_area_frac < 0.0 || macro_area_frac >= 1.0)
    throw Error("generator: macro_area_frac must be in [0, 1)");
  if (num_macros == 0 && macro_area_frac > 0.0)
    throw Error("generator: macro_area_frac > 0 needs macros");
}

GenParams preset_params(const std::string& preset, std::uint64_t seed) {
  GenParams p;
  p.seed = seed;
  if (preset == "small") {
    p.num_macros = 8;
    p.num_cells = 400;
    p.num_ports = 24;
    p.num_nets = 700;
    p.macro_area_frac = 0.35;
  } else if (preset == "ariane-like") {
    p.num_macros = 132;
    p.num_cells = 168000;
    p.num_ports = 512;
    p.num_nets = 204000;
    p.macro_area_frac = 0.4;
  } else {
    throw Error("unknown preset: " + preset);
  }
  return p;
}

namespace {

Technology make_tech2d() {
  Technology t;
  for (int k = 1; k <= 10; ++k) {
    Layer m;
    m.name = "metal_" + std::to_string(k);
    m.kind = LayerKind::ROUTING;
    m.direction = (k % 2 == 1) ? LayerDir::HORIZONTAL : LayerDir::VERTICAL;
    m.pitch = 380 + 40 * (k - 1);
    m.width = m.pitch / 2;
    t.layers.push_back(m);
    if (k < 10) {
      Layer v;
      v.name = "via_" + std::to_string(k);
      v.kind = LayerKind::CUT;
      v.width = 100;
      t.layers.push_back(v);
    }
  }
  for (int k = 1; k <= 9; ++k) {
    ViaDef v;
    v.name = "VIA_" + std::to_string(k);
    const Rect r{-70, -70, 70, 70};
    v.geometry.push_back({"metal_" + std::to_string(k), r});
    v.geometry.push_back({"via_" + std::to_string(k), Rect{-50, -50, 50, 50}});
    v.geometry.push_back({"metal_" + std::to_string(k + 1), r});
    t.vias.push_back(v);
  }
  t.sites.push_back({"core", 190, 1400});
  return t;
}

CellMaster make_cell(const std::string& name, int width_sites,
                     std::vector<std::pair<std::string, PinDir>> pins) {
  CellMaster m;
  m.name = name;
  m.cls = MasterClass::CORE;
  m.width = 190 * width_sites;
  m.height = 1400;
  for (std::size_t i = 0; i < pins.size(); ++i) {
    MasterPin p;
    p.name = pins[i].first;
    p.direction = pins[i].second;
    // One pin per site column, on the lowest metal.
    const DbUnit cx = 95 + 190 * static_cast<DbUnit>(i % width_sites);
    const DbUnit cy = 400 + 600 * static_cast<DbUnit>(i / width_sites);
    p.rects.push_back({"metal_1", Rect{cx - 45, cy - 45, cx + 45, cy + 45}});
    m.pins.push_back(std::move(p));
  }
  return m;
}

std::vector<CellMaster> make_cell_family() {
  using P = std::pair<std::string, PinDir>;
  std::vector<CellMaster> out;
  out.push_back(make_cell("INV_X1", 2, {P{"A", PinDir::INPUT}, P{"ZN", PinDir::OUTPUT}}));
  out.push_back(make_cell("NAND2_X1", 3,
                          {P{"A1", PinDir::INPUT}, P{"A2", PinDir::INPUT},
                           P{"ZN", PinDir::OUTPUT}}));
  out.push_back(make_cell("NOR2_X1", 3,
                          {P{"A1", PinDir::INPUT}, P{"A2", PinDir::INPUT},
                           P{"ZN", PinDir::OUTPUT}}));
  out.push_back(make_cell("BUF_X4", 4, {P{"A", PinDir::INPUT}, P{"Z", PinDir::OUTPUT}}));
  out.push_back(make_cell("DFF_X1", 8,
                          {P{"D", PinDir::INPUT}, P{"CK", PinDir::INPUT},
                           P{"Q", PinDir::OUTPUT}}));
  out.push_back(make_cell("BUF_X16", 10, {P{"A", PinDir::INPUT}, P{"Z", PinDir::OUTPUT}}));
  return out;
}

DbUnit snap10(double v) {
  return std::max<DbUnit>(10, static_cast<DbUnit>(std::llround(v / 10.0)) * 10);
}

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

Generated generate_design(const GenParams& params) {
  params.validate();
  Rng rng(params.seed);

  Generated out;
  out.tech = make_tech2d();
  out.masters = make_cell_family();
  out.design.name = "gen_s" + std::to_string(params.seed);
  out.design.die_bottom = Rect{0, 0, 0, 0};  // sized later by the flow

  // Cells: sampled from the family, small gates most likely.
  const double cell_weights[6] = {0.30, 0.22, 0.12, 0.14, 0.18, 0.04};
  double cell_area = 0.0;
  std::vector<int> cell_master(params.num_cells);
  for (int i = 0; i < params.num_cells; ++i) {
    double u = rng.uniform();
    int mi = 0;
    for (; mi < 5; ++mi) {
      if (u < cell_weights[mi]) break;
      u -= cell_weights[mi];
    }
    cell_master[i] = mi;
    cell_area += to_um(out.masters[mi].width) * to_um(out.masters[mi].height);
  }

  // Macro masters: log-normal footprints rescaled so total macro area hits
  // macro_area_frac of the component total.
  std::vector<int> macro_master_idx;
  if (params.num_macros > 0) {
    const double target_area =
        cell_area * params.macro_area_frac / (1.0 - params.macro_area_frac);
    std::vector<double> w(params.num_macros), aspect(params.num_macros);
    double w_sum = 0.0;
    for (int i = 0; i < params.num_macros; ++i) {
      w[i] = rng.lognormal(0.0, 0.5);
      aspect[i] = std::clamp(rng.lognormal(0.0, 0.3), 0.5, 2.0);
      w_sum += w[i];
    }
    for (int i = 0; i < params.num_macros; ++i) {
      const double area = target_area * w[i] / w_sum;  // um^2
      const double wd = std::sqrt(area * aspect[i]);
      CellMaster m;
      m.name = "MEM_" + zero_pad(i, 3);
      m.cls = MasterClass::BLOCK;
      m.width = snap10(wd * kDbuPerMicron);
      m.height = snap10(area / wd * kDbuPerMicron);
      const int npins = 8;
      for (int p = 0; p < npins; ++p) {
        MasterPin pin;
        pin.name = "PIN_" + std::to_string(p);
        pin.direction = (p % 2 == 0) ? PinDir::INPUT : PinDir::OUTPUT;
        const DbUnit cx = m.width * (p + 1) / (npins + 1);
        pin.rects.push_back(
            {"metal_4", Rect{cx - 100, 100, cx + 100, 300}});
        m.pins.push_back(std::move(pin));
      }
      macro_master_idx.push_back(static_cast<int>(out.masters.size()));
      out.masters.push_back(std::move(m));
    }
  }

  Library lib;
  for (const CellMaster& m : out.masters) lib.add(m);

  // Components: macros first, then cells.
  for (int i = 0; i < params.num_macros; ++i) {
    Component c;
    c.name = "m" + zero_pad(i, 3);
    c.master = out.masters[macro_master_idx[i]].name;
    out.design.components.push_back(std::move(c));
  }
  for (int i = 0; i < params.num_cells; ++i) {
    Component c;
    c.name = "c" + zero_pad(i, 6);
    c.master = out.masters[cell_master[i]].name;
    out.design.components.push_back(std::move(c));
  }

  // Ports; positions are assigned by the floorplan stage.
  for (int i = 0; i < params.num_ports; ++i) {
    Port p;
    p.name = "p" + zero_pad(i, 3);
    p.direction = (i % 2 == 0) ? PinDir::INPUT : PinDir::OUTPUT;
    p.layer = "metal_10";
    out.design.io_ports.push_back(std::move(p));
  }

  // Clustered connectivity: cells grouped into sqrt-scaled clusters, nets
  // drawing mostly from one home cluster.
  const int num_clusters =
      std::max(1, static_cast<int>(std::lround(std::sqrt(params.num_cells / 16.0))));
  std::vector<int> cluster(params.num_cells);
  for (int i = 0; i < params.num_cells; ++i)
    cluster[i] = static_cast<int>(rng.uniform_int(0, num_clusters - 1));
  std::vector<std::vector<int>> members(num_clusters);
  for (int i = 0; i < params.num_cells; ++i) members[cluster[i]].push_back(i);

  auto cell_ref = [&](int cell_idx) {
    const Component& c = out.design.components[params.num_macros + cell_idx];
    const CellMaster& m = lib.at(c.master);
    const int pi = static_cast<int>(
        rng.uniform_int(0, static_cast<std::int64_t>(m.pins.size()) - 1));
    return NetPinRef{false, c.name, m.pins[pi].name};
  };

  for (int ni = 0; ni < params.num_nets; ++ni) {
    Net net;
    net.name = "n" + zero_pad(ni, 6);

    // Degree 2..6, biased small.
    double u = rng.uniform();
    int degree = u < 0.45 ? 2 : u < 0.70 ? 3 : u < 0.85 ? 4 : u < 0.95 ? 5 : 6;

    const int home = static_cast<int>(rng.uniform_int(0, num_clusters - 1));
    const bool with_macro =
        params.num_macros > 0 && rng.uniform() < 0.30;
    const bool with_port =
        ni < params.num_ports;  // each port drives exactly one net

    if (with_port)
      net.pins.push_back({true, "", out.design.io_ports[ni].name});
    if (with_macro) {
      const int mi = static_cast<int>(rng.uniform_int(0, params.num_macros - 1));
      const Component& c = out.design.components[mi];
      const CellMaster& m = lib.at(c.master);
      const int pi = static_cast<int>(
          rng.uniform_int(0, static_cast<std::int64_t>(m.pins.size()) - 1));
      net.pins.push_back({false, c.name, m.pins[pi].name});
    }
    int guard = 0;
    while (static_cast<int>(net.pins.size()) < degree && guard++ < 100) {
      int cell_idx;
      if (!members[home].empty() && rng.uniform() < 0.8) {
        cell_idx = members[home][rng.uniform_int(
            0, static_cast<std::int64_t>(members[home].size()) - 1)];
      } else {
        cell_idx = static_cast<int>(rng.uniform_int(0, params.num_cells - 1));
      }
      NetPinRef ref = cell_ref(cell_idx);
      bool dup = false;
      for (const NetPinRef& r : net.pins)
        if (r == ref) {
          dup = true;
          break;
        }
      if (!dup) net.pins.push_back(std::move(ref));
    }
    if (net.pins.size() < 2) continue;  // degenerate; extremely rare
    out.design.nets.push_back(std::move(net));
  }

  return out;
}

}  // namespace open3d
