#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "open3d/metrics.hpp"
#include "open3d/rng.hpp"

using namespace open3d;
using namespace open3d::testutil;

namespace {

// Double-precision HPWL oracle working directly off pin bounding boxes.
double oracle_hpwl(const Design& d, const Library& lib) {
  DesignIndex idx(d);
  double total = 0.0;
  for (const Net& n : d.nets) {
    if (n.pins.size() < 2) continue;
    double lx = 1e300, ly = 1e300, ux = -1e300, uy = -1e300;
    for (const NetPinRef& r : n.pins) {
      double x, y;
      if (r.is_port) {
        const Port& p = d.io_ports[idx.port(r.pin)];
        x = to_um(p.x);
        y = to_um(p.y);
      } else {
        const Component& c = d.components[idx.component(r.comp)];
        const CellMaster& m = lib.at(c.master);
        const MasterPin* pin = m.find_pin(r.pin);
        Point p2x = component_pin_center_2x(c, m, *pin);
        x = static_cast<double>(p2x.x) / 2000.0;
        y = static_cast<double>(p2x.y) / 2000.0;
      }
      lx = std::min(lx, x);
      ux = std::max(ux, x);
      ly = std::min(ly, y);
      uy = std::max(uy, y);
    }
    total += (ux - lx) + (uy - ly);
  }
  return total;
}

struct Scatter {
  Library lib;
  Design d;
};

Scatter random_scatter(std::uint64_t seed, bool two_dies) {
  Scatter out;
  out.lib = make_library({make_cell("INV", 380, 1400, {"A", "ZN"}),
                          make_cell("INV_top", 380, 1400, {"A", "ZN"}),
                          make_macro("MEM", 8000, 7000),
                          make_macro("MEM_top", 8000, 7000)});
  out.d.die_bottom = Rect{0, 0, 50000, 50000};
  if (two_dies) out.d.die_top = out.d.die_bottom;
  Rng rng(seed);
  for (int i = 0; i < 25; ++i) {
    const bool top = two_dies && rng.uniform() < 0.4;
    const bool macro = rng.uniform() < 0.2;
    std::string master = macro ? "MEM" : "INV";
    if (top) master += "_top";
    Component c = make_comp("c" + std::to_string(i), master,
                            rng.uniform_int(0, 40000), rng.uniform_int(0, 40000),
                            PlaceStatus::PLACED, top ? Die::TOP : Die::BOTTOM,
                            static_cast<Orient>(rng.uniform_int(0, 3)));
    out.d.components.push_back(c);
  }
  for (int i = 0; i < 4; ++i)
    out.d.io_ports.push_back(
        make_port("p" + std::to_string(i), rng.uniform_int(0, 50000), 0,
                  two_dies && i % 2 ? Die::TOP : Die::BOTTOM));
  for (int i = 0; i < 40; ++i) {
    Net n;
    n.name = "n" + std::to_string(i);
    const int deg = 2 + static_cast<int>(rng.uniform_int(0, 3));
    for (int k = 0; k < deg; ++k) {
      if (rng.uniform() < 0.15) {
        n.pins.push_back(pref("p" + std::to_string(rng.uniform_int(0, 3))));
      } else {
        const Component& c = out.d.components[rng.uniform_int(0, 24)];
        const CellMaster& m = out.lib.at(c.master);
        n.pins.push_back(cref(
            c.name,
            m.pins[rng.uniform_int(0, static_cast<int>(m.pins.size()) - 1)]
                .name));
      }
    }
    out.d.nets.push_back(std::move(n));
  }
  return out;
}

}  // namespace

TEST_CASE("hpwl of a two-pin net is the Manhattan bounding box") {
  Library lib;
  Design d;
  d.die_bottom = Rect{0, 0, 10000, 10000};
  d.io_ports.push_back(make_port("a", 1000, 2000));
  d.io_ports.push_back(make_port("b", 4000, 6000));
  d.nets.push_back(make_net("n", {pref("a"), pref("b")}));
  CHECK(hpwl_um(d, lib) == 7.0);  // 3 + 4, exact
}

TEST_CASE("hpwl matches the double-precision oracle on random designs") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Scatter s = random_scatter(seed, seed % 2 == 0);
    CHECK(hpwl_um(s.d, s.lib) ==
          doctest::Approx(oracle_hpwl(s.d, s.lib)).epsilon(1e-12));
  }
}

TEST_CASE("hpwl is invariant under translating everything") {
  Scatter s = random_scatter(9, false);
  const double before = hpwl_um(s.d, s.lib);
  for (Component& c : s.d.components) {
    c.x += 12345;
    c.y -= 6789;
  }
  for (Port& p : s.d.io_ports) {
    p.x += 12345;
    p.y -= 6789;
  }
  CHECK(hpwl_um(s.d, s.lib) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("hpwl rejects unplaced components on nets") {
  Scatter s = random_scatter(2, false);
  s.d.components[0].status = PlaceStatus::UNPLACED;
  CHECK_THROWS_AS(hpwl_um(s.d, s.lib), Error);
}

TEST_CASE("cut nets and the bond-terminal estimate") {
  Scatter s = random_scatter(4, true);
  DesignIndex idx(s.d);
  int expected = 0;
  for (const Net& n : s.d.nets) {
    bool top = false, bottom = false;
    for (const NetPinRef& r : n.pins) {
      Die die = r.is_port ? s.d.io_ports[idx.port(r.pin)].die
                          : s.d.components[idx.component(r.comp)].die;
      (die == Die::TOP ? top : bottom) = true;
    }
    if (top && bottom) ++expected;
  }
  CHECK(count_cut_nets(s.d, s.lib) == expected);
  CHECK(hbt_estimate(s.d, s.lib) == expected);
  CHECK(expected > 0);  // fixture sanity
}

TEST_CASE("overflow of a constructed overfilled bin has a closed form") {
  // 10 x 10 um die, 2 x 2 grid: bins of 25 um^2, capacity 12.5 at target 0.5.
  // A 4 x 4 um block inside one bin overflows by 16 - 12.5 = 3.5.
  Library lib = make_library({make_macro("BLK", 4000, 4000)});
  Design d;
  d.die_bottom = Rect{0, 0, 10000, 10000};
  d.components.push_back(make_comp("u", "BLK", 500, 500));
  CHECK(overflow_um2(d, lib, 2, 0.5) == doctest::Approx(3.5));
  CHECK(overflow_um2(d, lib, 2, 1.0) == doctest::Approx(0.0));

  // Straddling two bins splits the usage 8/8, still below capacity.
  d.components[0].x = 3000;  // spans x = 3..7 um over the bin edge at 5 um
  CHECK(overflow_um2(d, lib, 2, 0.5) == doctest::Approx(0.0));
  CHECK(overflow_um2(d, lib, 2, 0.2) == doctest::Approx(2.0 * (8.0 - 5.0)));
}

TEST_CASE("overflow sums both dies") {
  Library lib = make_library(
      {make_macro("BLK", 4000, 4000), make_macro("BLK_top", 4000, 4000)});
  Design d;
  d.die_bottom = Rect{0, 0, 10000, 10000};
  d.die_top = d.die_bottom;
  d.components.push_back(make_comp("u", "BLK", 500, 500));
  d.components.push_back(
      make_comp("v", "BLK_top", 500, 500, PlaceStatus::PLACED, Die::TOP));
  CHECK(overflow_um2(d, lib, 2, 0.5) == doctest::Approx(7.0));
}

TEST_CASE("component power comes from the file when given") {
  Library lib = make_library({make_cell("INV", 380, 1400, {"A", "ZN"})});
  Design d;
  d.die_bottom = Rect{0, 0, 10000, 10000};
  d.components.push_back(make_comp("c0", "INV"));
  d.components.push_back(make_comp("c1", "INV"));

  PowerMap pm{{"c0", 0.1}, {"c1", 0.2}};
  const auto w = component_power_w(d, lib, pm);
  CHECK(w == std::vector<double>{0.1, 0.2});
  CHECK(power_proxy(d, lib, pm) == doctest::Approx(0.3));

  SUBCASE("missing component entry") {
    PowerMap bad{{"c0", 0.1}};
    CHECK_THROWS_AS(component_power_w(d, lib, bad), Error);
  }
  SUBCASE("entry for unknown component") {
    PowerMap bad{{"c0", 0.1}, {"c1", 0.2}, {"ghost", 0.3}};
    CHECK_THROWS_AS(component_power_w(d, lib, bad), Error);
  }
  SUBCASE("negative power") {
    PowerMap bad{{"c0", -0.1}, {"c1", 0.2}};
    CHECK_THROWS_AS(component_power_w(d, lib, bad), Error);
  }
}

TEST_CASE("default power is proportional to master area") {
  Library lib = make_library({make_cell("INV", 380, 1400, {"A", "ZN"})});
  Design d;
  d.die_bottom = Rect{0, 0, 10000, 10000};
  d.components.push_back(make_comp("c0", "INV"));
  const auto w = component_power_w(d, lib, std::nullopt);
  // 0.38 * 1.4 um^2 = 5.32e-7 mm^2 at 0.05 W/mm^2.
  CHECK(w[0] == doctest::Approx(5.32e-7 * 0.05).epsilon(1e-12));
}

TEST_CASE("make_report aggregates the metric set") {
  Scatter s = random_scatter(11, true);
  const Report r = make_report(s.d, s.lib, 8, 0.8);
  CHECK(r.area_mm2 == doctest::Approx(0.0025));  // 50 x 50 um die
  CHECK(r.hpwl_um == doctest::Approx(hpwl_um(s.d, s.lib)));
  CHECK(r.cut_nets == count_cut_nets(s.d, s.lib));
  CHECK(r.hbt_estimate == r.cut_nets);
  CHECK(r.overflow_um2 == doctest::Approx(overflow_um2(s.d, s.lib, 8, 0.8)));
  CHECK(r.power_w == doctest::Approx(power_proxy(s.d, s.lib, std::nullopt)));
  CHECK_FALSE(r.t_max_c.has_value());

  double top = 0.0, bottom = 0.0;
  for (const Component& c : s.d.components) {
    const CellMaster& m = s.lib.at(c.master);
    (c.die == Die::TOP ? top : bottom) += to_um(m.width) * to_um(m.height);
  }
  CHECK(r.util_top == doctest::Approx(top / s.d.die_bottom.area_um2()));
  CHECK(r.util_bottom == doctest::Approx(bottom / s.d.die_bottom.area_um2()));
}

TEST_CASE("a 2D report has zero cut nets") {
  Scatter s = random_scatter(12, false);
  const Report r = make_report(s.d, s.lib, 8, 0.8);
  CHECK(r.cut_nets == 0);
  CHECK(r.util_top == 0.0);
}
