#include <benchmark/benchmark.h>

#include "open3d/flow.hpp"
#include "open3d/generator.hpp"
#include "open3d/metrics.hpp"
#include "open3d/rng.hpp"
#include "open3d/skyline.hpp"
#include "open3d/thermal.hpp"

using namespace open3d;

namespace {

Generated make_placed(int cells) {
  GenParams p;
  p.num_macros = 12;
  p.num_cells = cells;
  p.num_nets = cells * 3 / 2;
  p.seed = 7;
  Generated g = generate_design(p);
  Library lib;
  for (const CellMaster& m : g.masters) lib.add(m);
  const Site site = g.tech.sites[0];
  const FloorplanSpec fp =
      size_die(g.design, lib, FlowKind::FLOW_2D, 0.5, 1.0, site);
  g.design.die_bottom = fp.die;
  place_io(fp, g.design, 7);
  // Cheap deterministic scatter; metrics only need placed coordinates.
  Rng rng(11);
  for (Component& c : g.design.components) {
    const CellMaster& m = lib.at(c.master);
    c.x = rng.uniform_int(fp.die.lx, std::max(fp.die.lx, fp.die.ux - m.width));
    c.y = rng.uniform_int(fp.die.ly, std::max(fp.die.ly, fp.die.uy - m.height));
    c.status = PlaceStatus::PLACED;
  }
  return g;
}

void BM_hpwl(benchmark::State& state) {
  Generated g = make_placed(static_cast<int>(state.range(0)));
  Library lib;
  for (const CellMaster& m : g.masters) lib.add(m);
  for (auto _ : state) benchmark::DoNotOptimize(hpwl_um(g.design, lib));
}
BENCHMARK(BM_hpwl)->Arg(1000)->Arg(5000);

void BM_skyline_pack(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  GenParams p;
  p.num_macros = n;
  p.num_cells = 64;
  p.num_nets = 100;
  p.seed = 3;
  Generated g = generate_design(p);
  Library lib;
  for (const CellMaster& m : g.masters) lib.add(m);
  const FloorplanSpec fp =
      size_die(g.design, lib, FlowKind::FLOW_3D_TILING, 0.5, 1.0,
               g.tech.sites[0]);
  std::vector<int> macros = macro_indices(g.design, lib);
  std::vector<int> ordered = order_macros(g.design, lib, macros);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        skyline_place(g.design, lib, ordered, fp.die, 1000));
}
BENCHMARK(BM_skyline_pack)->Arg(32)->Arg(128);

void BM_thermal_gauss_seidel(benchmark::State& state) {
  Generated g = make_placed(2000);
  Library lib;
  for (const CellMaster& m : g.masters) lib.add(m);
  ThermalParams tp;
  tp.grid_n = static_cast<int>(state.range(0));
  const ThermalNetwork net = build_network(g.design, lib, std::nullopt, tp);
  for (auto _ : state) benchmark::DoNotOptimize(solve_steady(net, tp));
}
BENCHMARK(BM_thermal_gauss_seidel)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
