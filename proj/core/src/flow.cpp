#include "open3d/flow.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "open3d/checker.hpp"
#include "open3d/lefdef.hpp"
#include "open3d/rng.hpp"

namespace open3d {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* flow_name(FlowKind k) {
  switch (k) {
    case FlowKind::FLOW_2D: return "FLOW_2D";
    case FlowKind::FLOW_3D_TILING: return "FLOW_3D_TILING";
    case FlowKind::FLOW_3D_DMP: return "FLOW_3D_DMP";
  }
  return "?";
}

FlowKind flow_from_name(const std::string& s) {
  if (s == "FLOW_2D") return FlowKind::FLOW_2D;
  if (s == "FLOW_3D_TILING") return FlowKind::FLOW_3D_TILING;
  if (s == "FLOW_3D_DMP") return FlowKind::FLOW_3D_DMP;
  throw Error("unknown flow: " + s +
              " (expected FLOW_2D, FLOW_3D_TILING or FLOW_3D_DMP)");
}

void FlowConfig::validate() const {
  if (tech_lef.empty() || cells_lef.empty() || def.empty())
    throw Error("flow config: tech_lef, cells_lef and def are required");
  if (!(utilization > 0.0 && utilization <= 1.0))
    throw Error("flow config: utilization must be in (0, 1]");
  if (aspect <= 0.0) throw Error("flow config: aspect must be positive");
  pdk.validate();
  partition.validate();
  tiling.validate();
  placer.validate();
  thermal.validate();
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out << text;
}

void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw Error(std::string("flow config: unknown key \"") + it.key() +
                  "\" in " + where);
  }
}

json parse_json_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what(), 0, 0);
  }
}

DbUnit dbu_from_json_um(const json& v) { return from_um(v.get<double>()); }

}  // namespace

FlowConfig parse_flow_config(const std::string& json_text) {
  const json j = parse_json_text(json_text, "flow config");
  if (!j.is_object()) throw Error("flow config: top level must be an object");
  check_keys(j, "config",
             {"tech_lef", "cells_lef", "def", "flow", "utilization", "aspect",
              "seed", "out_dir", "power", "pdk3d", "partition", "tiling",
              "placer", "thermal"});

  FlowConfig c;
  c.tech_lef = j.value("tech_lef", "");
  c.cells_lef = j.value("cells_lef", "");
  c.def = j.value("def", "");
  if (j.contains("flow")) c.flow = flow_from_name(j.at("flow").get<std::string>());
  c.utilization = j.value("utilization", c.utilization);
  c.aspect = j.value("aspect", c.aspect);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out_dir", "");
  c.power_file = j.value("power", "");

  if (j.contains("pdk3d")) {
    const json& p = j.at("pdk3d");
    check_keys(p, "pdk3d",
               {"hbt_size_um", "hbt_pitch_um", "shrunk_width_um",
                "shrunk_height_um"});
    if (p.contains("hbt_size_um")) c.pdk.hbt_size = dbu_from_json_um(p["hbt_size_um"]);
    if (p.contains("hbt_pitch_um")) c.pdk.hbt_pitch = dbu_from_json_um(p["hbt_pitch_um"]);
    if (p.contains("shrunk_width_um"))
      c.pdk.shrunk_width = dbu_from_json_um(p["shrunk_width_um"]);
    if (p.contains("shrunk_height_um"))
      c.pdk.shrunk_height = dbu_from_json_um(p["shrunk_height_um"]);
  }
  if (j.contains("partition")) {
    const json& p = j.at("partition");
    check_keys(p, "partition", {"w_cut", "w_util", "iterations", "t0", "alpha"});
    c.partition.w_cut = p.value("w_cut", c.partition.w_cut);
    c.partition.w_util = p.value("w_util", c.partition.w_util);
    c.partition.iterations = p.value("iterations", c.partition.iterations);
    c.partition.t0 = p.value("t0", c.partition.t0);
    c.partition.alpha = p.value("alpha", c.partition.alpha);
  }
  if (j.contains("tiling")) {
    const json& p = j.at("tiling");
    check_keys(p, "tiling", {"height_target", "halo_step_um", "halo_max_um"});
    c.tiling.height_target = p.value("height_target", c.tiling.height_target);
    if (p.contains("halo_step_um"))
      c.tiling.halo_step = dbu_from_json_um(p["halo_step_um"]);
    if (p.contains("halo_max_um"))
      c.tiling.halo_max = dbu_from_json_um(p["halo_max_um"]);
  }
  if (j.contains("placer")) {
    const json& p = j.at("placer");
    check_keys(p, "placer",
               {"gamma_um", "bin_grid", "lambda0", "lambda_growth",
                "target_density", "max_iters", "overflow_stop", "momentum",
                "step_um"});
    c.placer.gamma_um = p.value("gamma_um", c.placer.gamma_um);
    c.placer.bin_grid = p.value("bin_grid", c.placer.bin_grid);
    c.placer.lambda0 = p.value("lambda0", c.placer.lambda0);
    c.placer.lambda_growth = p.value("lambda_growth", c.placer.lambda_growth);
    c.placer.target_density = p.value("target_density", c.placer.target_density);
    c.placer.max_iters = p.value("max_iters", c.placer.max_iters);
    c.placer.overflow_stop = p.value("overflow_stop", c.placer.overflow_stop);
    c.placer.momentum = p.value("momentum", c.placer.momentum);
    c.placer.step_um = p.value("step_um", c.placer.step_um);
  }
  if (j.contains("thermal")) {
    const json& p = j.at("thermal");
    check_keys(p, "thermal",
               {"grid_n", "power_scale", "ambient_c", "r_lateral", "r_vertical",
                "r_sink", "g_sink_top", "max_sweeps"});
    c.thermal.grid_n = p.value("grid_n", c.thermal.grid_n);
    c.thermal.power_scale = p.value("power_scale", c.thermal.power_scale);
    c.thermal.ambient_c = p.value("ambient_c", c.thermal.ambient_c);
    c.thermal.r_lateral = p.value("r_lateral", c.thermal.r_lateral);
    c.thermal.r_vertical = p.value("r_vertical", c.thermal.r_vertical);
    c.thermal.r_sink = p.value("r_sink", c.thermal.r_sink);
    c.thermal.g_sink_top = p.value("g_sink_top", c.thermal.g_sink_top);
    c.thermal.max_sweeps = p.value("max_sweeps", c.thermal.max_sweeps);
  }
  // One seed drives every stage.
  c.partition.seed = c.seed;
  c.placer.seed = c.seed;
  return c;
}

PowerMap parse_power_json(const std::string& json_text) {
  const json j = parse_json_text(json_text, "power file");
  if (!j.is_object()) throw Error("power file: top level must be an object");
  PowerMap out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number())
      throw Error("power file: value for " + it.key() + " is not a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

FloorplanSpec size_die(const Design& d, const Library& lib, FlowKind flow,
                       double utilization, double aspect, const Site& site) {
  if (!(utilization > 0.0 && utilization <= 1.0))
    throw Error("utilization must be in (0, 1]");
  if (aspect <= 0.0) throw Error("aspect must be positive");
  if (site.width <= 0 || site.height <= 0) throw Error("invalid site");

  double area = total_component_area_um2(d, lib) / utilization;  // um^2
  if (flow != FlowKind::FLOW_2D) area /= 2.0;
  area = std::max(area, to_um(site.width) * to_um(site.height));

  const double h_um = std::sqrt(area / aspect);
  auto ceil_to = [](double um, DbUnit pitch) {
    const double dbu = um * kDbuPerMicron;
    const auto n = static_cast<DbUnit>(std::ceil(dbu / static_cast<double>(pitch) - 1e-9));
    return std::max<DbUnit>(1, n) * pitch;
  };

  // Height snaps up to whole rows; the width then compensates on the much
  // finer site grid so the rounded die area tracks the target closely (the
  // 2D/3D footprint ratio must stay near one half even on tiny dies).
  const DbUnit h = ceil_to(h_um, site.height);
  const double w_target = area / to_um(h);
  DbUnit w = std::max<DbUnit>(
      1, static_cast<DbUnit>(std::llround(w_target * kDbuPerMicron /
                                          static_cast<double>(site.width)))) *
             site.width;
  const double comp_area = total_component_area_um2(d, lib);
  while (to_um(w) * to_um(h) < comp_area) w += site.width;

  FloorplanSpec fp;
  fp.die = Rect{0, 0, w, h};
  fp.num_rows = static_cast<int>(fp.die.height() / site.height);
  fp.two_dies = flow != FlowKind::FLOW_2D;
  return fp;
}

std::vector<std::string> place_io(const FloorplanSpec& spec, Design& d,
                                  std::uint64_t seed) {
  std::vector<std::string> warnings;
  if (d.io_ports.empty()) return warnings;
  const Rect& die = spec.die;
  const DbUnit perim = 2 * (die.width() + die.height());
  if (perim <= 0) throw Error("place_io: degenerate die outline");

  // Counterclockwise walk from the lower-left corner.
  auto pos_at = [&](DbUnit t) {
    const DbUnit w = die.width(), h = die.height();
    t %= perim;
    if (t < w) return Point{die.lx + t, die.ly};
    t -= w;
    if (t < h) return Point{die.ux, die.ly + t};
    t -= h;
    if (t < w) return Point{die.ux - t, die.uy};
    t -= w;
    return Point{die.lx, die.uy - t};
  };

  Rng rng(seed);
  constexpr DbUnit kPortPitch = 1000;  // 1 um
  const std::int64_t slots = perim / kPortPitch;
  if (static_cast<std::int64_t>(d.io_ports.size()) <= slots) {
    std::set<std::int64_t> used;
    for (Port& p : d.io_ports) {
      std::int64_t s;
      do {
        s = rng.uniform_int(0, slots - 1);
      } while (!used.insert(s).second);
      const Point pt = pos_at(s * kPortPitch);
      p.x = pt.x;
      p.y = pt.y;
      p.die = Die::BOTTOM;
    }
  } else {
    warnings.push_back(
        "ports exceed boundary slots; spacing constraint relaxed");
    for (Port& p : d.io_ports) {
      const Point pt = pos_at(rng.uniform_int(0, perim - 1));
      p.x = pt.x;
      p.y = pt.y;
      p.die = Die::BOTTOM;
    }
  }
  return warnings;
}

namespace {

// Runs one pipeline stage, records its wall time and prefixes the stage name
// onto flow-level errors. ParseErrors pass through untouched: they already
// carry a precise location.
template <class F>
auto timed_stage(std::vector<std::pair<std::string, double>>& times,
                 const std::string& name, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto done = [&] {
    times.emplace_back(
        name, std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count());
  };
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      done();
    } else {
      auto v = f();
      done();
      return v;
    }
  } catch (const ParseError&) {
    throw;
  } catch (const InfeasibleError& e) {
    throw InfeasibleError("stage " + name + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("stage " + name + ": " + e.what());
  } catch (const Error& e) {
    throw Error("stage " + name + ": " + e.what());
  }
}

std::string json_dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string report_json(const Report& r) {
  ordered_json j;
  j["area_mm2"] = r.area_mm2;
  j["hpwl_um"] = r.hpwl_um;
  j["cut_nets"] = r.cut_nets;
  j["hbt_estimate"] = r.hbt_estimate;
  j["overflow_um2"] = r.overflow_um2;
  j["util_top"] = r.util_top;
  j["util_bottom"] = r.util_bottom;
  j["power_w"] = r.power_w;
  if (r.t_max_c)
    j["t_max_c"] = *r.t_max_c;
  else
    j["t_max_c"] = nullptr;
  j["runtime_s"] = nullptr;
  j["runtime_s_reason"] =
      "wall times excluded for byte determinism; see runtimes.json";
  return json_dump(j);
}

std::string runtimes_json(
    const std::vector<std::pair<std::string, double>>& stages) {
  ordered_json j;
  j["stages"] = ordered_json::array();
  double total = 0.0;
  for (const auto& [name, s] : stages) {
    ordered_json e;
    e["name"] = name;
    e["seconds"] = s;
    j["stages"].push_back(e);
    total += s;
  }
  j["total_s"] = total;
  return json_dump(j);
}

FlowResult run_flow(const FlowConfig& config) {
  config.validate();
  FlowResult res;
  auto& times = res.stage_runtime_s;

  Technology tech;
  Library lib;
  Design d;
  std::optional<PowerMap> power;
  timed_stage(times, "parse", [&] {
    LefFile tech_file = parse_lef(read_file(config.tech_lef));
    if (!tech_file.tech)
      throw Error("no technology section in " + config.tech_lef);
    tech = *tech_file.tech;
    for (CellMaster& m : tech_file.masters) lib.add(std::move(m));
    LefFile cells_file = parse_lef(read_file(config.cells_lef));
    for (CellMaster& m : cells_file.masters) lib.add(std::move(m));
    DefFile def_file = parse_def(read_file(config.def), lib);
    d = std::move(def_file.design);
    for (auto* w : {&tech_file.warnings, &cells_file.warnings,
                    &def_file.warnings})
      res.warnings.insert(res.warnings.end(), w->begin(), w->end());
    if (!config.power_file.empty())
      power = parse_power_json(read_file(config.power_file));
  });

  const Site site = tech.sites.empty() ? Site{"core", 190, 1400} : tech.sites[0];

  timed_stage(times, "floorplan", [&] {
    const FloorplanSpec fp = size_die(d, lib, config.flow, config.utilization,
                                      config.aspect, site);
    d.die_bottom = fp.die;
    if (fp.two_dies)
      d.die_top = fp.die;
    else
      d.die_top.reset();
  });

  timed_stage(times, "io", [&] {
    auto w = place_io(FloorplanSpec{d.die_bottom, 0, d.is_3d()}, d, config.seed);
    res.warnings.insert(res.warnings.end(), w.begin(), w.end());
  });

  Library lib_eval = lib;
  if (config.flow == FlowKind::FLOW_2D) {
    timed_stage(times, "place", [&] {
      std::vector<int> movable(d.components.size());
      for (std::size_t i = 0; i < movable.size(); ++i)
        movable[i] = static_cast<int>(i);
      PlacerParams pp = config.placer;
      pp.seed = config.seed;
      global_place(d, lib, movable, d.die_bottom, pp);
    });
    timed_stage(times, "legalize", [&] {
      macro_legalize(d, lib, macro_indices(d, lib), d.die_bottom, site);
      legalize(d, lib, Die::BOTTOM, d.die_bottom, site);
    });
  } else {
    timed_stage(times, "pdk3d", [&] {
      const Technology tech3d = mirror_metal_stack(tech, config.pdk);
      for (CellMaster& m : split_library(lib.masters, tech3d, config.pdk))
        lib_eval.add(std::move(m));
    });
    timed_stage(times, "partition", [&] {
      PartitionParams pp = config.partition;
      pp.seed = config.seed;
      const PartitionAssignment pa = partition_memory_on_logic(d, lib, pp);
      apply_partition(d, lib, pa, lib_eval);
    });
    timed_stage(times, "place", [&] {
      PlacerParams pp = config.placer;
      pp.seed = config.seed;
      if (config.flow == FlowKind::FLOW_3D_TILING) {
        tile_top_die(d, lib_eval, config.tiling);
        project_and_place_cells(d, lib_eval, pp, site);
      } else {
        run_dmp(d, lib_eval, pp, site);
      }
    });
    timed_stage(times, "io_tiers", [&] {
      auto w = assign_io_tiers(d);
      res.warnings.insert(res.warnings.end(), w.begin(), w.end());
    });
  }

  timed_stage(times, "metrics", [&] {
    res.report = make_report(d, lib_eval, config.placer.bin_grid,
                             config.placer.target_density, power);
  });

  ThermalSolution sol;
  timed_stage(times, "thermal", [&] {
    sol = evaluate_thermal(d, lib_eval, power, config.thermal);
    res.report.t_max_c = sol.t_max_c;
  });

  if (!config.out_dir.empty()) {
    timed_stage(times, "artifacts", [&] {
      const fs::path out(config.out_dir);
      fs::create_directories(out);
      write_file(out / "report.json", report_json(res.report));
      write_file(out / "placed.def", write_def(d, DefMode::COMBINED));
      if (d.is_3d()) {
        write_file(out / "top.def", write_def(d, DefMode::TOP_ONLY));
        write_file(out / "bottom.def", write_def(d, DefMode::BOTTOM_ONLY));
      }
      write_file(out / "layout.svg", render_layout_svg(d, lib_eval));
      const int planes =
          static_cast<int>(sol.temps_c.size()) /
          (config.thermal.grid_n * config.thermal.grid_n);
      write_file(out / "thermal.svg",
                 render_thermal_svg(sol.temps_c, config.thermal.grid_n, planes));
    });
    // Written after every timed stage so it can include them all.
    write_file(fs::path(config.out_dir) / "runtimes.json",
               runtimes_json(times));
  }
  return res;
}

}  // namespace open3d
