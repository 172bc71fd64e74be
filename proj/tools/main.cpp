#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "open3d/checker.hpp"
#include "open3d/flow.hpp"
#include "open3d/generator.hpp"
#include "open3d/lefdef.hpp"

namespace fs = std::filesystem;
using namespace open3d;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << text;
}

struct Inputs {
  Technology tech;
  Library lib;  // tech-LEF masters plus cells-LEF masters
  std::vector<std::string> warnings;
};

Inputs load_lefs(const std::string& tech_path, const std::string& cells_path) {
  Inputs in;
  LefFile tf = parse_lef(read_file(tech_path));
  if (!tf.tech) throw Error("no technology section in " + tech_path);
  in.tech = *tf.tech;
  for (CellMaster& m : tf.masters) in.lib.add(std::move(m));
  if (!cells_path.empty()) {
    LefFile cf = parse_lef(read_file(cells_path));
    for (CellMaster& m : cf.masters) in.lib.add(std::move(m));
    in.warnings = std::move(cf.warnings);
  }
  in.warnings.insert(in.warnings.end(), tf.warnings.begin(), tf.warnings.end());
  return in;
}

// Base masters plus the 3D split variants, for reading partitioned DEFs.
Library lib_with_variants(const Inputs& in, const Pdk3dConfig& pdk) {
  Library lib = in.lib;
  const Technology tech3d = mirror_metal_stack(in.tech, pdk);
  for (CellMaster& m : split_library(in.lib.masters, tech3d, pdk))
    lib.add(std::move(m));
  return lib;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

int threads_cap() {
  // Everything in this build is single-threaded; the variable is accepted so
  // callers can pin a cap without per-tool special cases.
  if (const char* env = std::getenv("OPEN3D_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  (void)threads_cap();
  CLI::App app{"3D-IC backend flow: PDK stacking, tier partition, placement, "
               "evaluation"};
  app.require_subcommand(1);

  // --- pdk3d ---------------------------------------------------------------
  auto* sc_pdk = app.add_subcommand("pdk3d", "build the 3D technology and split library");
  std::string a_tech, a_cells, a_out_tech, a_out_cells;
  double a_hbt_size = 0.5, a_hbt_pitch = 1.5;
  sc_pdk->add_option("--tech", a_tech, "2D technology LEF")->required();
  sc_pdk->add_option("--cells", a_cells, "2D cell library LEF")->required();
  sc_pdk->add_option("--out-tech", a_out_tech, "output 3D technology LEF")->required();
  sc_pdk->add_option("--out-cells", a_out_cells, "output split-library LEF")->required();
  sc_pdk->add_option("--hbt-size", a_hbt_size, "bond pad size, um");
  sc_pdk->add_option("--hbt-pitch", a_hbt_pitch, "bond pad pitch, um");

  // --- partition -------------------------------------------------------------
  auto* sc_part = app.add_subcommand("partition", "memory-on-logic tier partition");
  std::string p_tech, p_cells, p_def, p_out;
  PartitionParams p_params;
  sc_part->add_option("--tech", p_tech)->required();
  sc_part->add_option("--cells", p_cells)->required();
  sc_part->add_option("--def", p_def, "input netlist DEF")->required();
  sc_part->add_option("--out", p_out, "partitioned DEF")->required();
  sc_part->add_option("--iterations", p_params.iterations);
  sc_part->add_option("--seed", p_params.seed);
  sc_part->add_option("--w-cut", p_params.w_cut);
  sc_part->add_option("--w-util", p_params.w_util);

  // --- place ----------------------------------------------------------------
  auto* sc_place = app.add_subcommand("place", "3D placement");
  std::string pl_engine, pl_tech, pl_cells, pl_def, pl_out;
  std::uint64_t pl_seed = 1;
  sc_place->add_option("engine", pl_engine, "tiling | dmp")->required();
  sc_place->add_option("--tech", pl_tech)->required();
  sc_place->add_option("--cells", pl_cells)->required();
  sc_place->add_option("--def", pl_def, "partitioned DEF")->required();
  sc_place->add_option("--out", pl_out, "placed DEF")->required();
  sc_place->add_option("--seed", pl_seed);

  // --- eval -----------------------------------------------------------------
  auto* sc_eval = app.add_subcommand("eval", "metrics report for a placed DEF");
  std::string e_tech, e_cells, e_def, e_out, e_power;
  sc_eval->add_option("--tech", e_tech)->required();
  sc_eval->add_option("--cells", e_cells)->required();
  sc_eval->add_option("--def", e_def, "placed DEF")->required();
  sc_eval->add_option("--out", e_out, "report JSON")->required();
  sc_eval->add_option("--power", e_power, "component power JSON");

  // --- thermal ----------------------------------------------------------------
  auto* sc_th = app.add_subcommand("thermal", "steady-state thermal simulation");
  std::string t_tech, t_cells, t_def, t_out, t_power;
  ThermalParams t_params;
  sc_th->add_option("--tech", t_tech)->required();
  sc_th->add_option("--cells", t_cells)->required();
  sc_th->add_option("--def", t_def, "placed DEF")->required();
  sc_th->add_option("--out", t_out, "thermal JSON (heat map SVG written beside it)")->required();
  sc_th->add_option("--power", t_power, "component power JSON");
  sc_th->add_option("--grid", t_params.grid_n);
  sc_th->add_option("--scale", t_params.power_scale);

  // --- flow -------------------------------------------------------------------
  auto* sc_flow = app.add_subcommand("flow", "end-to-end flow");
  auto* sc_flow_run = sc_flow->add_subcommand("run", "run a flow config");
  std::string f_config;
  sc_flow_run->add_option("config", f_config, "flow config JSON")->required();
  sc_flow->require_subcommand(1);

  // --- gen --------------------------------------------------------------------
  auto* sc_gen = app.add_subcommand("gen", "generate a synthetic design");
  std::string g_preset = "small", g_out = ".";
  std::uint64_t g_seed = 1;
  sc_gen->add_option("--preset", g_preset, "small | ariane-like");
  sc_gen->add_option("--seed", g_seed);
  sc_gen->add_option("--out", g_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc_pdk->parsed()) {
      Inputs in = load_lefs(a_tech, a_cells);
      print_warnings(in.warnings);
      Pdk3dConfig pdk;
      pdk.hbt_size = from_um(a_hbt_size);
      pdk.hbt_pitch = from_um(a_hbt_pitch);
      const Technology tech3d = mirror_metal_stack(in.tech, pdk);
      const auto split = split_library(in.lib.masters, tech3d, pdk);
      write_file(a_out_tech, write_lef(tech3d, {}));
      write_file(a_out_cells, write_lef(std::nullopt, split));
    } else if (sc_part->parsed()) {
      Inputs in = load_lefs(p_tech, p_cells);
      DefFile df = parse_def(read_file(p_def), in.lib);
      print_warnings(in.warnings);
      print_warnings(df.warnings);
      Design d = df.design;
      const Library lib3 = lib_with_variants(in, Pdk3dConfig{});
      const PartitionAssignment pa =
          partition_memory_on_logic(d, in.lib, p_params);
      apply_partition(d, in.lib, pa, lib3);
      if (!d.die_top) d.die_top = d.die_bottom;
      write_file(p_out, write_def(d, DefMode::COMBINED));
      std::cout << "cut_nets " << pa.cut_nets << " fitness " << pa.fitness
                << "\n";
    } else if (sc_place->parsed()) {
      if (pl_engine != "tiling" && pl_engine != "dmp")
        throw CLI::ValidationError("engine must be tiling or dmp");
      Inputs in = load_lefs(pl_tech, pl_cells);
      const Library lib3 = lib_with_variants(in, Pdk3dConfig{});
      DefFile df = parse_def(read_file(pl_def), lib3);
      print_warnings(in.warnings);
      print_warnings(df.warnings);
      Design d = df.design;
      if (!d.die_top) throw Error("place expects a partitioned two-die DEF");
      const Site site =
          in.tech.sites.empty() ? Site{"core", 190, 1400} : in.tech.sites[0];
      PlacerParams pp;
      pp.seed = pl_seed;
      if (pl_engine == "tiling") {
        tile_top_die(d, lib3, TilingParams{});
        project_and_place_cells(d, lib3, pp, site);
      } else {
        run_dmp(d, lib3, pp, site);
      }
      write_file(pl_out, write_def(d, DefMode::COMBINED));
    } else if (sc_eval->parsed()) {
      Inputs in = load_lefs(e_tech, e_cells);
      const Library lib3 = lib_with_variants(in, Pdk3dConfig{});
      DefFile df = parse_def(read_file(e_def), lib3);
      print_warnings(in.warnings);
      print_warnings(df.warnings);
      std::optional<PowerMap> power;
      if (!e_power.empty()) power = parse_power_json(read_file(e_power));
      const Report r = make_report(df.design, lib3, 64, 0.8, power);
      write_file(e_out, report_json(r));
    } else if (sc_th->parsed()) {
      Inputs in = load_lefs(t_tech, t_cells);
      const Library lib3 = lib_with_variants(in, Pdk3dConfig{});
      DefFile df = parse_def(read_file(t_def), lib3);
      print_warnings(in.warnings);
      print_warnings(df.warnings);
      std::optional<PowerMap> power;
      if (!t_power.empty()) power = parse_power_json(read_file(t_power));
      const ThermalSolution sol =
          evaluate_thermal(df.design, lib3, power, t_params);
      const int n = t_params.grid_n;
      const int planes = static_cast<int>(sol.temps_c.size()) / (n * n);
      nlohmann::ordered_json j;
      j["t_max_c"] = sol.t_max_c;
      j["grid_n"] = n;
      j["planes"] = planes;
      j["temps_c"] = nlohmann::ordered_json::array();
      for (int p = 0; p < planes; ++p) {
        nlohmann::ordered_json plane = nlohmann::ordered_json::array();
        for (int row = 0; row < n; ++row) {
          nlohmann::ordered_json r = nlohmann::ordered_json::array();
          for (int col = 0; col < n; ++col)
            r.push_back(sol.temps_c[p * n * n + row * n + col]);
          plane.push_back(r);
        }
        j["temps_c"].push_back(plane);
      }
      write_file(t_out, j.dump(2) + "\n");
      fs::path svg = fs::path(t_out).replace_extension(".svg");
      write_file(svg.string(), render_thermal_svg(sol.temps_c, n, planes));
    } else if (sc_flow_run->parsed()) {
      FlowConfig cfg = parse_flow_config(read_file(f_config));
      if (cfg.out_dir.empty())
        cfg.out_dir = fs::path(f_config).parent_path().string();
      const FlowResult res = run_flow(cfg);
      print_warnings(res.warnings);
      std::cout << report_json(res.report);
    } else if (sc_gen->parsed()) {
      const Generated g = generate_design(preset_params(g_preset, g_seed));
      fs::create_directories(g_out);
      write_file((fs::path(g_out) / "tech.lef").string(),
                 write_lef(g.tech, {}));
      write_file((fs::path(g_out) / "cells.lef").string(),
                 write_lef(std::nullopt, g.masters));
      write_file((fs::path(g_out) / "design.def").string(),
                 write_def(g.design, DefMode::COMBINED));
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 4;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
