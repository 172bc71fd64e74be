#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "open3d/checker.hpp"
#include "open3d/flow.hpp"
#include "open3d/generator.hpp"
#include "open3d/lefdef.hpp"

using namespace open3d;
using namespace open3d::testutil;
namespace fs = std::filesystem;

namespace {

const Site kSite{"core", 190, 1400};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(static_cast<bool>(in), "missing " << p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("open3d_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Writes generator output as LEF/DEF inputs for run_flow.
void write_inputs(const fs::path& dir, const Generated& g) {
  spit(dir / "tech.lef", write_lef(g.tech, {}));
  spit(dir / "cells.lef", write_lef(std::nullopt, g.masters));
  spit(dir / "design.def", write_def(g.design, DefMode::COMBINED));
}

FlowConfig small_config(const fs::path& dir, FlowKind kind) {
  FlowConfig c;
  c.tech_lef = (dir / "tech.lef").string();
  c.cells_lef = (dir / "cells.lef").string();
  c.def = (dir / "design.def").string();
  c.flow = kind;
  c.seed = 1;
  c.placer.max_iters = 60;
  c.partition.iterations = 300;
  c.thermal.grid_n = 8;
  c.partition.seed = c.seed;
  c.placer.seed = c.seed;
  return c;
}

GenParams tiny_params(std::uint64_t seed) {
  GenParams p;
  p.num_macros = 4;
  p.num_cells = 80;
  p.num_ports = 8;
  p.num_nets = 140;
  p.macro_area_frac = 0.3;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("flow names round-trip and reject unknowns") {
  for (FlowKind k :
       {FlowKind::FLOW_2D, FlowKind::FLOW_3D_TILING, FlowKind::FLOW_3D_DMP})
    CHECK(flow_from_name(flow_name(k)) == k);
  CHECK_THROWS_AS(flow_from_name("FLOW_4D"), Error);
}

TEST_CASE("size_die targets area over utilization, halved per die in 3D") {
  const Generated g = generate_design(GenParams{});
  const Library lib = make_library(g.masters);
  const double comp_area = total_component_area_um2(g.design, lib);

  const FloorplanSpec fp2 =
      size_die(g.design, lib, FlowKind::FLOW_2D, 0.5, 1.0, kSite);
  CHECK_FALSE(fp2.two_dies);
  const double a2 = fp2.die.area_um2();
  CHECK(a2 >= comp_area);
  CHECK(a2 == doctest::Approx(comp_area / 0.5).epsilon(0.01));
  CHECK(fp2.die.width() % kSite.width == 0);
  CHECK(fp2.die.height() % kSite.height == 0);
  CHECK(fp2.num_rows == fp2.die.height() / kSite.height);

  for (FlowKind k : {FlowKind::FLOW_3D_TILING, FlowKind::FLOW_3D_DMP}) {
    const FloorplanSpec fp3 = size_die(g.design, lib, k, 0.5, 1.0, kSite);
    CHECK(fp3.two_dies);
    const double ratio = fp3.die.area_um2() / a2;
    CHECK(ratio >= 0.48);
    CHECK(ratio <= 0.52);
  }
}

TEST_CASE("size_die respects the aspect ratio") {
  const Generated g = generate_design(GenParams{});
  const Library lib = make_library(g.masters);
  const FloorplanSpec fp =
      size_die(g.design, lib, FlowKind::FLOW_2D, 0.6, 2.0, kSite);
  const double aspect = to_um(fp.die.width()) / to_um(fp.die.height());
  CHECK(aspect == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("place_io scatters distinct boundary slots deterministically") {
  Generated g = generate_design(GenParams{});
  const Library lib = make_library(g.masters);
  const FloorplanSpec fp =
      size_die(g.design, lib, FlowKind::FLOW_2D, 0.5, 1.0, kSite);
  Design a = g.design, b = g.design;
  CHECK(place_io(fp, a, 5).empty());
  CHECK(place_io(fp, b, 5).empty());
  CHECK(a.io_ports == b.io_ports);

  std::set<std::pair<DbUnit, DbUnit>> seen;
  for (const Port& p : a.io_ports) {
    const bool on_x = p.x == fp.die.lx || p.x == fp.die.ux;
    const bool on_y = p.y == fp.die.ly || p.y == fp.die.uy;
    CHECK((on_x || on_y));
    CHECK(p.die == Die::BOTTOM);
    CHECK(seen.insert({p.x, p.y}).second);  // all distinct
  }

  Design c = g.design;
  CHECK(place_io(fp, c, 6).empty());
  CHECK_FALSE(a.io_ports == c.io_ports);  // seed moves the ports
}

TEST_CASE("place_io relaxes spacing with a warning when slots run out") {
  Library lib;
  Design d;
  for (int i = 0; i < 30; ++i)
    d.io_ports.push_back(make_port("p" + std::to_string(i), 0, 0));
  FloorplanSpec fp;
  fp.die = Rect{0, 0, 4000, 4000};  // 16 one-micron slots
  const auto warnings = place_io(fp, d, 3);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("relaxed") != std::string::npos);
  for (const Port& p : d.io_ports) {
    const bool on_boundary = p.x == 0 || p.x == 4000 || p.y == 0 || p.y == 4000;
    CHECK(on_boundary);
  }
}

TEST_CASE("flow config parsing: defaults, nesting and seed propagation") {
  const std::string text = R"({
    "tech_lef": "t.lef", "cells_lef": "c.lef", "def": "d.def",
    "flow": "FLOW_3D_TILING", "utilization": 0.6, "seed": 42,
    "pdk3d": {"hbt_size_um": 1.0, "hbt_pitch_um": 3.0},
    "tiling": {"halo_step_um": 0.25},
    "placer": {"max_iters": 123},
    "thermal": {"grid_n": 12}
  })";
  const FlowConfig c = parse_flow_config(text);
  CHECK(c.flow == FlowKind::FLOW_3D_TILING);
  CHECK(c.utilization == 0.6);
  CHECK(c.aspect == 1.0);  // default
  CHECK(c.seed == 42);
  CHECK(c.pdk.hbt_size == 1000);
  CHECK(c.pdk.hbt_pitch == 3000);
  CHECK(c.pdk.shrunk_width == 190);  // default
  CHECK(c.tiling.halo_step == 250);
  CHECK(c.placer.max_iters == 123);
  CHECK(c.thermal.grid_n == 12);
  CHECK(c.partition.seed == 42);
  CHECK(c.placer.seed == 42);
}

TEST_CASE("flow config rejects unknown keys and malformed JSON") {
  CHECK_THROWS_WITH_AS(
      parse_flow_config(R"({"tech_lef": "t", "mystery": 1})"),
      doctest::Contains("unknown key"), Error);
  CHECK_THROWS_WITH_AS(
      parse_flow_config(R"({"placer": {"jitter": 1}})"),
      doctest::Contains("unknown key"), Error);
  CHECK_THROWS_AS(parse_flow_config("{nope"), ParseError);
  CHECK_THROWS_AS(parse_flow_config(R"({"flow": "FLOW_5D"})"), Error);
}

TEST_CASE("power JSON parsing") {
  const PowerMap pm = parse_power_json(R"({"a": 0.5, "b": 1.25})");
  CHECK(pm.at("a") == 0.5);
  CHECK(pm.at("b") == 1.25);
  CHECK_THROWS_AS(parse_power_json(R"({"a": "watts"})"), Error);
  CHECK_THROWS_AS(parse_power_json("[1,2]"), Error);
}

TEST_CASE("report JSON carries every metric and a null runtime") {
  Report r;
  r.area_mm2 = 1.5;
  r.hpwl_um = 321.25;
  r.cut_nets = 7;
  r.hbt_estimate = 7;
  r.t_max_c = 51.5;
  const std::string text = report_json(r);
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("area_mm2") == 1.5);
  CHECK(j.at("hpwl_um") == 321.25);
  CHECK(j.at("cut_nets") == 7);
  CHECK(j.at("hbt_estimate") == 7);
  CHECK(j.at("t_max_c") == 51.5);
  CHECK(j.at("runtime_s").is_null());
  CHECK(j.at("runtime_s_reason").get<std::string>().find("runtimes.json") !=
        std::string::npos);
  CHECK(text.back() == '\n');
}

TEST_CASE("runtimes JSON sums the stage times") {
  const std::string text =
      runtimes_json({{"parse", 0.5}, {"place", 1.25}});
  const auto j = nlohmann::json::parse(text);
  REQUIRE(j.at("stages").size() == 2);
  CHECK(j["stages"][0]["name"] == "parse");
  CHECK(j["stages"][1]["seconds"] == 1.25);
  CHECK(j.at("total_s") == 1.75);
}

TEST_CASE("generator is deterministic and hits its size targets") {
  const GenParams p = tiny_params(9);
  const Generated a = generate_design(p);
  const Generated b = generate_design(p);
  CHECK(a.design == b.design);
  CHECK(a.masters == b.masters);
  CHECK(a.tech == b.tech);

  CHECK(a.design.components.size() ==
        static_cast<std::size_t>(p.num_macros + p.num_cells));
  CHECK(a.design.io_ports.size() == static_cast<std::size_t>(p.num_ports));
  CHECK(a.design.nets.size() <= static_cast<std::size_t>(p.num_nets));
  CHECK(a.design.nets.size() >= static_cast<std::size_t>(p.num_nets) - 2);
  for (const Net& n : a.design.nets) CHECK(n.pins.size() >= 2);

  const Library lib = make_library(a.masters);
  double macro_area = 0.0, total = 0.0;
  for (const Component& c : a.design.components) {
    const CellMaster& m = lib.at(c.master);
    const double area = to_um(m.width) * to_um(m.height);
    total += area;
    if (m.is_macro()) macro_area += area;
  }
  CHECK(macro_area / total == doctest::Approx(0.3).epsilon(0.05));

  const Generated c = generate_design(tiny_params(10));
  CHECK_FALSE(c.design == a.design);  // seed changes the netlist
  CHECK_THROWS_AS(preset_params("huge", 1), Error);
  CHECK(preset_params("small", 1).num_cells == 400);
  CHECK(preset_params("ariane-like", 1).num_macros == 132);
}

TEST_CASE("run_flow end to end: artifacts, legality and determinism") {
  TempDir tmp("flow");
  const Generated g = generate_design(tiny_params(1));
  write_inputs(tmp.path, g);

  for (FlowKind kind : {FlowKind::FLOW_2D, FlowKind::FLOW_3D_TILING}) {
    CAPTURE(flow_name(kind));
    FlowConfig cfg = small_config(tmp.path, kind);
    cfg.out_dir = (tmp.path / flow_name(kind)).string();
    const FlowResult res = run_flow(cfg);

    CHECK(res.report.hpwl_um > 0.0);
    CHECK(res.report.power_w > 0.0);
    REQUIRE(res.report.t_max_c.has_value());
    CHECK(*res.report.t_max_c >= cfg.thermal.ambient_c);
    if (kind == FlowKind::FLOW_2D) CHECK(res.report.cut_nets == 0);

    const fs::path out(cfg.out_dir);
    for (const char* name :
         {"report.json", "placed.def", "layout.svg", "thermal.svg",
          "runtimes.json"})
      CHECK(fs::exists(out / name));
    CHECK(fs::exists(out / "top.def") == (kind != FlowKind::FLOW_2D));

    // The written placement parses back and is geometrically legal.
    LefFile tech_file = parse_lef(slurp(tmp.path / "tech.lef"));
    Library lib;
    for (const CellMaster& m : parse_lef(slurp(tmp.path / "cells.lef")).masters)
      lib.add(m);
    if (kind != FlowKind::FLOW_2D) {
      const Technology t3d = mirror_metal_stack(*tech_file.tech, cfg.pdk);
      for (CellMaster& m : split_library(lib.masters, t3d, cfg.pdk))
        lib.add(std::move(m));
    }
    DefFile placed = parse_def(slurp(out / "placed.def"), lib);
    const LegalityReport rep = check_legal(placed.design, lib, kSite);
    INFO((rep.messages.empty() ? std::string() : rep.messages[0]));
    CHECK(rep.ok());

    // Re-running the identical config reproduces every artifact byte.
    FlowConfig again = cfg;
    again.out_dir = (tmp.path / (std::string(flow_name(kind)) + "_b")).string();
    run_flow(again);
    for (const char* name : {"report.json", "placed.def", "layout.svg",
                             "thermal.svg"})
      CHECK(slurp(out / name) == slurp(fs::path(again.out_dir) / name));

    const auto rt = nlohmann::json::parse(slurp(out / "runtimes.json"));
    CHECK(rt.at("stages").size() >= 5);
    const auto rj = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(rj.at("runtime_s").is_null());
  }
}

TEST_CASE("run_flow with an empty out_dir writes nothing") {
  TempDir tmp("flow_dry");
  const Generated g = generate_design(tiny_params(2));
  write_inputs(tmp.path, g);
  const FlowConfig cfg = small_config(tmp.path, FlowKind::FLOW_2D);
  run_flow(cfg);
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(tmp.path)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 3);  // only the three inputs
}

TEST_CASE("run_flow consumes a power file and reports its total") {
  TempDir tmp("flow_pw");
  const Generated g = generate_design(tiny_params(3));
  write_inputs(tmp.path, g);

  nlohmann::ordered_json pw;
  for (const Component& c : g.design.components) pw[c.name] = 0.001;
  spit(tmp.path / "power.json", pw.dump());

  FlowConfig cfg = small_config(tmp.path, FlowKind::FLOW_2D);
  cfg.power_file = (tmp.path / "power.json").string();
  const FlowResult res = run_flow(cfg);
  CHECK(res.report.power_w ==
        doctest::Approx(0.001 * g.design.components.size()));
}

TEST_CASE("flow stage failures carry the stage name") {
  TempDir tmp("flow_err");
  const Generated g = generate_design(tiny_params(4));
  write_inputs(tmp.path, g);
  nlohmann::ordered_json pw;  // real watts so one sweep cannot converge
  for (const Component& c : g.design.components) pw[c.name] = 0.05;
  spit(tmp.path / "power.json", pw.dump());

  FlowConfig cfg = small_config(tmp.path, FlowKind::FLOW_2D);
  cfg.power_file = (tmp.path / "power.json").string();
  cfg.thermal.grid_n = 32;  // large enough to take the iterative solver
  cfg.thermal.max_sweeps = 1;
  CHECK_THROWS_WITH_AS(run_flow(cfg), doctest::Contains("stage thermal"),
                       ConvergenceError);
  cfg = small_config(tmp.path, FlowKind::FLOW_2D);
  cfg.def = (tmp.path / "missing.def").string();
  CHECK_THROWS_WITH_AS(run_flow(cfg), doctest::Contains("stage parse"), Error);
}

TEST_CASE("layout and thermal SVG rendering") {
  const Generated g = generate_design(tiny_params(5));
  Library lib = make_library(g.masters);
  Design d = g.design;
  d.die_bottom = Rect{0, 0, 100000, 100000};
  for (Component& c : d.components) c.status = PlaceStatus::PLACED;
  const std::string svg = render_layout_svg(d, lib);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(render_layout_svg(d, lib) == svg);  // deterministic bytes

  // A uniform field renders a single repeated cell color.
  std::vector<double> temps(64, 45.0);
  const std::string uniform = render_thermal_svg(temps, 8, 1);
  CHECK(uniform.rfind("<svg", 0) == 0);
  CHECK(uniform.find("45.00") != std::string::npos);
  std::vector<double> hot = temps;
  hot[10] = 90.0;
  CHECK(render_thermal_svg(hot, 8, 1) != uniform);
}
