#include "open3d/partition.hpp"

#include <cmath>
#include <unordered_map>

#include "open3d/rng.hpp"

namespace open3d {

void PartitionParams::validate() const {
  if (std::abs(w_cut + w_util - 1.0) > 1e-12)
    throw Error("partition weights must sum to 1");
  if (alpha <= 0.0 || alpha >= 1.0) throw Error("alpha must lie in (0, 1)");
  if (iterations < 0) throw Error("iteration count must be non-negative");
}

std::vector<int> macro_indices(const Design& d, const Library& lib) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(d.components.size()); ++i)
    if (lib.at(d.components[i].master).is_macro()) out.push_back(i);
  return out;
}

namespace {

// Connectivity digest reused across EA iterations: per net, whether any pin
// is pinned to a die regardless of the macro bits, plus the macro ordinals
// it touches.
struct PartitionEval {
  PartitionEval(const Design& d, const Library& lib) {
    const std::vector<int> macros = macro_indices(d, lib);
    std::unordered_map<int, int> ordinal;
    for (int i = 0; i < static_cast<int>(macros.size()); ++i)
      ordinal[macros[i]] = i;

    macro_area_um2.resize(macros.size());
    for (int i = 0; i < static_cast<int>(macros.size()); ++i) {
      const CellMaster& m = lib.at(d.components[macros[i]].master);
      macro_area_um2[i] = to_um(m.width) * to_um(m.height);
    }
    cell_area_um2 = 0.0;
    for (const auto& c : d.components) {
      const CellMaster& m = lib.at(c.master);
      if (!m.is_macro()) cell_area_um2 += to_um(m.width) * to_um(m.height);
    }
    die_area_um2 = d.die_bottom.area_um2();

    DesignIndex index(d);
    nets.reserve(d.nets.size());
    for (const auto& net : d.nets) {
      NetInfo info;
      for (const auto& ref : net.pins) {
        if (ref.is_port) {
          const Port& p = d.io_ports[index.port(ref.pin)];
          (p.die == Die::TOP ? info.fixed_top : info.fixed_bottom) = true;
        } else {
          int ci = index.component(ref.comp);
          auto it = ordinal.find(ci);
          if (it != ordinal.end())
            info.macros.push_back(it->second);
          else
            info.fixed_bottom = true;  // standard cells stay on the bottom die
        }
      }
      nets.push_back(std::move(info));
    }
  }

  int cut(const std::vector<std::uint8_t>& bits) const {
    int count = 0;
    for (const auto& net : nets) {
      bool top = net.fixed_top;
      bool bottom = net.fixed_bottom;
      for (int m : net.macros) {
        (bits[m] ? top : bottom) = true;
        if (top && bottom) break;
      }
      if (top && bottom) ++count;
    }
    return count;
  }

  double util_top(const std::vector<std::uint8_t>& bits) const {
    double a = 0.0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) a += macro_area_um2[i];
    return a / die_area_um2;
  }

  double util_bottom(const std::vector<std::uint8_t>& bits) const {
    double a = cell_area_um2;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (!bits[i]) a += macro_area_um2[i];
    return a / die_area_um2;
  }

  double fitness(const std::vector<std::uint8_t>& bits,
                 const PartitionParams& p) const {
    double norm = nets.empty() ? 1.0 : static_cast<double>(nets.size());
    double cut_term = cut(bits) / norm;
    double util_term = std::abs(util_top(bits) - util_bottom(bits));
    return p.w_cut * cut_term + p.w_util * util_term;
  }

  struct NetInfo {
    bool fixed_top = false;
    bool fixed_bottom = false;
    std::vector<int> macros;
  };
  std::vector<NetInfo> nets;
  std::vector<double> macro_area_um2;
  double cell_area_um2 = 0.0;
  double die_area_um2 = 1.0;
};

}  // namespace

int cut_value(const Design& d, const Library& lib,
              const std::vector<std::uint8_t>& macro_bits) {
  return PartitionEval(d, lib).cut(macro_bits);
}

double fitness(const Design& d, const Library& lib,
               const std::vector<std::uint8_t>& macro_bits,
               const PartitionParams& params) {
  params.validate();
  return PartitionEval(d, lib).fitness(macro_bits, params);
}

PartitionAssignment partition_memory_on_logic(const Design& d,
                                              const Library& lib,
                                              const PartitionParams& params) {
  params.validate();
  if (d.die_bottom.area_um2() <= 0.0) throw Error("die outline not set");
  PartitionEval eval(d, lib);
  const std::size_t n = eval.macro_area_um2.size();

  std::vector<std::uint8_t> current(n, 1);  // memory-on-logic start: all TOP
  double f_current = eval.fitness(current, params);
  std::vector<std::uint8_t> best = current;
  double f_best = f_current;

  Rng rng(params.seed);
  const double flip_p = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  double temperature = params.t0;
  for (int iter = 0; n > 0 && iter < params.iterations; ++iter) {
    std::vector<std::uint8_t> offspring = current;
    bool flipped = false;
    while (!flipped) {
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < flip_p) {
          offspring[i] ^= 1;
          flipped = true;
        }
      }
    }
    double f_off = eval.fitness(offspring, params);
    double delta = f_off - f_current;
    bool accept = delta <= 0.0;
    if (!accept && temperature > 0.0)
      accept = rng.uniform() < std::exp(-delta / temperature);
    if (accept) {
      current = std::move(offspring);
      f_current = f_off;
      if (f_current < f_best) {
        best = current;
        f_best = f_current;
      }
    }
    temperature *= params.alpha;
  }

  PartitionAssignment out;
  out.macro_bits = best;
  out.cut_nets = eval.cut(best);
  out.util_top = eval.util_top(best);
  out.util_bottom = eval.util_bottom(best);
  out.fitness = f_best;
  return out;
}

void apply_partition(Design& d, const Library& lib,
                     const PartitionAssignment& assignment,
                     const Library& lib3d) {
  const std::vector<int> macros = macro_indices(d, lib);
  if (macros.size() != assignment.macro_bits.size())
    throw Error("assignment size does not match macro count");
  std::unordered_map<int, std::size_t> ordinal;
  for (std::size_t i = 0; i < macros.size(); ++i) ordinal[macros[i]] = i;
  for (int i = 0; i < static_cast<int>(d.components.size()); ++i) {
    Component& c = d.components[i];
    auto it = ordinal.find(i);
    bool top = it != ordinal.end() && assignment.macro_bits[it->second];
    c.die = top ? Die::TOP : Die::BOTTOM;
    std::string variant = base_master_name(c.master) + (top ? "_top" : "_bottom");
    if (!lib3d.find(variant)) throw Error("missing 3D variant " + variant);
    c.master = variant;
  }
}

std::vector<std::string> assign_io_tiers(Design& d) {
  DesignIndex index(d);
  std::vector<int> top_votes(d.io_ports.size(), 0);
  std::vector<int> bottom_votes(d.io_ports.size(), 0);
  for (const auto& net : d.nets) {
    std::vector<int> port_refs;
    int top = 0, bottom = 0;
    for (const auto& ref : net.pins) {
      if (ref.is_port) {
        port_refs.push_back(index.port(ref.pin));
      } else {
        int ci = index.component(ref.comp);
        if (ci < 0) throw Error("net references unknown component " + ref.comp);
        (d.components[ci].die == Die::TOP ? top : bottom)++;
      }
    }
    for (int pi : port_refs) {
      top_votes[pi] += top;
      bottom_votes[pi] += bottom;
    }
  }
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < d.io_ports.size(); ++i) {
    if (top_votes[i] == 0 && bottom_votes[i] == 0) {
      d.io_ports[i].die = Die::BOTTOM;
      warnings.push_back("dangling port '" + d.io_ports[i].name +
                         "' kept on the bottom die");
    } else {
      d.io_ports[i].die =
          top_votes[i] > bottom_votes[i] ? Die::TOP : Die::BOTTOM;
    }
  }
  return warnings;
}

}  // namespace open3d
