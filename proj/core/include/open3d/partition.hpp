#ifndef OPEN3D_PARTITION_HPP
#define OPEN3D_PARTITION_HPP

#include <cstdint>
#include <vector>

#include "open3d/model.hpp"

namespace open3d {

struct PartitionParams {
  double w_cut = 0.5;
  double w_util = 0.5;
  int iterations = 2000;
  double t0 = 0.1;
  double alpha = 0.995;
  std::uint64_t seed = 1;

  void validate() const;
};

// Per-macro die bits (1 = TOP) in macro order, plus derived statistics.
struct PartitionAssignment {
  std::vector<std::uint8_t> macro_bits;
  int cut_nets = 0;
  double util_top = 0.0;
  double util_bottom = 0.0;
  double fitness = 0.0;
};

// Component indices of BLOCK-class components, in component order. This is
// the macro ordering macro_bits indexes.
std::vector<int> macro_indices(const Design& d, const Library& lib);

// Number of nets with at least one pin on each die under the assignment:
// standard cells on BOTTOM, macros per bits, ports per their current die.
int cut_value(const Design& d, const Library& lib,
              const std::vector<std::uint8_t>& macro_bits);

// w_cut * cut/|nets| + w_util * |util_top - util_bottom|.
double fitness(const Design& d, const Library& lib,
               const std::vector<std::uint8_t>& macro_bits,
               const PartitionParams& params);

// (1+1) evolutionary search with bitwise mutation and simulated-annealing
// acceptance; starts from all macros on the top die and returns the
// best-ever assignment. Deterministic given the seed.
PartitionAssignment partition_memory_on_logic(const Design& d,
                                              const Library& lib,
                                              const PartitionParams& params);

// Sets component die fields per the assignment (cells stay BOTTOM) and
// rewrites master names to their _top/_bottom variants, which must exist in
// lib3d.
void apply_partition(Design& d, const Library& lib,
                     const PartitionAssignment& assignment,
                     const Library& lib3d);

// Each port moves to the majority die of its connected component pins; ties
// and dangling ports stay BOTTOM. Returns one warning per dangling port.
std::vector<std::string> assign_io_tiers(Design& d);

}  // namespace open3d

#endif
