#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smd/exec.hpp"
#include "smd/maxflow.hpp"
#include "smd/problem.hpp"

namespace smd {

// Exhaustive ground truth for small instances. Enumeration is deliberately
// dumb (full re-evaluation per labeling) so it stays trustworthy.
struct OracleResult {
  double optimum = 0.0;
  bool feasible = true;
  std::vector<Labeling> minimizers;  // enumeration order, up to the cap
  long long enumerated_count = 0;
};

// Guard: label_count^node_count <= 10^7, else CapacityError.
OracleResult brute_force(const MRFProblem& problem, Exec exec = Exec::parallel,
                         int minimizer_cap = 64);

// Minimum over labelings satisfying every constraint (equalities within 1e-9,
// inequalities up to rhs + 1e-9). An empty feasible set is reported via
// feasible = false, not an error.
OracleResult brute_force_constrained(const MRFProblem& problem, Exec exec = Exec::parallel,
                                     int minimizer_cap = 64);

// Exact minimum over all 2^n assignments; guard n <= 20.
std::pair<std::vector<std::uint8_t>, double> brute_force_binary(const BinaryEnergy& energy);

}  // namespace smd
