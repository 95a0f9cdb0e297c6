#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "smd/dual.hpp"
#include "smd/problem.hpp"

namespace smd {

// Z[j][p]: the set of values node j takes across optimal solutions of
// subproblem p, detected from min-marginals up to a tolerance.
struct LabelSetTable {
  int node_count = 0;
  int label_count = 0;
  std::vector<std::uint8_t> mask;  // bit 1: contains 0, bit 2: contains 1

  std::uint8_t at(int j, int p) const { return mask[static_cast<std::size_t>(j) * label_count + p]; }
  bool contains(int j, int p, int k) const { return at(j, p) & (k == 0 ? 1 : 2); }
  bool is_free(int j, int p) const { return at(j, p) == 3; }
};

// k in Z[j][p] iff th(k) <= min(th(0), th(1)) + tol.
LabelSetTable label_sets(const std::vector<SubproblemSolution>& solutions, double tol);

// Every node selected by exactly one label, with all other labels firmly off.
bool strong_agreement(const LabelSetTable& table);

// Necessary condition at the dual optimum: some label can be on, and a firmly
// selected label leaves every other label able to be off.
bool weak_agreement(const LabelSetTable& table);

enum class AgreementStatus { none, weak, strong };
AgreementStatus agreement_status(const LabelSetTable& table);

// Free(p) = nodes with Z[j][p] = {0,1}, split into connected components of
// the induced subgraph of the MRF graph (star-prior edges are not part of it).
struct FreeDecomposition {
  // components[p] lists each component as a sorted node list.
  std::vector<std::vector<std::vector<int>>> components;
};

FreeDecomposition free_decomposition(const MRFProblem& problem, const LabelSetTable& table);

// Flipping all free nodes of subproblem p (and each free component
// independently) to all-ones / all-zeros must preserve the subproblem value.
bool free_flip_check(const MRFProblem& problem, int p, const DualState& dual,
                     const SubproblemSolution& solution, double tie_tol = 1e-9,
                     double value_tol = 1e-9);

struct PrimalReconstruction {
  std::optional<Labeling> labeling;
  std::vector<int> conflict_nodes;  // uncovered/ambiguous nodes when no disjoint cover exists
};

// Covers the free region by disjoint free components (greedy largest-first
// with bounded backtracking), assigns each component its label and every
// determined node its unique selected label. Requires weak agreement.
PrimalReconstruction reconstruct_primal(const MRFProblem& problem, const LabelSetTable& table,
                                        const FreeDecomposition& free,
                                        const std::vector<SubproblemSolution>& solutions,
                                        int backtrack_cap = 1000);

// Fallback primal: unique selections stay, each connected component of
// conflicting nodes gets one label drawn from the union of its selections,
// unselected nodes take argmin_p th_jp(1).
Labeling heuristic_primal(const MRFProblem& problem,
                          const std::vector<SubproblemSolution>& solutions,
                          std::uint64_t rng_seed);

}  // namespace smd
