#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "smd/exec.hpp"

namespace smd {

struct PairwiseTerm {
  int i = 0;
  int j = 0;
  double e00 = 0.0, e01 = 0.0, e10 = 0.0, e11 = 0.0;
};

// Binary pairwise energy
//
//   E(y) = offset + sum_j a_j y_j + sum_t e_t(y_i, y_j),   y in {0,1}^n,
//
// minimized exactly by s-t min-cut when every pairwise table satisfies
// e00 + e11 <= e01 + e10.
struct BinaryEnergy {
  static constexpr std::size_t npos = ~std::size_t{0};

  int node_count = 0;
  std::vector<double> unary;  // a_j = energy contribution of y_j = 1
  std::vector<PairwiseTerm> pairwise;
  double offset = 0.0;

  BinaryEnergy() = default;
  explicit BinaryEnergy(int nodes) : node_count(nodes), unary(nodes, 0.0) {}

  void add_unary(int j, double a);
  void add_pairwise(int i, int j, double e00, double e01, double e10, double e11);

  double value(std::span<const std::uint8_t> assignment) const;

  // Index of the first term violating e00 + e11 <= e01 + e10 + tol, or npos.
  std::size_t first_nonsubmodular(double tol = 0.0) const;

  // 1 + sum_j |a_j| + sum_t (|e00|+|e01|+|e10|+|e11|): strictly dominates any
  // achievable cut, so a terminal arc of this capacity is never saturated at
  // an optimum.
  double dominance_big_m() const;
};

class FlowGraph;  // Boykov-Kolmogorov max-flow state; owned by one solve

struct CutResult {
  std::vector<std::uint8_t> argmin;
  double min_value = 0.0;
  // Opaque solved-graph handle; enables min-marginal queries against the same
  // energy. Not shareable across concurrent queries.
  std::shared_ptr<FlowGraph> flow_graph;
};

// Exact global minimizer. Throws SubmodularityError on a bad pairwise term.
// Tie-breaking among multiple minimizers is deterministic given input order.
CutResult minimize(const BinaryEnergy& energy);

// min over assignments with y_j = k, realized by a big-M terminal clamp.
double clamped_min(const BinaryEnergy& energy, int j, int k);

// Same value, recycling the solved base flow: copies the base graph, clamps
// one terminal, and resolves only the repair work. Agrees with the cold path
// well within 1e-9.
double clamped_min(const CutResult& base, int j, int k);

// m[j][k] = min of the energy over assignments with y_j = k.
struct MinMarginals {
  std::vector<double> m0, m1;
  double at(int j, int k) const { return k == 0 ? m0[j] : m1[j]; }
  bool empty() const { return m0.empty(); }
};

MinMarginals min_marginals(const BinaryEnergy& energy, Exec exec = Exec::parallel);

// Variant reusing a base solve: the side agreeing with base.argmin[j] equals
// base.min_value and needs no extra solve.
MinMarginals min_marginals(const BinaryEnergy& energy, const CutResult& base,
                           Exec exec = Exec::parallel);

}  // namespace smd
