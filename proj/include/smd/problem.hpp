#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smd/constraints.hpp"
#include "smd/star_prior.hpp"

namespace smd {

struct Edge {
  int i = 0;
  int j = 0;  // canonical form keeps i < j
};

// One label per node, values in {0 .. label_count-1}.
struct Labeling {
  std::vector<int> labels;
};

// Per-label binary indicators; rows may violate sum_p y_jp = 1 (the
// relaxation works on this larger set).
struct IndicatorMatrix {
  int node_count = 0;
  int label_count = 0;
  std::vector<std::uint8_t> y;  // node-major

  std::uint8_t at(int j, int p) const { return y[static_cast<std::size_t>(j) * label_count + p]; }
  void set(int j, int p, std::uint8_t v) { y[static_cast<std::size_t>(j) * label_count + p] = v; }
};

// Associative multi-label MRF: unary costs theta_jp plus a reward -C_{ij,p}
// whenever both endpoints of an edge take label p (C >= 0), with optional
// global linear constraints and star-shape priors.
//
// Immutable after construction; safe for concurrent reads.
struct MRFProblem {
  int node_count = 0;
  int label_count = 0;
  int grid_height = 0;  // 0 when the problem is not grid-structured
  int grid_width = 0;
  std::vector<Edge> edges;
  std::vector<double> unary;  // node-major, node_count x label_count
  std::vector<double> assoc;  // edge-major, edge_count x label_count, all >= 0
  std::vector<LinearConstraint> constraints;
  std::vector<StarPrior> star_priors;

  double theta(int j, int p) const { return unary[static_cast<std::size_t>(j) * label_count + p]; }
  double& theta(int j, int p) { return unary[static_cast<std::size_t>(j) * label_count + p]; }
  double assoc_at(int e, int p) const { return assoc[static_cast<std::size_t>(e) * label_count + p]; }

  // Appends the edge in canonical orientation with per-label strengths c.
  void add_edge(int i, int j, std::span<const double> c);

  int equality_count() const;
  int inequality_count() const;
};

// Throws InputError on any violated structural invariant.
void validate(const MRFProblem& problem);

double energy(const MRFProblem& problem, const Labeling& labeling);

IndicatorMatrix indicator_of(const Labeling& labeling, int label_count);

// Inverse of indicator_of; defined only when every row sums to 1.
Labeling labeling_of(const IndicatorMatrix& y);

// Evaluates the indicator form directly; rows need not sum to 1.
double energy_indicator(const MRFProblem& problem, const IndicatorMatrix& y);

// Finite stand-in for the infinite star-prior penalty in energy(): larger
// than any finite energy spread of the problem, so violating labelings never
// win but all values stay finite and comparable to the dual bound.
double star_energy_big_m(const MRFProblem& problem);

}  // namespace smd
