#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "smd/maxflow.hpp"

namespace smd {

struct MRFProblem;

// Lagrange multipliers of the decomposition: one lambda per node (label
// consistency), one mu per equality constraint, one kappa >= 0 per
// inequality constraint, plus best-bound bookkeeping.
struct DualState {
  std::vector<double> lambda;
  std::vector<double> mu;
  std::vector<double> kappa;
  double best_bound = -std::numeric_limits<double>::infinity();
  long long iteration = 0;
};

DualState make_dual_state(const MRFProblem& problem);

// Minimizer of one label's binary subproblem, its value, and the unary
// min-marginals of that subproblem at the same dual point.
struct SubproblemSolution {
  int label = 0;
  std::vector<std::uint8_t> argmin;
  double value = 0.0;
  MinMarginals min_marginals;
};

}  // namespace smd
