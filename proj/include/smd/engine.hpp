#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "smd/agreement.hpp"
#include "smd/dual.hpp"
#include "smd/exec.hpp"
#include "smd/maxflow.hpp"
#include "smd/problem.hpp"

namespace smd {

enum class SolverMode { hybrid, subgradient, mma };

struct SolverConfig {
  SolverMode mode = SolverMode::hybrid;
  long long max_iterations = 2000;
  double alpha0 = 1.0;  // step size alpha_t = alpha0 / (1 + t / tau)
  double tau = 50.0;
  int oscillation_window = 10;
  long long stagnation_window = 200;
  double tie_tolerance = 1e-9;  // relative, scaled by 1 + |bound|
  double mma_fixed_point_tol = 1e-7;
  std::uint64_t rng_seed = 0;
  Exec exec = Exec::parallel;
};

struct IterationRecord {
  long long iteration = 0;
  double lower_bound = 0.0;
  double primal_energy = 0.0;
  double violation = 0.0;  // recolor fraction of the extracted primal
  AgreementStatus agreement = AgreementStatus::none;
  double seconds = 0.0;  // wall clock since the start of the run
};

struct IterationTrace {
  std::vector<IterationRecord> records;
};

// Columns: iter,lower_bound,primal_energy,violation,agreement,seconds.
// Timing is suppressed by default (zeros) so traces from identical runs are
// byte-identical; pass include_timing to emit the measured wall clock.
void write_trace_csv(const IterationTrace& trace, std::ostream& os, bool include_timing = false);

// Binary subproblem of one label at the given dual point: reweighted unaries,
// one Potts term per edge, star-prior terms for this label, offset 0.
BinaryEnergy build_subproblem(const MRFProblem& problem, int label, const DualState& dual);

struct DualEvaluation {
  double bound = 0.0;
  std::vector<SubproblemSolution> solutions;
};

// Solves all per-label subproblems (with min-marginals) and assembles the
// dual lower bound. The solves are independent and run under `exec`.
DualEvaluation dual_value(const MRFProblem& problem, const DualState& dual,
                          Exec exec = Exec::parallel, bool want_marginals = true);

struct Subgradient {
  std::vector<double> lambda, mu, kappa;
};

Subgradient subgradient(const MRFProblem& problem, const DualState& dual,
                        const std::vector<SubproblemSolution>& solutions);

// lambda += step g, mu += step g, kappa = max(0, kappa + step g); bumps the
// iteration counter. best_bound is updated by the next dual evaluation.
void ascent_step(DualState& dual, const Subgradient& g, double step);

struct MmaAudit {
  int node = 0;
  double delta_lambda = 0.0;
  double bound_before = 0.0;
  double bound_after = 0.0;
};

// One coordinate of min-marginal averaging:
// lambda_j += max_p [th_jp(0) - th_jp(1)] at the current point. Asserts the
// bound did not decrease (within 1e-9); a violation signals a min-marginal
// bug and throws InternalError.
MmaAudit mma_update(const MRFProblem& problem, DualState& dual, int node,
                    Exec exec = Exec::parallel);

struct OptimizeHooks {
  std::function<void(const DualState&, const DualEvaluation&)> on_iteration;
  std::function<void(const MmaAudit&)> on_mma_update;
};

struct OptimizeResult {
  DualState dual;
  IterationTrace trace;
  Labeling labeling;
  AgreementStatus agreement = AgreementStatus::none;
  double primal_energy = 0.0;
  ViolationReport primal_violation;
};

// Subgradient ascent with a one-sweep switch to min-marginal averaging when
// the bound oscillates (or pure subgradient / pure MMA per config.mode).
// Stops on strong agreement, the MMA fixed point (mma mode), bound
// stagnation, or the iteration cap; extracts the final primal through the
// agreement module.
OptimizeResult optimize(const MRFProblem& problem, const SolverConfig& config,
                        const OptimizeHooks& hooks = {});

}  // namespace smd
