#include "smd/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "smd/errors.hpp"
#include "smd/text.hpp"

namespace smd {

DualState make_dual_state(const MRFProblem& pb) {
  DualState dual;
  dual.lambda.assign(pb.node_count, 0.0);
  dual.mu.assign(pb.equality_count(), 0.0);
  dual.kappa.assign(pb.inequality_count(), 0.0);
  return dual;
}

namespace {

void check_dual(const MRFProblem& pb, const DualState& dual) {
  if (dual.lambda.size() != static_cast<std::size_t>(pb.node_count) ||
      dual.mu.size() != static_cast<std::size_t>(pb.equality_count()) ||
      dual.kappa.size() != static_cast<std::size_t>(pb.inequality_count()))
    throw InputError("dual state dimensions do not match the problem");
  for (double v : dual.lambda)
    if (!std::isfinite(v)) throw InputError("non-finite lambda");
  for (double v : dual.mu)
    if (!std::isfinite(v)) throw InputError("non-finite mu");
  for (double v : dual.kappa)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("kappa must be >= 0");
}

// sum_j lambda_j + sum_m mu_m c^m + sum_k kappa_k d^k
double dual_offset(const MRFProblem& pb, const DualState& dual) {
  double s = 0.0;
  for (double v : dual.lambda) s += v;
  int mi = 0, ki = 0;
  for (const LinearConstraint& c : pb.constraints)
    s += (c.kind == ConstraintKind::equality ? dual.mu[mi++] : dual.kappa[ki++]) * c.rhs;
  return s;
}

}  // namespace

BinaryEnergy build_subproblem(const MRFProblem& pb, int p, const DualState& dual) {
  if (p < 0 || p >= pb.label_count) throw InputError("label index out of range");
  check_dual(pb, dual);
  BinaryEnergy e(pb.node_count);
  for (int j = 0; j < pb.node_count; ++j) e.unary[j] = pb.theta(j, p) + dual.lambda[j];
  for (std::size_t k = 0; k < pb.edges.size(); ++k) {
    const Edge& edge = pb.edges[k];
    const double c = pb.assoc_at(static_cast<int>(k), p);
    e.unary[edge.i] -= 0.5 * c;
    e.unary[edge.j] -= 0.5 * c;
    e.add_pairwise(edge.i, edge.j, 0.0, 0.5 * c, 0.5 * c, 0.0);
  }
  int mi = 0, ki = 0;
  for (const LinearConstraint& c : pb.constraints) {
    const double mult = c.kind == ConstraintKind::equality ? dual.mu[mi++] : dual.kappa[ki++];
    if (mult == 0.0) continue;
    for (const ConstraintTerm& t : c.terms)
      if (t.label == p) e.unary[t.node] += mult * t.weight;
  }
  double beta_total = 0.0;
  bool has_prior = false;
  for (const StarPrior& prior : pb.star_priors) {
    if (prior.label == p) {
      has_prior = true;
      beta_total += prior.beta * std::max(0, pb.node_count - 1);
    }
  }
  if (has_prior) {
    // Dominates the finite part of this subproblem including the beta edges
    // about to be added, so the forbidden transition is never cut.
    const double big_m = e.dominance_big_m() + beta_total + 1.0;
    for (const StarPrior& prior : pb.star_priors) {
      if (prior.label != p) continue;
      for (const PairwiseTerm& t : star_terms(prior, big_m)) e.pairwise.push_back(t);
    }
  }
  return e;
}

DualEvaluation dual_value(const MRFProblem& pb, const DualState& dual, Exec exec,
                          bool want_marginals) {
  check_dual(pb, dual);
  const int P = pb.label_count;

  std::vector<BinaryEnergy> energies(P);
  std::vector<CutResult> cuts(P);
  auto solve_base = [&](int p) {
    energies[p] = build_subproblem(pb, p, dual);
    cuts[p] = minimize(energies[p]);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < P; ++p) solve_base(p);
  } else {
    for (int p = 0; p < P; ++p) solve_base(p);
  }

  DualEvaluation ev;
  ev.solutions.resize(P);
  for (int p = 0; p < P; ++p) {
    ev.solutions[p].label = p;
    ev.solutions[p].argmin = cuts[p].argmin;
    ev.solutions[p].value = cuts[p].min_value;
    if (want_marginals)
      ev.solutions[p].min_marginals = min_marginals(energies[p], cuts[p], exec);
  }

  double sum = 0.0;
  for (int p = 0; p < P; ++p) sum += ev.solutions[p].value;
  ev.bound = sum - dual_offset(pb, dual);
  return ev;
}

Subgradient subgradient(const MRFProblem& pb, const DualState& dual,
                        const std::vector<SubproblemSolution>& sols) {
  check_dual(pb, dual);
  if (sols.size() != static_cast<std::size_t>(pb.label_count))
    throw InputError("one subproblem solution per label expected");
  Subgradient g;
  g.lambda.assign(pb.node_count, -1.0);
  for (int p = 0; p < pb.label_count; ++p)
    for (int j = 0; j < pb.node_count; ++j) g.lambda[j] += sols[p].argmin[j];
  g.mu.resize(pb.equality_count());
  g.kappa.resize(pb.inequality_count());
  int mi = 0, ki = 0;
  for (const LinearConstraint& c : pb.constraints) {
    double s = 0.0;
    for (const ConstraintTerm& t : c.terms) s += t.weight * sols[t.label].argmin[t.node];
    (c.kind == ConstraintKind::equality ? g.mu[mi++] : g.kappa[ki++]) = s - c.rhs;
  }
  return g;
}

void ascent_step(DualState& dual, const Subgradient& g, double step) {
  if (!std::isfinite(step)) throw InputError("non-finite step size");
  if (g.lambda.size() != dual.lambda.size() || g.mu.size() != dual.mu.size() ||
      g.kappa.size() != dual.kappa.size())
    throw InputError("gradient dimensions do not match the dual state");
  for (std::size_t j = 0; j < dual.lambda.size(); ++j) dual.lambda[j] += step * g.lambda[j];
  for (std::size_t m = 0; m < dual.mu.size(); ++m) dual.mu[m] += step * g.mu[m];
  for (std::size_t k = 0; k < dual.kappa.size(); ++k)
    dual.kappa[k] = std::max(0.0, dual.kappa[k] + step * g.kappa[k]);
  ++dual.iteration;
}

MmaAudit mma_update(const MRFProblem& pb, DualState& dual, int node, Exec exec) {
  if (node < 0 || node >= pb.node_count) throw InputError("node index out of range");
  check_dual(pb, dual);
  const int P = pb.label_count;

  std::vector<double> th0(P), th1(P), values(P);
  auto solve_node = [&](int p) {
    const BinaryEnergy energy = build_subproblem(pb, p, dual);
    const CutResult cut = minimize(energy);
    values[p] = cut.min_value;
    const int k = cut.argmin[node];
    (k == 0 ? th0 : th1)[p] = cut.min_value;
    (k == 0 ? th1 : th0)[p] = clamped_min(cut, node, 1 - k);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < P; ++p) solve_node(p);
  } else {
    for (int p = 0; p < P; ++p) solve_node(p);
  }

  double sum_before = 0.0;
  for (double v : values) sum_before += v;
  MmaAudit audit;
  audit.node = node;
  audit.bound_before = sum_before - dual_offset(pb, dual);
  double delta = th0[0] - th1[0];
  for (int p = 1; p < P; ++p) delta = std::max(delta, th0[p] - th1[p]);
  audit.delta_lambda = delta;

  dual.lambda[node] += delta;
  // Shifting lambda_j moves every y_j = 1 assignment by delta and nothing
  // else, so the new subproblem minima are min(th(0), th(1) + delta) exactly.
  double sum_after = 0.0;
  for (int p = 0; p < P; ++p) sum_after += std::min(th0[p], th1[p] + delta);
  audit.bound_after = sum_after - dual_offset(pb, dual);
  if (audit.bound_after < audit.bound_before - 1e-9)
    throw InternalError("min-marginal averaging decreased the bound at node " +
                        std::to_string(node));
  return audit;
}

namespace {

std::vector<double> mma_deltas(const DualEvaluation& eval) {
  const int P = static_cast<int>(eval.solutions.size());
  const int n = P > 0 ? static_cast<int>(eval.solutions.front().argmin.size()) : 0;
  std::vector<double> deltas(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double d = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < P; ++p) {
      const MinMarginals& mm = eval.solutions[p].min_marginals;
      d = std::max(d, mm.m0[j] - mm.m1[j]);
    }
    deltas[j] = d;
  }
  return deltas;
}

// Nodes with a strictly improving update first, then the selection-rule
// nodes (two or more subproblems preferring 1); MMA-only sweeps append the
// remaining nonzero coordinates so the fixed point is reachable.
std::vector<int> sweep_order(const DualEvaluation& eval, const std::vector<double>& deltas,
                             bool include_rest) {
  const int P = static_cast<int>(eval.solutions.size());
  const int n = static_cast<int>(deltas.size());
  std::vector<int> order;
  std::vector<std::uint8_t> taken(n, 0);
  for (int j = 0; j < n; ++j) {
    if (deltas[j] < 0.0) {
      order.push_back(j);
      taken[j] = 1;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (taken[j]) continue;
    int preferring_one = 0;
    for (int p = 0; p < P; ++p) {
      const MinMarginals& mm = eval.solutions[p].min_marginals;
      if (mm.m0[j] > mm.m1[j]) ++preferring_one;
    }
    if (preferring_one >= 2) {
      order.push_back(j);
      taken[j] = 1;
    }
  }
  if (include_rest) {
    for (int j = 0; j < n; ++j)
      if (!taken[j] && deltas[j] != 0.0) order.push_back(j);
  }
  return order;
}

std::uint64_t mix_seed(std::uint64_t seed, long long iteration) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(iteration + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  return x;
}

struct IterationView {
  LabelSetTable table;
  AgreementStatus status = AgreementStatus::none;
  Labeling primal;
  double primal_energy = 0.0;
  ViolationReport violation;
};

// Strong agreement alone certifies optimality only when the agreed labeling
// is feasible and complementary slackness holds; then the bound equals its
// energy and the run can stop. Otherwise the constraint multipliers still
// have room to move.
std::optional<Labeling> certified_labeling(const MRFProblem& pb, const DualState& dual,
                                           const IterationView& view, double bound) {
  if (view.status != AgreementStatus::strong) return std::nullopt;
  Labeling t;
  t.labels.resize(pb.node_count);
  for (int j = 0; j < pb.node_count; ++j)
    for (int p = 0; p < pb.label_count; ++p)
      if (view.table.at(j, p) == 2) t.labels[j] = p;
  const double tol = 1e-9 * (1.0 + std::abs(bound));
  int ki = 0;
  for (const LinearConstraint& c : pb.constraints) {
    const double r = c.evaluate(t) - c.rhs;
    if (c.kind == ConstraintKind::equality) {
      if (std::abs(r) > tol) return std::nullopt;
    } else {
      if (r > tol) return std::nullopt;
      if (std::abs(dual.kappa[ki] * r) > tol) return std::nullopt;
      ++ki;
    }
  }
  return t;
}

IterationView assess(const MRFProblem& pb, const DualEvaluation& eval, const SolverConfig& config,
                     long long iteration) {
  IterationView view;
  const double tol = config.tie_tolerance * (1.0 + std::abs(eval.bound));
  view.table = label_sets(eval.solutions, tol);
  view.status = agreement_status(view.table);
  view.primal = heuristic_primal(pb, eval.solutions, mix_seed(config.rng_seed, iteration));
  view.primal_energy = energy(pb, view.primal);
  view.violation = violation(pb, view.primal);
  return view;
}

void check_config(const SolverConfig& config) {
  if (config.max_iterations < 0) throw InputError("max_iterations must be >= 0");
  if (!(config.alpha0 > 0.0) || !std::isfinite(config.alpha0))
    throw InputError("alpha0 must be positive");
  if (!(config.tau > 0.0) || !std::isfinite(config.tau)) throw InputError("tau must be positive");
  if (config.oscillation_window < 1) throw InputError("oscillation window must be >= 1");
  if (config.stagnation_window < 1) throw InputError("stagnation window must be >= 1");
  if (config.tie_tolerance < 0.0) throw InputError("tie tolerance must be >= 0");
  if (!(config.mma_fixed_point_tol > 0.0)) throw InputError("mma tolerance must be positive");
}

}  // namespace

OptimizeResult optimize(const MRFProblem& pb, const SolverConfig& config,
                        const OptimizeHooks& hooks) {
  validate(pb);
  check_config(config);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  OptimizeResult res;
  DualState dual = make_dual_state(pb);
  DualEvaluation eval = dual_value(pb, dual, config.exec);
  dual.best_bound = eval.bound;

  long long last_improvement = 0;
  int non_improving = 0;
  bool last_dropped = false;

  bool have_best = false;
  Labeling best_primal;
  double best_viol = 0.0, best_energy = 0.0;
  IterationView view;

  auto record = [&](long long iter) {
    view = assess(pb, eval, config, iter);
    res.trace.records.push_back({iter, eval.bound, view.primal_energy,
                                 view.violation.recolor_fraction, view.status, elapsed()});
    if (hooks.on_iteration) hooks.on_iteration(dual, eval);
    const double tv = total_violation(pb, view.violation);
    if (!have_best || tv < best_viol || (tv == best_viol && view.primal_energy < best_energy)) {
      have_best = true;
      best_primal = view.primal;
      best_viol = tv;
      best_energy = view.primal_energy;
    }
  };

  std::optional<Labeling> certified;
  record(0);
  certified = certified_labeling(pb, dual, view, eval.bound);
  if (!certified) {
    for (long long iter = 1; iter <= config.max_iterations; ++iter) {
      const bool oscillating = non_improving >= config.oscillation_window && last_dropped;
      bool swept = false;
      if (config.mode == SolverMode::mma ||
          (config.mode == SolverMode::hybrid && oscillating)) {
        const std::vector<double> deltas = mma_deltas(eval);
        if (config.mode == SolverMode::mma) {
          double worst = 0.0;
          for (double d : deltas) worst = std::max(worst, std::abs(d));
          if (worst <= config.mma_fixed_point_tol) break;
        }
        const std::vector<int> order = sweep_order(eval, deltas, /*include_rest=*/true);
        for (int j : order) {
          const MmaAudit audit = mma_update(pb, dual, j, config.exec);
          if (hooks.on_mma_update) hooks.on_mma_update(audit);
        }
        eval = dual_value(pb, dual, config.exec);
        swept = true;
      } else {
        const Subgradient g = subgradient(pb, dual, eval.solutions);
        const double step = config.alpha0 / (1.0 + static_cast<double>(iter - 1) / config.tau);
        ascent_step(dual, g, step);
        eval = dual_value(pb, dual, config.exec);
      }
      dual.iteration = iter;
      if (eval.bound > dual.best_bound) {
        dual.best_bound = eval.bound;
        last_improvement = iter;
        non_improving = 0;
        last_dropped = false;
      } else {
        ++non_improving;
        last_dropped = eval.bound < dual.best_bound - 1e-9;
      }
      if (swept) {
        non_improving = 0;
        last_dropped = false;
      }
      record(iter);
      certified = certified_labeling(pb, dual, view, eval.bound);
      if (certified) break;
      if (iter - last_improvement >= config.stagnation_window) break;
    }
  }

  // Final primal through the agreement module: the certified labeling when
  // the run closed the gap, otherwise the best of the reconstruction and the
  // heuristic labelings by (violation, energy).
  res.agreement = view.status;
  Labeling chosen;
  double chosen_energy, chosen_viol;
  if (certified) {
    chosen = *certified;
    chosen_energy = energy(pb, chosen);
    chosen_viol = total_violation(pb, violation(pb, chosen));
  } else {
    chosen = view.primal;
    chosen_energy = view.primal_energy;
    chosen_viol = total_violation(pb, view.violation);
    if (view.status != AgreementStatus::none) {
      const FreeDecomposition free = free_decomposition(pb, view.table);
      const PrimalReconstruction rec = reconstruct_primal(pb, view.table, free, eval.solutions);
      if (rec.labeling) {
        const double e = energy(pb, *rec.labeling);
        const double v = total_violation(pb, violation(pb, *rec.labeling));
        if (v < chosen_viol || (v == chosen_viol && e < chosen_energy)) {
          chosen = *rec.labeling;
          chosen_energy = e;
          chosen_viol = v;
        }
      }
    }
    if (have_best &&
        (best_viol < chosen_viol || (best_viol == chosen_viol && best_energy < chosen_energy))) {
      chosen = best_primal;
      chosen_energy = best_energy;
      chosen_viol = best_viol;
    }
  }

  res.labeling = std::move(chosen);
  res.primal_energy = chosen_energy;
  res.primal_violation = violation(pb, res.labeling);
  res.dual = std::move(dual);
  return res;
}

void write_trace_csv(const IterationTrace& trace, std::ostream& os, bool include_timing) {
  os << "iter,lower_bound,primal_energy,violation,agreement,seconds\n";
  for (const IterationRecord& r : trace.records) {
    const char* agree = r.agreement == AgreementStatus::strong  ? "strong"
                        : r.agreement == AgreementStatus::weak ? "weak"
                                                               : "none";
    os << r.iteration << ',' << format_double(r.lower_bound) << ','
       << format_double(r.primal_energy) << ',' << format_double(r.violation) << ',' << agree
       << ',' << (include_timing ? format_double(r.seconds) : "0") << '\n';
  }
}

}  // namespace smd
