#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace smd {

struct MRFProblem;
struct Labeling;

enum class ConstraintKind { equality, inequality };  // inequality: sum w y <= rhs

struct ConstraintTerm {
  int node = 0;
  int label = 0;
  double weight = 0.0;
};

// Linear statistic of the indicator variables, sum over terms of
// w * y_{node,label}, tied to rhs by kind.
struct LinearConstraint {
  ConstraintKind kind = ConstraintKind::equality;
  std::vector<ConstraintTerm> terms;
  double rhs = 0.0;
  std::string name;  // cosmetic only; not serialized

  double evaluate(const Labeling& labeling) const;
  // Signed sum-minus-rhs for equalities, positive part for inequalities.
  double residual(const Labeling& labeling) const;
  bool satisfied(const Labeling& labeling, double tol = 1e-9) const;
};

struct ViolationReport {
  std::vector<double> residuals;  // one per constraint, in problem order
  double recolor_fraction = 0.0;  // over strict class-size constraints only
};

// sum_j y_jp = c
LinearConstraint strict_class_size(int p, int c, const MRFProblem& problem);

// sum_j y_jp in [c1, c2] as two inequalities (<= c2 and >= c1).
std::pair<LinearConstraint, LinearConstraint> soft_class_size(int p, int c1, int c2,
                                                              const MRFProblem& problem);

// sum_j y_jp I_j = sum_j y_jq I_j
LinearConstraint flux_equality(int p, int q, std::span<const double> intensities,
                               const MRFProblem& problem);

// Mean and covariance of the vector observable over the class-p region, as
// d + d(d+1)/2 equalities linear in y for fixed mean/covariance targets.
std::vector<LinearConstraint> color_moment(int p,
                                           const std::vector<std::vector<double>>& intensities,
                                           const std::vector<double>& mean,
                                           const std::vector<std::vector<double>>& covariance,
                                           const MRFProblem& problem);

ViolationReport violation(const MRFProblem& problem, const Labeling& labeling);

// Sum of absolute equality residuals plus inequality excesses.
double total_violation(const MRFProblem& problem, const ViolationReport& report);

}  // namespace smd
