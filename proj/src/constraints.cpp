#include "smd/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "smd/errors.hpp"
#include "smd/problem.hpp"

namespace smd {

double LinearConstraint::evaluate(const Labeling& t) const {
  double s = 0.0;
  for (const ConstraintTerm& term : terms)
    if (t.labels[term.node] == term.label) s += term.weight;
  return s;
}

double LinearConstraint::residual(const Labeling& t) const {
  const double r = evaluate(t) - rhs;
  return kind == ConstraintKind::equality ? r : std::max(0.0, r);
}

bool LinearConstraint::satisfied(const Labeling& t, double tol) const {
  const double r = evaluate(t) - rhs;
  return kind == ConstraintKind::equality ? std::abs(r) <= tol : r <= tol;
}

LinearConstraint strict_class_size(int p, int c, const MRFProblem& pb) {
  if (p < 0 || p >= pb.label_count) throw InputError("class size label out of range");
  if (c < 0 || c > pb.node_count) throw InputError("class size target out of range");
  LinearConstraint lc;
  lc.kind = ConstraintKind::equality;
  lc.rhs = c;
  lc.terms.reserve(pb.node_count);
  for (int j = 0; j < pb.node_count; ++j) lc.terms.push_back({j, p, 1.0});
  return lc;
}

std::pair<LinearConstraint, LinearConstraint> soft_class_size(int p, int c1, int c2,
                                                              const MRFProblem& pb) {
  if (c1 > c2) throw InputError("soft class size requires c1 <= c2");
  if (c1 < 0 || c2 > pb.node_count) throw InputError("soft class size bounds out of range");
  LinearConstraint upper;
  upper.kind = ConstraintKind::inequality;
  upper.rhs = c2;
  LinearConstraint lower;
  lower.kind = ConstraintKind::inequality;
  lower.rhs = -c1;
  for (int j = 0; j < pb.node_count; ++j) {
    upper.terms.push_back({j, p, 1.0});
    lower.terms.push_back({j, p, -1.0});
  }
  return {upper, lower};
}

LinearConstraint flux_equality(int p, int q, std::span<const double> intensities,
                               const MRFProblem& pb) {
  if (p == q) throw InputError("flux equality requires distinct labels");
  if (static_cast<int>(intensities.size()) != pb.node_count)
    throw InputError("intensity vector size mismatch");
  LinearConstraint lc;
  lc.kind = ConstraintKind::equality;
  lc.rhs = 0.0;
  for (int j = 0; j < pb.node_count; ++j) {
    if (intensities[j] != 0.0) {
      lc.terms.push_back({j, p, intensities[j]});
      lc.terms.push_back({j, q, -intensities[j]});
    }
  }
  return lc;
}

std::vector<LinearConstraint> color_moment(int p,
                                           const std::vector<std::vector<double>>& intensities,
                                           const std::vector<double>& mean,
                                           const std::vector<std::vector<double>>& covariance,
                                           const MRFProblem& pb) {
  const int d = static_cast<int>(mean.size());
  if (static_cast<int>(intensities.size()) != pb.node_count)
    throw InputError("intensity list size mismatch");
  for (const auto& row : intensities)
    if (static_cast<int>(row.size()) != d) throw InputError("intensity dimension mismatch");
  if (static_cast<int>(covariance.size()) != d) throw InputError("covariance dimension mismatch");
  for (const auto& row : covariance)
    if (static_cast<int>(row.size()) != d) throw InputError("covariance dimension mismatch");

  std::vector<LinearConstraint> out;
  for (int a = 0; a < d; ++a) {
    LinearConstraint lc;
    lc.kind = ConstraintKind::equality;
    lc.rhs = 0.0;
    for (int j = 0; j < pb.node_count; ++j)
      lc.terms.push_back({j, p, intensities[j][a] - mean[a]});
    out.push_back(std::move(lc));
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      LinearConstraint lc;
      lc.kind = ConstraintKind::equality;
      lc.rhs = 0.0;
      for (int j = 0; j < pb.node_count; ++j) {
        const double w =
            (intensities[j][a] - mean[a]) * (intensities[j][b] - mean[b]) - covariance[a][b];
        lc.terms.push_back({j, p, w});
      }
      out.push_back(std::move(lc));
    }
  }
  return out;
}

namespace {

// Matches the shape produced by strict_class_size: an equality whose terms
// put weight 1 on every node once, all with the same label.
bool is_strict_class_size(const LinearConstraint& c, int node_count, int* label) {
  if (c.kind != ConstraintKind::equality) return false;
  if (c.terms.size() != static_cast<std::size_t>(node_count)) return false;
  std::vector<std::uint8_t> seen(node_count, 0);
  const int p = c.terms.empty() ? -1 : c.terms.front().label;
  for (const ConstraintTerm& t : c.terms) {
    if (t.label != p || t.weight != 1.0) return false;
    if (t.node < 0 || t.node >= node_count || seen[t.node]) return false;
    seen[t.node] = 1;
  }
  *label = p;
  return true;
}

}  // namespace

ViolationReport violation(const MRFProblem& pb, const Labeling& t) {
  if (t.labels.size() != static_cast<std::size_t>(pb.node_count))
    throw InputError("labeling size mismatch");
  ViolationReport report;
  report.residuals.reserve(pb.constraints.size());
  double size_mismatch = 0.0;
  bool any_size = false;
  for (const LinearConstraint& c : pb.constraints) {
    report.residuals.push_back(c.residual(t));
    int label = -1;
    if (is_strict_class_size(c, pb.node_count, &label)) {
      any_size = true;
      size_mismatch += std::abs(c.evaluate(t) - c.rhs);
    }
  }
  // Each recolored node fixes one surplus and one deficit.
  report.recolor_fraction =
      any_size && pb.node_count > 0 ? 0.5 * size_mismatch / pb.node_count : 0.0;
  return report;
}

double total_violation(const MRFProblem& pb, const ViolationReport& report) {
  double s = 0.0;
  for (std::size_t k = 0; k < report.residuals.size(); ++k) {
    const double r = report.residuals[k];
    s += pb.constraints[k].kind == ConstraintKind::equality ? std::abs(r) : std::max(0.0, r);
  }
  return s;
}

}  // namespace smd
