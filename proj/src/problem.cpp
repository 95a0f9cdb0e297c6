#include "smd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "smd/errors.hpp"

namespace smd {

void MRFProblem::add_edge(int i, int j, std::span<const double> c) {
  if (static_cast<int>(c.size()) != label_count) throw InputError("edge strength vector size mismatch");
  if (i == j) throw InputError("self-loop edge");
  if (i > j) std::swap(i, j);
  edges.push_back({i, j});
  assoc.insert(assoc.end(), c.begin(), c.end());
}

int MRFProblem::equality_count() const {
  int n = 0;
  for (const LinearConstraint& c : constraints)
    if (c.kind == ConstraintKind::equality) ++n;
  return n;
}

int MRFProblem::inequality_count() const {
  return static_cast<int>(constraints.size()) - equality_count();
}

void validate(const MRFProblem& pb) {
  if (pb.node_count < 0) throw InputError("negative node count");
  if (pb.label_count < 2) throw InputError("label count must be at least 2");
  if (pb.unary.size() != static_cast<std::size_t>(pb.node_count) * pb.label_count)
    throw InputError("unary matrix dimension mismatch");
  if (pb.assoc.size() != pb.edges.size() * pb.label_count)
    throw InputError("assoc dimension mismatch");
  for (double v : pb.unary)
    if (!std::isfinite(v)) throw InputError("non-finite unary cost");
  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < pb.edges.size(); ++e) {
    const Edge& edge = pb.edges[e];
    if (edge.i < 0 || edge.j < 0 || edge.i >= pb.node_count || edge.j >= pb.node_count)
      throw InputError("edge endpoint out of range");
    if (edge.i == edge.j) throw InputError("self-loop edge");
    if (edge.i > edge.j) throw InputError("edge not canonicalized (i < j expected)");
    if (!seen.insert({edge.i, edge.j}).second) throw InputError("duplicate edge");
    for (int p = 0; p < pb.label_count; ++p) {
      const double c = pb.assoc_at(static_cast<int>(e), p);
      if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("associative strength must be >= 0");
    }
  }
  if (pb.grid_height > 0 || pb.grid_width > 0) {
    if (pb.grid_height <= 0 || pb.grid_width <= 0 ||
        pb.grid_height * pb.grid_width != pb.node_count)
      throw InputError("grid dimensions inconsistent with node count");
  }
  for (const LinearConstraint& c : pb.constraints) {
    for (const ConstraintTerm& t : c.terms) {
      if (t.node < 0 || t.node >= pb.node_count || t.label < 0 || t.label >= pb.label_count)
        throw InputError("constraint term index out of range");
      if (!std::isfinite(t.weight)) throw InputError("non-finite constraint weight");
    }
    if (!std::isfinite(c.rhs)) throw InputError("non-finite constraint rhs");
  }
  for (const StarPrior& prior : pb.star_priors) {
    if (prior.label < 0 || prior.label >= pb.label_count) throw InputError("star prior label out of range");
    if (prior.center < 0 || prior.center >= pb.node_count) throw InputError("star prior center out of range");
    if (prior.beta < 0.0 || !std::isfinite(prior.beta)) throw InputError("star prior beta must be >= 0");
    if (pb.grid_height * pb.grid_width != pb.node_count)
      throw InputError("star prior requires grid dimensions");
    if (prior.parent.size() != static_cast<std::size_t>(pb.node_count))
      throw InputError("star prior parent map size mismatch");
    for (int j = 0; j < pb.node_count; ++j) {
      int steps = 0;
      int x = j;
      while (x != prior.center) {
        x = prior.parent[x];
        if (x < 0 || x >= pb.node_count || ++steps > pb.node_count)
          throw InputError("star prior parent map is not rooted at the center");
      }
    }
  }
}

namespace {

void check_labeling(const MRFProblem& pb, const Labeling& t) {
  if (t.labels.size() != static_cast<std::size_t>(pb.node_count))
    throw InputError("labeling size mismatch");
  for (int v : t.labels)
    if (v < 0 || v >= pb.label_count) throw InputError("label out of range");
}

}  // namespace

double energy(const MRFProblem& pb, const Labeling& t) {
  check_labeling(pb, t);
  double v = 0.0;
  for (int j = 0; j < pb.node_count; ++j) v += pb.theta(j, t.labels[j]);
  for (std::size_t e = 0; e < pb.edges.size(); ++e) {
    const Edge& edge = pb.edges[e];
    if (t.labels[edge.i] == t.labels[edge.j])
      v -= pb.assoc_at(static_cast<int>(e), t.labels[edge.i]);
  }
  if (!pb.star_priors.empty()) {
    const double big_m = star_energy_big_m(pb);
    for (const StarPrior& prior : pb.star_priors) {
      for (int i = 0; i < pb.node_count; ++i) {
        if (i == prior.center) continue;
        const bool fi = t.labels[i] == prior.label;
        const bool fj = t.labels[prior.parent[i]] == prior.label;
        if (fi && !fj)
          v += big_m;
        else if (!fi && fj)
          v += prior.beta;
      }
    }
  }
  return v;
}

IndicatorMatrix indicator_of(const Labeling& t, int label_count) {
  IndicatorMatrix y;
  y.node_count = static_cast<int>(t.labels.size());
  y.label_count = label_count;
  y.y.assign(static_cast<std::size_t>(y.node_count) * label_count, 0);
  for (int j = 0; j < y.node_count; ++j) {
    if (t.labels[j] < 0 || t.labels[j] >= label_count) throw InputError("label out of range");
    y.set(j, t.labels[j], 1);
  }
  return y;
}

Labeling labeling_of(const IndicatorMatrix& y) {
  Labeling t;
  t.labels.resize(y.node_count, -1);
  for (int j = 0; j < y.node_count; ++j) {
    int count = 0;
    for (int p = 0; p < y.label_count; ++p) {
      if (y.at(j, p)) {
        t.labels[j] = p;
        ++count;
      }
    }
    if (count != 1) throw InputError("indicator row does not sum to 1");
  }
  return t;
}

double energy_indicator(const MRFProblem& pb, const IndicatorMatrix& y) {
  if (y.node_count != pb.node_count || y.label_count != pb.label_count)
    throw InputError("indicator matrix dimension mismatch");
  double v = 0.0;
  for (int j = 0; j < pb.node_count; ++j)
    for (int p = 0; p < pb.label_count; ++p)
      if (y.at(j, p)) v += pb.theta(j, p);
  for (std::size_t e = 0; e < pb.edges.size(); ++e) {
    const Edge& edge = pb.edges[e];
    for (int p = 0; p < pb.label_count; ++p)
      if (y.at(edge.i, p) && y.at(edge.j, p)) v -= pb.assoc_at(static_cast<int>(e), p);
  }
  if (!pb.star_priors.empty()) {
    const double big_m = star_energy_big_m(pb);
    for (const StarPrior& prior : pb.star_priors) {
      for (int i = 0; i < pb.node_count; ++i) {
        if (i == prior.center) continue;
        const bool fi = y.at(i, prior.label) != 0;
        const bool fj = y.at(prior.parent[i], prior.label) != 0;
        if (fi && !fj)
          v += big_m;
        else if (!fi && fj)
          v += prior.beta;
      }
    }
  }
  return v;
}

double star_energy_big_m(const MRFProblem& pb) {
  double m = 1.0;
  for (double v : pb.unary) m += std::abs(v);
  for (double c : pb.assoc) m += c;
  for (const StarPrior& prior : pb.star_priors) m += prior.beta * pb.node_count;
  return m;
}

}  // namespace smd
