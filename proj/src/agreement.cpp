#include "smd/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "smd/engine.hpp"
#include "smd/errors.hpp"

namespace smd {

LabelSetTable label_sets(const std::vector<SubproblemSolution>& solutions, double tol) {
  LabelSetTable table;
  if (solutions.empty()) return table;
  table.label_count = static_cast<int>(solutions.size());
  table.node_count = static_cast<int>(solutions.front().argmin.size());
  table.mask.assign(static_cast<std::size_t>(table.node_count) * table.label_count, 0);
  for (int p = 0; p < table.label_count; ++p) {
    const MinMarginals& mm = solutions[p].min_marginals;
    if (mm.empty()) throw InputError("label_sets requires min-marginals");
    for (int j = 0; j < table.node_count; ++j) {
      const double lo = std::min(mm.m0[j], mm.m1[j]);
      std::uint8_t m = 0;
      if (mm.m0[j] <= lo + tol) m |= 1;
      if (mm.m1[j] <= lo + tol) m |= 2;
      table.mask[static_cast<std::size_t>(j) * table.label_count + p] = m;
    }
  }
  return table;
}

bool strong_agreement(const LabelSetTable& table) {
  for (int j = 0; j < table.node_count; ++j) {
    int ones = 0;
    for (int p = 0; p < table.label_count; ++p) {
      const std::uint8_t m = table.at(j, p);
      if (m == 2)
        ++ones;
      else if (m != 1)
        return false;  // a free node breaks strong agreement
    }
    if (ones != 1) return false;
  }
  return true;
}

bool weak_agreement(const LabelSetTable& table) {
  for (int j = 0; j < table.node_count; ++j) {
    bool can_be_on = false;
    int firm = -1;
    for (int p = 0; p < table.label_count; ++p) {
      const std::uint8_t m = table.at(j, p);
      if (m & 2) can_be_on = true;
      if (m == 2) {
        if (firm >= 0) return false;  // two firmly selected labels cannot both hold
        firm = p;
      }
    }
    if (!can_be_on) return false;
    if (firm >= 0) {
      for (int p = 0; p < table.label_count; ++p)
        if (p != firm && !(table.at(j, p) & 1)) return false;
    }
  }
  return true;
}

AgreementStatus agreement_status(const LabelSetTable& table) {
  if (strong_agreement(table)) return AgreementStatus::strong;
  if (weak_agreement(table)) return AgreementStatus::weak;
  return AgreementStatus::none;
}

namespace {

std::vector<std::vector<int>> adjacency(const MRFProblem& pb) {
  std::vector<std::vector<int>> adj(pb.node_count);
  for (const Edge& e : pb.edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  return adj;
}

// Connected components of `member` nodes in the MRF graph, each sorted,
// ordered by smallest contained node.
std::vector<std::vector<int>> components_of(const MRFProblem& pb,
                                            const std::vector<std::uint8_t>& member,
                                            const std::vector<std::vector<int>>& adj) {
  std::vector<std::vector<int>> comps;
  std::vector<std::uint8_t> visited(pb.node_count, 0);
  for (int s = 0; s < pb.node_count; ++s) {
    if (!member[s] || visited[s]) continue;
    std::vector<int> comp, stack{s};
    visited[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int w : adj[v]) {
        if (member[w] && !visited[w]) {
          visited[w] = 1;
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

}  // namespace

FreeDecomposition free_decomposition(const MRFProblem& pb, const LabelSetTable& table) {
  FreeDecomposition free;
  free.components.resize(table.label_count);
  const auto adj = adjacency(pb);
  std::vector<std::uint8_t> member(pb.node_count);
  for (int p = 0; p < table.label_count; ++p) {
    for (int j = 0; j < pb.node_count; ++j) member[j] = table.is_free(j, p);
    free.components[p] = components_of(pb, member, adj);
  }
  return free;
}

bool free_flip_check(const MRFProblem& pb, int p, const DualState& dual,
                     const SubproblemSolution& sol, double tie_tol, double value_tol) {
  const BinaryEnergy energy = build_subproblem(pb, p, dual);
  const MinMarginals& mm = sol.min_marginals;
  if (mm.empty()) throw InputError("free_flip_check requires min-marginals");

  std::vector<std::uint8_t> member(pb.node_count, 0);
  for (int j = 0; j < pb.node_count; ++j) {
    const double lo = std::min(mm.m0[j], mm.m1[j]);
    member[j] = mm.m0[j] <= lo + tie_tol && mm.m1[j] <= lo + tie_tol;
  }

  auto flipped_ok = [&](const std::vector<int>& nodes, std::uint8_t v) {
    std::vector<std::uint8_t> y = sol.argmin;
    for (int j : nodes) y[j] = v;
    return std::abs(energy.value(y) - sol.value) <= value_tol;
  };

  std::vector<int> all_free;
  for (int j = 0; j < pb.node_count; ++j)
    if (member[j]) all_free.push_back(j);
  if (!flipped_ok(all_free, 1) || !flipped_ok(all_free, 0)) return false;

  const auto adj = adjacency(pb);
  for (const std::vector<int>& comp : components_of(pb, member, adj))
    if (!flipped_ok(comp, 1) || !flipped_ok(comp, 0)) return false;
  return true;
}

namespace {

struct CoverCandidate {
  int label;
  std::vector<int> nodes;
};

// Exact-cover search over free components, largest candidates first,
// branching on the lowest uncovered node. `nodes` is the fixed ascending
// list of free-region nodes; `pos` is this frame's scan position into it.
// Returns false when the state cap is exhausted or no disjoint exact cover
// exists.
bool search_cover(const std::vector<CoverCandidate>& candidates,
                  const std::vector<std::vector<int>>& by_node, const std::vector<int>& nodes,
                  std::size_t pos, std::vector<std::uint8_t>& covered, std::vector<int>& chosen,
                  int& budget) {
  while (pos < nodes.size() && covered[nodes[pos]]) ++pos;
  if (pos == nodes.size()) return true;
  if (--budget < 0) return false;
  const int u = nodes[pos];
  for (int ci : by_node[u]) {
    const CoverCandidate& cand = candidates[ci];
    bool disjoint = true;
    for (int v : cand.nodes) {
      if (covered[v]) {
        disjoint = false;
        break;
      }
    }
    if (!disjoint) continue;
    for (int v : cand.nodes) covered[v] = 1;
    chosen.push_back(ci);
    if (search_cover(candidates, by_node, nodes, pos, covered, chosen, budget)) return true;
    if (budget < 0) return false;
    chosen.pop_back();
    for (int v : cand.nodes) covered[v] = 0;
  }
  return false;
}

}  // namespace

PrimalReconstruction reconstruct_primal(const MRFProblem& pb, const LabelSetTable& table,
                                        const FreeDecomposition& free,
                                        const std::vector<SubproblemSolution>& solutions,
                                        int backtrack_cap) {
  if (!weak_agreement(table)) throw InputError("reconstruct_primal requires weak agreement");

  std::vector<std::uint8_t> in_free_region(pb.node_count, 0);
  for (int j = 0; j < pb.node_count; ++j)
    for (int p = 0; p < table.label_count; ++p)
      if (table.is_free(j, p)) in_free_region[j] = 1;

  std::vector<CoverCandidate> candidates;
  for (int p = 0; p < table.label_count; ++p)
    for (const std::vector<int>& comp : free.components[p]) candidates.push_back({p, comp});
  std::sort(candidates.begin(), candidates.end(), [](const CoverCandidate& a, const CoverCandidate& b) {
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() > b.nodes.size();
    if (a.label != b.label) return a.label < b.label;
    return a.nodes.front() < b.nodes.front();
  });
  std::vector<std::vector<int>> by_node(pb.node_count);
  for (std::size_t ci = 0; ci < candidates.size(); ++ci)
    for (int v : candidates[ci].nodes) by_node[v].push_back(static_cast<int>(ci));

  std::vector<int> free_nodes;
  for (int j = 0; j < pb.node_count; ++j)
    if (in_free_region[j]) free_nodes.push_back(j);
  std::vector<std::uint8_t> covered(pb.node_count, 0);
  std::vector<int> chosen;
  int budget = backtrack_cap;
  const bool found = search_cover(candidates, by_node, free_nodes, 0, covered, chosen, budget);

  PrimalReconstruction out;
  if (!found) {
    for (int j = 0; j < pb.node_count; ++j)
      if (in_free_region[j] && !covered[j]) out.conflict_nodes.push_back(j);
    if (out.conflict_nodes.empty())
      for (int j = 0; j < pb.node_count; ++j)
        if (in_free_region[j]) out.conflict_nodes.push_back(j);
    return out;
  }

  Labeling t;
  t.labels.assign(pb.node_count, -1);
  for (int ci : chosen)
    for (int v : candidates[ci].nodes) t.labels[v] = candidates[ci].label;
  for (int j = 0; j < pb.node_count; ++j) {
    if (t.labels[j] >= 0) continue;
    for (int p = 0; p < table.label_count; ++p) {
      if (table.at(j, p) == 2) {
        t.labels[j] = p;
        break;
      }
    }
    if (t.labels[j] < 0) {
      // Weak agreement guarantees a firm selection outside the free region.
      out.conflict_nodes.push_back(j);
    }
  }
  if (!out.conflict_nodes.empty()) return out;
  (void)solutions;
  out.labeling = std::move(t);
  return out;
}

Labeling heuristic_primal(const MRFProblem& pb, const std::vector<SubproblemSolution>& solutions,
                          std::uint64_t rng_seed) {
  const int P = static_cast<int>(solutions.size());
  Labeling t;
  t.labels.assign(pb.node_count, -1);
  std::vector<int> select_count(pb.node_count, 0);
  for (int p = 0; p < P; ++p)
    for (int j = 0; j < pb.node_count; ++j) select_count[j] += solutions[p].argmin[j];

  std::vector<std::uint8_t> conflicting(pb.node_count, 0);
  for (int j = 0; j < pb.node_count; ++j) {
    if (select_count[j] == 1) {
      for (int p = 0; p < P; ++p)
        if (solutions[p].argmin[j]) t.labels[j] = p;
    } else if (select_count[j] >= 2) {
      conflicting[j] = 1;
    } else {
      // Unselected: cheapest single-label commitment at the current point.
      int best = 0;
      for (int p = 1; p < P; ++p)
        if (solutions[p].min_marginals.m1[j] < solutions[best].min_marginals.m1[j]) best = p;
      t.labels[j] = best;
    }
  }

  std::mt19937_64 rng(rng_seed);
  const auto adj = adjacency(pb);
  for (const std::vector<int>& comp : components_of(pb, conflicting, adj)) {
    std::vector<int> pool;
    for (int p = 0; p < P; ++p) {
      for (int j : comp) {
        if (solutions[p].argmin[j]) {
          pool.push_back(p);
          break;
        }
      }
    }
    const int pick = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    for (int j : comp) t.labels[j] = pick;
  }
  return t;
}

}  // namespace smd
