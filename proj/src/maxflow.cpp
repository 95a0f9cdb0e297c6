#include "smd/maxflow.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "smd/errors.hpp"

namespace smd {

void BinaryEnergy::add_unary(int j, double a) {
  if (j < 0 || j >= node_count) throw InputError("unary index out of range");
  unary[j] += a;
}

void BinaryEnergy::add_pairwise(int i, int j, double e00, double e01, double e10, double e11) {
  if (i < 0 || i >= node_count || j < 0 || j >= node_count || i == j)
    throw InputError("pairwise endpoints out of range");
  pairwise.push_back({i, j, e00, e01, e10, e11});
}

double BinaryEnergy::value(std::span<const std::uint8_t> y) const {
  if (static_cast<int>(y.size()) != node_count) throw InputError("assignment size mismatch");
  double v = offset;
  for (int j = 0; j < node_count; ++j)
    if (y[j]) v += unary[j];
  for (const PairwiseTerm& t : pairwise)
    v += y[t.i] ? (y[t.j] ? t.e11 : t.e10) : (y[t.j] ? t.e01 : t.e00);
  return v;
}

std::size_t BinaryEnergy::first_nonsubmodular(double tol) const {
  for (std::size_t k = 0; k < pairwise.size(); ++k) {
    const PairwiseTerm& t = pairwise[k];
    if (t.e00 + t.e11 > t.e01 + t.e10 + tol) return k;
  }
  return npos;
}

double BinaryEnergy::dominance_big_m() const {
  double m = 1.0;
  for (double a : unary) m += std::abs(a);
  for (const PairwiseTerm& t : pairwise)
    m += std::abs(t.e00) + std::abs(t.e01) + std::abs(t.e10) + std::abs(t.e11);
  return m;
}

// Augmenting-path max-flow with search-tree reuse (Boykov-Kolmogorov).
// The energy is reduced to a graph with one signed terminal capacity per node
// and one nonnegative arc per pairwise term; min energy = constant + max flow.
//
// A solved graph can also be copied and re-solved after a terminal clamp
// (apply_clamp + resolve): the old flow stays feasible because the clamp only
// adds capacity, so only the local repair work is repeated.
class FlowGraph {
 public:
  FlowGraph() = default;

  // clamp_node >= 0 pins y[clamp_node] = clamp_value via a dominating
  // terminal capacity that is provably never paid at the clamped optimum.
  explicit FlowGraph(const BinaryEnergy& e, int clamp_node = -1, int clamp_value = 0)
      : n_(e.node_count),
        tr_cap_(n_, 0.0),
        first_arc_(n_, kNoArc),
        parent_arc_(n_, kNoArc),
        tree_(n_, kFree),
        ts_(n_, 0),
        dist_(n_, 0),
        in_queue_(n_, 0) {
    const_base_ = e.offset;
    for (int j = 0; j < n_; ++j) tr_cap_[j] = e.unary[j];
    arcs_.reserve(2 * e.pairwise.size());
    for (std::size_t k = 0; k < e.pairwise.size(); ++k) {
      const PairwiseTerm& t = e.pairwise[k];
      // e = e00 + (e10-e00) y_i + (e11-e10) y_j + d (1-y_i) y_j,  d >= 0
      const_base_ += t.e00;
      tr_cap_[t.i] += t.e10 - t.e00;
      tr_cap_[t.j] += t.e11 - t.e10;
      const double d = (t.e01 + t.e10) - (t.e00 + t.e11);
      if (d < 0.0) throw SubmodularityError(k);
      if (d > 0.0) add_arc(t.i, t.j, d);
    }
    big_m_ = e.dominance_big_m();
    if (clamp_node >= 0) apply_clamp_caps(clamp_node, clamp_value);
    for (int j = 0; j < n_; ++j) negative_sum_ += std::min(0.0, tr_cap_[j]);
  }

  double solve() {
    for (int j = 0; j < n_; ++j) {
      if (tr_cap_[j] > 0.0) {
        tree_[j] = kSource;
        parent_arc_[j] = kTerminalArc;
        dist_[j] = 1;
        activate(j);
      } else if (tr_cap_[j] < 0.0) {
        tree_[j] = kSink;
        parent_arc_[j] = kTerminalArc;
        dist_[j] = 1;
        activate(j);
      }
    }
    return resolve();
  }

  // Clamps node j to value k on an already-solved graph and repairs the
  // search trees around it; a following resolve() reuses the existing flow.
  // Adding the big-M terminal arc opens a direct s->j->t route through any
  // remaining residual on the opposite side, which is accounted immediately;
  // the value bookkeeping is otherwise unchanged (the M arc is never cut).
  void apply_clamp(int j, int k) {
    if (k == 1) {
      if (tr_cap_[j] > 0.0) flow_ += tr_cap_[j];
      tr_cap_[j] -= big_m_;
    } else {
      if (tr_cap_[j] < 0.0) flow_ -= tr_cap_[j];
      tr_cap_[j] += big_m_;
    }

    for (int a = first_arc_[j]; a != kNoArc; a = arcs_[a].next) {
      const int y = arcs_[a].head;
      if (parent_arc_[y] == (a ^ 1)) make_orphan(y);
      if (tree_[y] != kFree) activate(y);
    }
    if (tr_cap_[j] > 0.0) {
      tree_[j] = kSource;
      parent_arc_[j] = kTerminalArc;
      dist_[j] = 1;
      ts_[j] = 0;
      activate(j);
    } else if (tr_cap_[j] < 0.0) {
      tree_[j] = kSink;
      parent_arc_[j] = kTerminalArc;
      dist_[j] = 1;
      ts_[j] = 0;
      activate(j);
    } else {
      tree_[j] = kFree;
      parent_arc_[j] = kNoArc;
    }
    ++time_;
    adopt();
  }

  double resolve() {
    while (true) {
      const int mid = grow();
      if (mid == kNoArc) break;
      ++time_;
      flow_ += augment(mid);
      adopt();
    }
    return const_base_ + negative_sum_ + flow_;
  }

  // After solve(): nodes in the source tree take y = 0, everything else y = 1.
  bool source_side(int j) const { return tree_[j] == kSource; }

 private:
  enum Tree : std::uint8_t { kFree = 0, kSource = 1, kSink = 2 };
  struct Arc {
    int head;
    int next;
    double rcap;
  };
  static constexpr int kNoArc = -1;
  static constexpr int kTerminalArc = -2;

  void apply_clamp_caps(int j, int k) {
    if (k == 1) {
      const_base_ += big_m_;  // cost m unless y = 1
      tr_cap_[j] -= big_m_;
    } else {
      tr_cap_[j] += big_m_;  // cost m unless y = 0
    }
  }

  void add_arc(int i, int j, double cap) {
    arcs_.push_back({j, first_arc_[i], cap});
    first_arc_[i] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({i, first_arc_[j], 0.0});
    first_arc_[j] = static_cast<int>(arcs_.size()) - 1;
  }

  void activate(int v) {
    if (!in_queue_[v]) {
      in_queue_[v] = 1;
      queue_.push_back(v);
    }
  }

  // Grows both trees until an augmenting path is found; returns its
  // connecting arc oriented source-tree -> sink-tree, or kNoArc.
  int grow() {
    while (queue_head_ < queue_.size()) {
      const int i = queue_[queue_head_];
      if (!in_queue_[i] || tree_[i] == kFree) {
        in_queue_[i] = 0;
        ++queue_head_;
        continue;
      }
      const Tree side = static_cast<Tree>(tree_[i]);
      for (int a = first_arc_[i]; a != kNoArc; a = arcs_[a].next) {
        const double r = side == kSource ? arcs_[a].rcap : arcs_[a ^ 1].rcap;
        if (r <= 0.0) continue;
        const int j = arcs_[a].head;
        if (tree_[j] == kFree) {
          tree_[j] = side;
          parent_arc_[j] = a ^ 1;
          ts_[j] = ts_[i];
          dist_[j] = dist_[i] + 1;
          activate(j);
        } else if (tree_[j] != side) {
          return side == kSource ? a : (a ^ 1);
        }
      }
      in_queue_[i] = 0;
      ++queue_head_;
    }
    return kNoArc;
  }

  double augment(int mid) {
    double delta = arcs_[mid].rcap;
    for (int x = arcs_[mid ^ 1].head;;) {
      const int pa = parent_arc_[x];
      if (pa == kTerminalArc) {
        delta = std::min(delta, tr_cap_[x]);
        break;
      }
      delta = std::min(delta, arcs_[pa ^ 1].rcap);  // residual parent -> x
      x = arcs_[pa].head;
    }
    for (int x = arcs_[mid].head;;) {
      const int pa = parent_arc_[x];
      if (pa == kTerminalArc) {
        delta = std::min(delta, -tr_cap_[x]);
        break;
      }
      delta = std::min(delta, arcs_[pa].rcap);  // residual x -> parent
      x = arcs_[pa].head;
    }

    arcs_[mid].rcap -= delta;
    arcs_[mid ^ 1].rcap += delta;
    for (int x = arcs_[mid ^ 1].head;;) {
      const int pa = parent_arc_[x];
      if (pa == kTerminalArc) {
        tr_cap_[x] -= delta;
        if (tr_cap_[x] <= 0.0) make_orphan(x);
        break;
      }
      arcs_[pa ^ 1].rcap -= delta;
      arcs_[pa].rcap += delta;
      const int next = arcs_[pa].head;
      if (arcs_[pa ^ 1].rcap <= 0.0) make_orphan(x);
      x = next;
    }
    for (int x = arcs_[mid].head;;) {
      const int pa = parent_arc_[x];
      if (pa == kTerminalArc) {
        tr_cap_[x] += delta;
        if (tr_cap_[x] >= 0.0) make_orphan(x);
        break;
      }
      arcs_[pa].rcap -= delta;
      arcs_[pa ^ 1].rcap += delta;
      const int next = arcs_[pa].head;
      if (arcs_[pa].rcap <= 0.0) make_orphan(x);
      x = next;
    }
    return delta;
  }

  void make_orphan(int x) {
    parent_arc_[x] = kNoArc;
    orphans_.push_back(x);
  }

  // Distance from y to its tree's terminal, or -1 if the chain is broken.
  // Distances found this adoption phase are cached under the current time.
  int root_distance(int y) {
    int steps = 0;
    int x = y;
    int base;
    while (true) {
      if (ts_[x] == time_ && time_ > 0) {
        base = dist_[x];
        break;
      }
      const int pa = parent_arc_[x];
      if (pa == kTerminalArc) {
        base = 1;
        ts_[x] = time_;
        dist_[x] = 1;
        break;
      }
      if (pa == kNoArc) return -1;
      ++steps;
      x = arcs_[pa].head;
    }
    int d = base + steps;
    for (int x2 = y; x2 != x; x2 = arcs_[parent_arc_[x2]].head) {
      ts_[x2] = time_;
      dist_[x2] = d--;
    }
    return base + steps;
  }

  void adopt() {
    for (std::size_t oi = 0; oi < orphans_.size(); ++oi) {
      const int x = orphans_[oi];
      if (parent_arc_[x] != kNoArc || tree_[x] == kFree) continue;
      const Tree side = static_cast<Tree>(tree_[x]);
      int best_arc = kNoArc;
      int best_dist = std::numeric_limits<int>::max();
      for (int a = first_arc_[x]; a != kNoArc; a = arcs_[a].next) {
        const double r = side == kSource ? arcs_[a ^ 1].rcap : arcs_[a].rcap;
        if (r <= 0.0) continue;
        const int y = arcs_[a].head;
        if (tree_[y] != side) continue;
        const int d = root_distance(y);
        if (d >= 0 && d < best_dist) {
          best_dist = d;
          best_arc = a;
        }
      }
      if (best_arc != kNoArc) {
        parent_arc_[x] = best_arc;
        ts_[x] = time_;
        dist_[x] = best_dist + 1;
      } else {
        for (int a = first_arc_[x]; a != kNoArc; a = arcs_[a].next) {
          const int y = arcs_[a].head;
          if (tree_[y] != side) continue;
          const double r = side == kSource ? arcs_[a ^ 1].rcap : arcs_[a].rcap;
          if (r > 0.0) activate(y);
          if (parent_arc_[y] == (a ^ 1)) make_orphan(y);
        }
        tree_[x] = kFree;
      }
    }
    orphans_.clear();
  }

  int n_ = 0;
  double const_base_ = 0.0;    // offset plus reduction constants
  double negative_sum_ = 0.0;  // sum of min(0, initial terminal capacity)
  double flow_ = 0.0;
  double big_m_ = 0.0;
  std::vector<double> tr_cap_;  // > 0: residual from source, < 0: to sink
  std::vector<int> first_arc_;
  std::vector<Arc> arcs_;  // arcs 2k and 2k+1 are sisters
  std::vector<int> parent_arc_;
  std::vector<std::uint8_t> tree_;
  std::vector<std::uint64_t> ts_;
  std::vector<int> dist_;
  std::vector<int> queue_;  // FIFO of active nodes, may hold stale entries
  std::size_t queue_head_ = 0;
  std::vector<std::uint8_t> in_queue_;
  std::vector<int> orphans_;
  std::uint64_t time_ = 0;
};

CutResult minimize(const BinaryEnergy& energy) {
  const std::size_t bad = energy.first_nonsubmodular();
  if (bad != BinaryEnergy::npos) throw SubmodularityError(bad);
  auto graph = std::make_shared<FlowGraph>(energy);
  CutResult r;
  r.min_value = graph->solve();
  r.argmin.resize(energy.node_count);
  for (int j = 0; j < energy.node_count; ++j) r.argmin[j] = graph->source_side(j) ? 0 : 1;
  r.flow_graph = std::move(graph);
  return r;
}

double clamped_min(const BinaryEnergy& energy, int j, int k) {
  if (j < 0 || j >= energy.node_count) throw InputError("clamp index out of range");
  FlowGraph graph(energy, j, k);
  return graph.solve();
}

double clamped_min(const CutResult& base, int j, int k) {
  if (!base.flow_graph) throw InputError("clamped_min requires a solved flow-graph handle");
  if (j < 0 || j >= static_cast<int>(base.argmin.size()))
    throw InputError("clamp index out of range");
  FlowGraph scratch(*base.flow_graph);
  scratch.apply_clamp(j, k);
  return scratch.resolve();
}

MinMarginals min_marginals(const BinaryEnergy& energy, const CutResult& base, Exec exec) {
  const int n = energy.node_count;
  MinMarginals mm;
  mm.m0.resize(n);
  mm.m1.resize(n);
  // The side agreeing with the base argmin is the global minimum; the other
  // side recycles the solved base flow. Nothing here throws, so the loop
  // body is safe inside an OpenMP region.
  auto solve_one = [&](FlowGraph& scratch, int j) {
    const int k = base.argmin[j];
    (k == 0 ? mm.m0 : mm.m1)[j] = base.min_value;
    double other;
    if (base.flow_graph) {
      scratch = *base.flow_graph;
      scratch.apply_clamp(j, 1 - k);
      other = scratch.resolve();
    } else {
      other = clamped_min(energy, j, 1 - k);
    }
    (k == 0 ? mm.m1 : mm.m0)[j] = other;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      FlowGraph scratch;
#pragma omp for schedule(dynamic)
      for (int j = 0; j < n; ++j) solve_one(scratch, j);
    }
  } else {
    FlowGraph scratch;
    for (int j = 0; j < n; ++j) solve_one(scratch, j);
  }
  return mm;
}

MinMarginals min_marginals(const BinaryEnergy& energy, Exec exec) {
  return min_marginals(energy, minimize(energy), exec);
}

}  // namespace smd
