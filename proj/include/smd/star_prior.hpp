#pragma once

#include <vector>

#include "smd/maxflow.hpp"

namespace smd {

// Star-shape prior for one label on a grid: wherever the label is on, it must
// stay on along the parent chain down to the center. Encoded as extra
// pairwise terms on the label's binary subproblem.
struct StarPrior {
  int label = 0;
  int center = 0;      // pixel index, row-major
  double beta = 0.0;   // ballooning force, >= 0
  std::vector<int> parent;  // parent[center] == center
};

// parent(i) is the 8-neighbor of i strictly closer to the center that lies
// nearest to the continuous segment center->i; ties break by scan order
// E, W, N, S, NE, NW, SE, SW.
std::vector<int> build_parent_map(int grid_width, int grid_height, int center_pixel);

// One term per non-center node i with parent j:
// (e00=0, e01=beta, e10=big_m, e11=0). big_m must exceed the hosting
// subproblem's dominance bound so the forbidden transition is never optimal.
std::vector<PairwiseTerm> star_terms(const StarPrior& prior, double big_m);

}  // namespace smd
