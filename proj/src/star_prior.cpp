#include "smd/star_prior.hpp"

#include <cmath>

#include "smd/errors.hpp"

namespace smd {

namespace {

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  const double qx = ax + t * dx;
  const double qy = ay + t * dy;
  return std::hypot(px - qx, py - qy);
}

}  // namespace

std::vector<int> build_parent_map(int grid_width, int grid_height, int center_pixel) {
  if (grid_width <= 0 || grid_height <= 0) throw InputError("grid dimensions must be positive");
  const int n = grid_width * grid_height;
  if (center_pixel < 0 || center_pixel >= n) throw InputError("center outside grid");
  const int cr = center_pixel / grid_width;
  const int cc = center_pixel % grid_width;

  // Neighbor offsets (dc, dr) in scan order E, W, N, S, NE, NW, SE, SW.
  static constexpr int kOffsets[8][2] = {{1, 0},  {-1, 0}, {0, -1}, {0, 1},
                                         {1, -1}, {-1, -1}, {1, 1},  {-1, 1}};

  std::vector<int> parent(n);
  parent[center_pixel] = center_pixel;
  for (int r = 0; r < grid_height; ++r) {
    for (int c = 0; c < grid_width; ++c) {
      const int i = r * grid_width + c;
      if (i == center_pixel) continue;
      const double d_center = std::hypot(static_cast<double>(c - cc), static_cast<double>(r - cr));
      int best = -1;
      double best_seg = 0.0;
      for (const auto& off : kOffsets) {
        const int nc = c + off[0];
        const int nr = r + off[1];
        if (nc < 0 || nc >= grid_width || nr < 0 || nr >= grid_height) continue;
        const double d_nb = std::hypot(static_cast<double>(nc - cc), static_cast<double>(nr - cr));
        if (!(d_nb < d_center)) continue;
        const double d_seg = point_segment_distance(nc, nr, cc, cr, c, r);
        if (best < 0 || d_seg < best_seg) {
          best = nr * grid_width + nc;
          best_seg = d_seg;
        }
      }
      // A strictly closer 8-neighbor always exists (step toward the center).
      parent[i] = best;
    }
  }
  return parent;
}

std::vector<PairwiseTerm> star_terms(const StarPrior& prior, double big_m) {
  if (prior.beta < 0.0) throw InputError("star prior beta must be >= 0");
  std::vector<PairwiseTerm> terms;
  terms.reserve(prior.parent.size());
  for (int i = 0; i < static_cast<int>(prior.parent.size()); ++i) {
    if (i == prior.center) continue;
    terms.push_back({i, prior.parent[i], 0.0, prior.beta, big_m, 0.0});
  }
  return terms;
}

}  // namespace smd
