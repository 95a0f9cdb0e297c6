#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "smd/image.hpp"
#include "smd/problem.hpp"

namespace smd {

// Random grid instance: 4-neighborhood, unaries N(0,1), shared per-edge
// strengths |N(0, 0.5)|, optional strict class-size targets.
struct SyntheticConfig {
  int grid_height = 0;
  int grid_width = 0;
  int label_count = 2;
  std::uint64_t seed = 0;
  bool class_sizes = false;
};

MRFProblem generate_synthetic(const SyntheticConfig& config);

// round(n * (p+1) / sum_q q) per label, largest class absorbing the rounding
// residue so the targets sum to n.
std::vector<int> class_size_targets(int node_count, int label_count);

// Seeded segmentation instance: histogram color models from the seed masks,
// hard-clamped seed unaries, generalized Potts pairwise with per-edge sigma
// from a local box, optional star priors and equal-class-size couplings.
struct SegmentationConfig {
  Image image;
  Image seeds;  // 1-channel; pixel value k > 0 assigns the pixel to class k-1
  double a1 = 2.0;
  double a2 = 20.0;
  int sigma_box = 20;
  std::vector<int> star_centers;  // per class, -1 = no prior
  double star_beta = 0.0;
  bool equal_class_sizes = false;
  int background_class = 0;  // excluded from priors and size coupling
};

MRFProblem problem_from_image(const SegmentationConfig& config);

// Line-oriented text format, lossless round trip (17 significant digits).
MRFProblem load_problem(const std::string& path);
MRFProblem load_problem(std::istream& is);
void save_problem(const MRFProblem& problem, const std::string& path);
void save_problem(const MRFProblem& problem, std::ostream& os);

}  // namespace smd
