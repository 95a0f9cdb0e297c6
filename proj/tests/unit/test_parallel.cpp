#include <random>

#include "doctest.h"
#include "smd/engine.hpp"
#include "smd/ingestion.hpp"
#include "smd/oracle.hpp"
#include "test_util.hpp"

using namespace smd;

// The OpenMP kernels must reproduce the serial reference bit for bit.

TEST_CASE("min_marginals: parallel equals serial") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 25; ++trial) {
    const auto e = test::random_submodular_energy(rng, 14);
    const auto a = min_marginals(e, Exec::serial);
    const auto b = min_marginals(e, Exec::parallel);
    CHECK(a.m0 == b.m0);
    CHECK(a.m1 == b.m1);
  }
}

TEST_CASE("dual_value: parallel equals serial") {
  std::mt19937_64 rng(62);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    SyntheticConfig cfg;
    cfg.grid_height = 4;
    cfg.grid_width = 4;
    cfg.label_count = 4;
    cfg.seed = 70 + trial;
    const auto pb = generate_synthetic(cfg);
    DualState dual = make_dual_state(pb);
    for (double& l : dual.lambda) l = noise(rng);
    const auto a = dual_value(pb, dual, Exec::serial);
    const auto b = dual_value(pb, dual, Exec::parallel);
    CHECK(a.bound == b.bound);
    for (int p = 0; p < pb.label_count; ++p) {
      CHECK(a.solutions[p].argmin == b.solutions[p].argmin);
      CHECK(a.solutions[p].value == b.solutions[p].value);
      CHECK(a.solutions[p].min_marginals.m0 == b.solutions[p].min_marginals.m0);
      CHECK(a.solutions[p].min_marginals.m1 == b.solutions[p].min_marginals.m1);
    }
  }
}

TEST_CASE("oracle: parallel equals serial") {
  SyntheticConfig cfg;
  cfg.grid_height = 3;
  cfg.grid_width = 3;
  cfg.label_count = 3;
  cfg.seed = 5;
  auto pb = generate_synthetic(cfg);
  const auto a = brute_force(pb, Exec::serial);
  const auto b = brute_force(pb, Exec::parallel);
  CHECK(a.optimum == b.optimum);
  REQUIRE(a.minimizers.size() == b.minimizers.size());
  for (std::size_t k = 0; k < a.minimizers.size(); ++k)
    CHECK(a.minimizers[k].labels == b.minimizers[k].labels);

  pb.constraints.push_back(strict_class_size(0, 3, pb));
  const auto ca = brute_force_constrained(pb, Exec::serial);
  const auto cb = brute_force_constrained(pb, Exec::parallel);
  CHECK(ca.optimum == cb.optimum);
  CHECK(ca.minimizers.size() == cb.minimizers.size());
}

TEST_CASE("optimize: parallel equals serial end to end") {
  SyntheticConfig cfg;
  cfg.grid_height = 3;
  cfg.grid_width = 3;
  cfg.label_count = 3;
  cfg.seed = 77;
  cfg.class_sizes = true;
  const auto pb = generate_synthetic(cfg);
  SolverConfig sc;
  sc.max_iterations = 80;
  sc.rng_seed = 5;
  sc.exec = Exec::serial;
  const auto a = optimize(pb, sc);
  sc.exec = Exec::parallel;
  const auto b = optimize(pb, sc);
  CHECK(a.dual.best_bound == b.dual.best_bound);
  CHECK(a.labeling.labels == b.labeling.labels);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
    CHECK(a.trace.records[k].lower_bound == b.trace.records[k].lower_bound);
    CHECK(a.trace.records[k].primal_energy == b.trace.records[k].primal_energy);
  }
}
