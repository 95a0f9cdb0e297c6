#include "smd/oracle.hpp"

#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "smd/errors.hpp"

namespace smd {

namespace {

constexpr long long kEnumerationGuard = 10'000'000;

long long labeling_space_size(const MRFProblem& pb) {
  long long total = 1;
  for (int j = 0; j < pb.node_count; ++j) {
    if (total > kEnumerationGuard / pb.label_count + 1) return kEnumerationGuard + 1;
    total *= pb.label_count;
  }
  return total;
}

struct ChunkResult {
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  std::vector<Labeling> minimizers;
};

// Enumerates labelings with index in [begin, end); node 0 is the fastest
// digit of the mixed-radix counter.
template <class Accept>
ChunkResult scan_chunk(const MRFProblem& pb, long long begin, long long end, int cap,
                       const Accept& accept) {
  ChunkResult out;
  Labeling t;
  t.labels.resize(pb.node_count);
  long long rest = begin;
  for (int j = 0; j < pb.node_count; ++j) {
    t.labels[j] = static_cast<int>(rest % pb.label_count);
    rest /= pb.label_count;
  }
  for (long long idx = begin; idx < end; ++idx) {
    if (accept(t)) {
      const double e = energy(pb, t);
      if (!out.any || e < out.best) {
        out.any = true;
        out.best = e;
        out.minimizers.clear();
      }
      if (e == out.best && static_cast<int>(out.minimizers.size()) < cap)
        out.minimizers.push_back(t);
    }
    for (int j = 0; j < pb.node_count; ++j) {
      if (++t.labels[j] < pb.label_count) break;
      t.labels[j] = 0;
    }
  }
  return out;
}

template <class Accept>
OracleResult run_oracle(const MRFProblem& pb, Exec exec, int cap, const Accept& accept) {
  validate(pb);
  const long long total = labeling_space_size(pb);
  if (total > kEnumerationGuard)
    throw CapacityError("instance exceeds the enumeration guard of " +
                        std::to_string(kEnumerationGuard) + " labelings");

  std::vector<ChunkResult> chunks;
  if (exec == Exec::parallel && total > 4096) {
#ifdef _OPENMP
    const int chunk_count = std::max(1, 4 * omp_get_max_threads());
#else
    const int chunk_count = 4;
#endif
    chunks.resize(chunk_count);
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < chunk_count; ++c) {
      const long long begin = total * c / chunk_count;
      const long long end = total * (c + 1) / chunk_count;
      chunks[c] = scan_chunk(pb, begin, end, cap, accept);
    }
  } else {
    chunks.push_back(scan_chunk(pb, 0, total, cap, accept));
  }

  // Merging in chunk order reproduces the serial enumeration order exactly.
  OracleResult result;
  result.enumerated_count = total;
  result.feasible = false;
  for (const ChunkResult& c : chunks) {
    if (!c.any) continue;
    if (!result.feasible || c.best < result.optimum) {
      result.feasible = true;
      result.optimum = c.best;
      result.minimizers.clear();
    }
    if (c.best == result.optimum) {
      for (const Labeling& t : c.minimizers) {
        if (static_cast<int>(result.minimizers.size()) >= cap) break;
        result.minimizers.push_back(t);
      }
    }
  }
  if (!result.feasible) result.optimum = std::numeric_limits<double>::infinity();
  return result;
}

}  // namespace

OracleResult brute_force(const MRFProblem& pb, Exec exec, int cap) {
  return run_oracle(pb, exec, cap, [](const Labeling&) { return true; });
}

OracleResult brute_force_constrained(const MRFProblem& pb, Exec exec, int cap) {
  return run_oracle(pb, exec, cap, [&pb](const Labeling& t) {
    for (const LinearConstraint& c : pb.constraints)
      if (!c.satisfied(t, 1e-9)) return false;
    return true;
  });
}

std::pair<std::vector<std::uint8_t>, double> brute_force_binary(const BinaryEnergy& e) {
  if (e.node_count > 20) throw CapacityError("binary enumeration limited to 20 nodes");
  const std::uint32_t total = 1u << e.node_count;
  std::vector<std::uint8_t> y(e.node_count, 0), best_y(e.node_count, 0);
  double best = e.value(y);
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    for (int j = 0; j < e.node_count; ++j) y[j] = (mask >> j) & 1u;
    const double v = e.value(y);
    if (v < best) {
      best = v;
      best_y = y;
    }
  }
  return {best_y, best};
}

}  // namespace smd
