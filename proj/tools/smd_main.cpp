#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "smd/engine.hpp"
#include "smd/errors.hpp"
#include "smd/ingestion.hpp"
#include "smd/oracle.hpp"
#include "smd/text.hpp"

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;

struct GridSpec {
  int height = 0;
  int width = 0;
};

GridSpec parse_grid(const std::string& spec) {
  GridSpec g;
  const std::size_t x = spec.find('x');
  try {
    std::size_t p1 = 0, p2 = 0;
    if (x == std::string::npos) throw std::invalid_argument(spec);
    g.height = std::stoi(spec.substr(0, x), &p1);
    g.width = std::stoi(spec.substr(x + 1), &p2);
    if (p1 != x || p2 != spec.size() - x - 1 || g.height <= 0 || g.width <= 0)
      throw std::invalid_argument(spec);
  } catch (const std::exception&) {
    throw smd::InputError("invalid grid spec '" + spec + "' (expected HxW, e.g. 50x50)");
  }
  return g;
}

smd::Labeling load_labeling(const std::string& path, const smd::MRFProblem& pb) {
  std::ifstream is(path);
  if (!is) throw smd::InputError("cannot open labeling file: " + path);
  smd::Labeling t;
  int v;
  while (is >> v) t.labels.push_back(v);
  if (t.labels.size() != static_cast<std::size_t>(pb.node_count))
    throw smd::InputError("labeling has " + std::to_string(t.labels.size()) + " entries, expected " +
                          std::to_string(pb.node_count));
  for (int label : t.labels)
    if (label < 0 || label >= pb.label_count) throw smd::InputError("label out of range");
  return t;
}

const char* agreement_name(smd::AgreementStatus s) {
  switch (s) {
    case smd::AgreementStatus::strong:
      return "strong";
    case smd::AgreementStatus::weak:
      return "weak";
    default:
      return "none";
  }
}

struct SolveOptions {
  std::string problem_path;
  std::string trace_path = "trace.csv";
  std::string labeling_path = "labeling.txt";
  std::string mode = "hybrid";
  smd::SolverConfig config;
  bool serial = false;
  bool trace_timing = false;
};

smd::OptimizeResult run_solver(const SolveOptions& opt, const smd::MRFProblem& pb) {
  smd::SolverConfig config = opt.config;
  if (opt.mode == "hybrid")
    config.mode = smd::SolverMode::hybrid;
  else if (opt.mode == "subgradient")
    config.mode = smd::SolverMode::subgradient;
  else if (opt.mode == "mma")
    config.mode = smd::SolverMode::mma;
  else
    throw smd::InputError("unknown mode '" + opt.mode + "'");
  config.exec = opt.serial ? smd::Exec::serial : smd::Exec::parallel;
  return smd::optimize(pb, config);
}

int cmd_solve(const SolveOptions& opt) {
  const smd::MRFProblem pb = smd::load_problem(opt.problem_path);
  const smd::OptimizeResult result = run_solver(opt, pb);

  std::ofstream trace(opt.trace_path);
  if (!trace) throw smd::InputError("cannot open trace file for writing: " + opt.trace_path);
  smd::write_trace_csv(result.trace, trace, opt.trace_timing);

  std::ofstream labeling(opt.labeling_path);
  if (!labeling) throw smd::InputError("cannot open labeling file for writing: " + opt.labeling_path);
  for (int t : result.labeling.labels) labeling << t << '\n';

  std::cout << "bound=" << smd::format_double(result.dual.best_bound)
            << " energy=" << smd::format_double(result.primal_energy)
            << " violation=" << smd::format_double(result.primal_violation.recolor_fraction)
            << " agreement=" << agreement_name(result.agreement) << '\n';
  return 0;
}

struct OracleOptions {
  std::string problem_path;
  std::string check_path;
  bool against_solve = false;
  long long max_iterations = 2000;
  bool serial = false;
};

int cmd_oracle(const OracleOptions& opt) {
  const smd::MRFProblem pb = smd::load_problem(opt.problem_path);
  const smd::Exec exec = opt.serial ? smd::Exec::serial : smd::Exec::parallel;
  // Constraint-free problems reduce to the unconstrained oracle.
  const smd::OracleResult oracle = smd::brute_force_constrained(pb, exec);
  if (!oracle.feasible) {
    std::cout << "infeasible\n";
    return 0;
  }
  std::cout << "optimum=" << smd::format_double(oracle.optimum)
            << " minimizers=" << oracle.minimizers.size() << '\n';

  if (!opt.check_path.empty()) {
    const smd::Labeling t = load_labeling(opt.check_path, pb);
    const double e = smd::energy(pb, t);
    if (std::abs(e - oracle.optimum) <= 1e-9)
      std::cout << "check=optimal\n";
    else
      std::cout << "check=suboptimal delta=" << smd::format_double(e - oracle.optimum) << '\n';
  }
  if (opt.against_solve) {
    smd::SolverConfig config;
    config.max_iterations = opt.max_iterations;
    config.exec = exec;
    const smd::OptimizeResult result = smd::optimize(pb, config);
    std::cout << "bound=" << smd::format_double(result.dual.best_bound)
              << " gap=" << smd::format_double(oracle.optimum - result.dual.best_bound) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Submodular decomposition solver for associative multi-label MRFs"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a random grid problem");
  std::string grid_spec = "10x10";
  int labels = 3;
  std::uint64_t seed = 0;
  bool class_sizes = false;
  std::string out_path = "problem.smd";
  gen->add_option("--grid", grid_spec, "Grid size HxW")->capture_default_str();
  gen->add_option("--labels", labels, "Number of labels (>= 2)")->capture_default_str();
  gen->add_option("--seed", seed, "RNG seed")->capture_default_str();
  gen->add_flag("--class-sizes", class_sizes, "Attach strict class-size constraints");
  gen->add_option("-o,--output", out_path, "Output problem file")->capture_default_str();

  // solve
  auto* solve = app.add_subcommand("solve", "Run the decomposition solver");
  SolveOptions sopt;
  solve->add_option("problem", sopt.problem_path, "Problem file")->required();
  solve->add_option("--trace", sopt.trace_path, "Trace CSV output")->capture_default_str();
  solve->add_option("--labeling", sopt.labeling_path, "Labeling output")->capture_default_str();
  solve->add_option("--mode", sopt.mode, "hybrid | subgradient | mma")->capture_default_str();
  solve->add_option("--max-iters", sopt.config.max_iterations, "Iteration cap")->capture_default_str();
  solve->add_option("--alpha0", sopt.config.alpha0, "Initial step size")->capture_default_str();
  solve->add_option("--tau", sopt.config.tau, "Step decay scale")->capture_default_str();
  solve->add_option("--osc-window", sopt.config.oscillation_window, "Oscillation window")
      ->capture_default_str();
  solve->add_option("--stagnation", sopt.config.stagnation_window, "Stagnation window")
      ->capture_default_str();
  solve->add_option("--tie-tol", sopt.config.tie_tolerance, "Relative tie tolerance")
      ->capture_default_str();
  solve->add_option("--mma-tol", sopt.config.mma_fixed_point_tol, "MMA fixed-point tolerance")
      ->capture_default_str();
  solve->add_option("--seed", sopt.config.rng_seed, "Primal heuristic RNG seed")
      ->capture_default_str();
  solve->add_flag("--serial", sopt.serial, "Run the serial reference kernels");
  solve->add_flag("--trace-timing", sopt.trace_timing,
                  "Emit wall-clock seconds in the trace (breaks byte-identical re-runs)");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exhaustive ground truth for small instances");
  OracleOptions oopt;
  oracle->add_option("problem", oopt.problem_path, "Problem file")->required();
  oracle->add_option("--check", oopt.check_path, "Labeling file to check for optimality");
  oracle->add_flag("--against-solve", oopt.against_solve, "Also solve and report the gap");
  oracle->add_option("--max-iters", oopt.max_iterations, "Iteration cap for --against-solve")
      ->capture_default_str();
  oracle->add_flag("--serial", oopt.serial, "Run the serial reference kernels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const GridSpec g = parse_grid(grid_spec);
      smd::SyntheticConfig cfg;
      cfg.grid_height = g.height;
      cfg.grid_width = g.width;
      cfg.label_count = labels;
      cfg.seed = seed;
      cfg.class_sizes = class_sizes;
      smd::save_problem(smd::generate_synthetic(cfg), out_path);
      return 0;
    }
    if (solve->parsed()) return cmd_solve(sopt);
    if (oracle->parsed()) return cmd_oracle(oopt);
  } catch (const smd::CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const smd::InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const smd::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
