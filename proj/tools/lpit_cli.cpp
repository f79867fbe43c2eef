// lpit: sparse recovery by iterative thresholding.
//
//   lpit solve   [instance.bin] | --m --n --r --seed   [solver flags] [--trace t.csv]
//   lpit bench   --out DIR [--config FILE] [sweep flags]
//   lpit sweep-p --out DIR [--config FILE] [sweep flags]
//   lpit gen     --m --n --r --seed --out FILE
//
// Exit codes: 0 success, 1 invalid flags or contract violation, 2 I/O failure.

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lpit/lpit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitContract = 1;
constexpr int kExitIo = 2;

struct SolverFlags {
  std::string alg = "it";
  double p = 0.7;
  double eta = 0.01;
  double tol = 1e-8;
  std::size_t max_iters = 5000;
  double epsilon_scale = 0.7;
  double epsilon_floor = 1e-3;
  std::optional<double> fixed_lambda;
};

void add_solver_numeric_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--eta", f.eta, "step size margin, mu = (1-eta)/||A||^2")->capture_default_str();
  cmd->add_option("--tol", f.tol, "stop when ||x+ - x|| / ||x|| <= tol")->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "iteration cap")->capture_default_str();
  cmd->add_option("--epsilon-scale", f.epsilon_scale, "eps_i = max(scale*|mu A^T(b-Ax)|_i, floor)")
      ->capture_default_str();
  cmd->add_option("--epsilon-floor", f.epsilon_floor, "lower bound on eps_i")->capture_default_str();
  cmd->add_option("--fixed-lambda", f.fixed_lambda, "use this lambda instead of the adaptive rule");
}

void apply_solver_flags(const SolverFlags& f, lpit::SolverConfig& sc) {
  sc.eta = f.eta;
  sc.tolerance = f.tol;
  sc.max_iterations = f.max_iters;
  sc.epsilon_scale = f.epsilon_scale;
  sc.epsilon_floor = f.epsilon_floor;
  sc.fixed_lambda = f.fixed_lambda;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  std::optional<std::size_t> m, n, r;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sparsity;
  std::string signal = "gaussian";
  std::string trace;
  SolverFlags solver;
};

int run_solve(const SolveArgs& a) {
  const bool from_file = !a.instance.empty();
  const bool from_flags = a.m || a.n || a.r || a.seed;
  if (from_file == from_flags || (from_flags && !(a.m && a.n && a.r && a.seed))) {
    std::cerr << "solve: give either an instance file or all of --m --n --r --seed\n";
    return kExitContract;
  }
  const lpit::ProblemInstance inst =
      from_file ? lpit::load_instance(a.instance)
                : lpit::generate_instance(*a.m, *a.n, *a.r, *a.seed, lpit::parse_signal_distribution(a.signal));

  lpit::SolverConfig sc;
  sc.algorithm = lpit::parse_algorithm(a.solver.alg);
  sc.p = a.solver.p;
  sc.sparsity_r = a.sparsity.value_or(inst.sparsity);
  apply_solver_flags(a.solver, sc);
  sc.record_trace = !a.trace.empty();

  const lpit::SolveResult res = lpit::solve(inst.a, inst.b, sc);
  const double re = lpit::relative_error(res.solution, inst.x0);
  std::printf("alg=%s m=%zu n=%zu r=%zu re=%.6e iterations=%zu termination=%s mu=%.6e\n",
              std::string(lpit::to_string(sc.algorithm)).c_str(), inst.a.rows(), inst.a.cols(), inst.sparsity, re,
              res.iterations, std::string(lpit::to_string(res.termination)).c_str(), res.mu);
  if (!res.diagnostic.empty()) std::printf("diagnostic: %s\n", res.diagnostic.c_str());

  if (!a.trace.empty()) {
    std::string csv = "iter,h1,step_norm,lambda,support\n";
    char buf[160];
    for (std::size_t k = 0; k < res.trace.size(); ++k) {
      const auto& t = res.trace[k];
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%zu\n", k + 1, t.h1, t.step_norm, t.lambda, t.support);
      csv += buf;
    }
    lpit::write_file(a.trace, csv);
  }
  return res.termination == lpit::Termination::DegenerateInput ? kExitContract : kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string out;
  std::string config;
  std::optional<std::size_t> m, n, trials, jobs, max_iters;
  std::optional<std::string> r, p, algorithms, signal;
  std::optional<double> success_threshold, eta, tol, epsilon_scale, epsilon_floor, fixed_lambda;
  std::optional<std::uint64_t> seed;
  bool no_wall_time = false;
};

void add_sweep_flags(CLI::App* cmd, SweepArgs& a, bool with_algorithms) {
  cmd->add_option("--out", a.out, "output directory for trials.csv, aggregate.csv, metadata.json")->required();
  cmd->add_option("--config", a.config, "flat key = value file; flags given on the command line override it");
  cmd->add_option("--m", a.m, "measurements [default: 256]");
  cmd->add_option("--n", a.n, "signal length [default: 1024]");
  cmd->add_option("--r", a.r, "sparsity list, e.g. 10,20 or 10:90:10 [default: 10:90:10]");
  cmd->add_option("--p", a.p,
                  with_algorithms ? "p list for IT cells [default: 0.7]" : "p list [default: 0.1,0.3,0.5,0.7,0.9]");
  if (with_algorithms) cmd->add_option("--algorithms", a.algorithms, "it,soft,half subset [default: it,soft,half]");
  cmd->add_option("--trials", a.trials, "trials per cell [default: 20]");
  cmd->add_option("--success-threshold", a.success_threshold, "success iff RE <= threshold [default: 1e-3]");
  cmd->add_option("--seed", a.seed, "master seed [default: 1]");
  cmd->add_option("--signal", a.signal, "nonzero distribution gaussian|rademacher [default: gaussian]");
  cmd->add_option("--jobs", a.jobs, "worker threads, 0 = all cores [default: 0]");
  cmd->add_option("--eta", a.eta, "step size margin [default: 0.01]");
  cmd->add_option("--tol", a.tol, "relative step tolerance [default: 1e-8]");
  cmd->add_option("--max-iters", a.max_iters, "iteration cap [default: 5000]");
  cmd->add_option("--epsilon-scale", a.epsilon_scale, "eps scale [default: 0.7]");
  cmd->add_option("--epsilon-floor", a.epsilon_floor, "eps floor [default: 1e-3]");
  cmd->add_option("--fixed-lambda", a.fixed_lambda, "fixed lambda instead of the adaptive rule");
  cmd->add_flag("--no-wall-time", a.no_wall_time, "write 0 in wall_time_s so reruns are byte-identical");
}

lpit::SweepConfig build_sweep_config(const SweepArgs& a, bool p_sweep) {
  lpit::SweepConfig cfg;
  cfg.r_values = lpit::parse_size_list("10:90:10");
  if (p_sweep) {
    cfg.p_values = {0.1, 0.3, 0.5, 0.7, 0.9};
    cfg.algorithms = {lpit::Algorithm::IT};
  } else {
    cfg.algorithms = {lpit::Algorithm::IT, lpit::Algorithm::Soft, lpit::Algorithm::Half};
  }
  if (!a.config.empty()) lpit::parse_sweep_config(lpit::read_file(a.config), cfg);

  auto set = [&](const char* key, const auto& opt) {
    if (!opt) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*opt)>, std::string>)
      lpit::apply_sweep_setting(cfg, key, *opt);
    else
      lpit::apply_sweep_setting(cfg, key, lpit::detail::format_double(static_cast<double>(*opt)));
  };
  auto set_int = [&](const char* key, const auto& opt) {
    if (opt) lpit::apply_sweep_setting(cfg, key, std::to_string(*opt));
  };
  set_int("m", a.m);
  set_int("n", a.n);
  set("r", a.r);
  set("p", a.p);
  set("algorithms", a.algorithms);
  set_int("trials", a.trials);
  set("success_threshold", a.success_threshold);
  set_int("seed", a.seed);
  set("signal", a.signal);
  set_int("jobs", a.jobs);
  set("eta", a.eta);
  set("tol", a.tol);
  set_int("max_iters", a.max_iters);
  set("epsilon_scale", a.epsilon_scale);
  set("epsilon_floor", a.epsilon_floor);
  set("fixed_lambda", a.fixed_lambda);
  if (a.no_wall_time) cfg.record_wall_time = false;
  if (p_sweep)
    lpit::detail::require(cfg.algorithms.size() == 1 && cfg.algorithms.front() == lpit::Algorithm::IT,
                          "sweep-p: algorithms must be exactly {it}");
  cfg.validate();
  return cfg;
}

int run_sweep_command(const SweepArgs& a, bool p_sweep) {
  const lpit::SweepConfig cfg = build_sweep_config(a, p_sweep);
  const lpit::BenchmarkReport report = p_sweep ? lpit::sweep_p(cfg) : lpit::run_sweep(cfg);
  const auto paths = lpit::write_report(report, a.out);
  std::cout << lpit::format_summary(report);
  std::cout << "wrote " << paths.trials.string() << ", " << paths.aggregate.string() << ", "
            << paths.metadata.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::size_t m = 0, n = 0, r = 0;
  std::uint64_t seed = 0;
  std::string signal = "gaussian";
  std::string out;
};

int run_gen(const GenArgs& a) {
  const auto inst = lpit::generate_instance(a.m, a.n, a.r, a.seed, lpit::parse_signal_distribution(a.signal));
  const std::uint64_t sum = lpit::save_instance(inst, a.out);
  std::printf("wrote %s m=%zu n=%zu r=%zu seed=%" PRIu64 " checksum=fnv1a64:%016" PRIx64 "\n", a.out.c_str(), a.m,
              a.n, a.r, a.seed, sum);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lpit: sparse signal recovery by iterative thresholding (IT, Soft, Half)"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "recover one instance and print RE, iterations, termination");
  solve->add_option("instance", solve_args.instance, "instance file written by `gen`");
  solve->add_option("--m", solve_args.m, "measurements (generate on the fly)");
  solve->add_option("--n", solve_args.n, "signal length (generate on the fly)");
  solve->add_option("--r", solve_args.r, "true sparsity (generate on the fly)");
  solve->add_option("--seed", solve_args.seed, "instance seed (generate on the fly)");
  solve->add_option("--signal", solve_args.signal, "nonzero distribution gaussian|rademacher")->capture_default_str();
  solve->add_option("--alg", solve_args.solver.alg, "it|soft|half")->capture_default_str();
  solve->add_option("--p", solve_args.solver.p, "exponent p in (0,1) for IT")->capture_default_str();
  solve->add_option("--sparsity", solve_args.sparsity, "r used by the lambda rule [default: instance r]");
  add_solver_numeric_flags(solve, solve_args.solver);
  solve->add_option("--trace", solve_args.trace, "write per-iteration trace CSV (iter,h1,step_norm,lambda,support)");

  SweepArgs bench_args;
  auto* bench = app.add_subcommand("bench", "success-rate sweep over r for it/soft/half");
  add_sweep_flags(bench, bench_args, true);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep-p", "IT success-rate sweep over r for several p");
  add_sweep_flags(sweep, sweep_args, false);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "write a seeded Gaussian instance to a binary file");
  gen->add_option("--m", gen_args.m, "measurements")->required();
  gen->add_option("--n", gen_args.n, "signal length")->required();
  gen->add_option("--r", gen_args.r, "sparsity")->required();
  gen->add_option("--seed", gen_args.seed, "seed")->required();
  gen->add_option("--signal", gen_args.signal, "nonzero distribution gaussian|rademacher")->capture_default_str();
  gen->add_option("--out", gen_args.out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitContract;
  }

  try {
    if (*solve) return run_solve(solve_args);
    if (*bench) return run_sweep_command(bench_args, false);
    if (*sweep) return run_sweep_command(sweep_args, true);
    if (*gen) return run_gen(gen_args);
  } catch (const lpit::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const lpit::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  }
  return kExitContract;
}
