#include "app/cli.hpp"

#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "app/config.hpp"
#include "app/run.hpp"

namespace fbrrt::app {

namespace {

/// "lo:hi,lo:hi,..." into per-coordinate bounds.
void parse_roi(const std::string& text, ConfigOverrides& c) {
  std::vector<double> lo, hi;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("--roi entry '" + item + "' is not lo:hi");
    lo.push_back(parse_list(item.substr(0, colon)).at(0));
    hi.push_back(parse_list(item.substr(colon + 1)).at(0));
  }
  if (lo.empty()) throw ConfigError("--roi is empty");
  c.roi_min = lo;
  c.roi_max = hi;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"FBRRT-SDE solver for stochastic optimal control"};
  app.set_version_flag("--version", "fbrrt 0.1.0");

  std::string config_path;
  std::string roi, lambda_grid;
  std::string problem, mode, out_dir;
  int particles = 0, erode = 0, steps = 0, iters = 0, rollouts = 0, trials = 0;
  std::uint64_t seed = 0;
  double lambda = 0, eps_rrt = 0, eps_opt = 0;
  bool quiet = false;

  app.add_option("-c,--config", config_path, "INI config file");
  auto* o_problem = app.add_option("--problem", problem, "lqr1d|double_integrator|double_pendulum|quadcopter");
  auto* o_mode = app.add_option("--mode", mode, "rrt|parallel");
  auto* o_particles = app.add_option("--particles", particles, "particles per depth M");
  auto* o_erode = app.add_option("--erode", erode, "erode width");
  auto* o_steps = app.add_option("--steps", steps, "time steps N");
  auto* o_iters = app.add_option("--iters", iters, "solver iterations");
  auto* o_rollouts = app.add_option("--rollouts", rollouts, "policy evaluation rollouts");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed (trial seed base with --trials)");
  auto* o_lambda = app.add_option("--lambda", lambda, "entropy temperature");
  auto* o_grid = app.add_option("--lambda-grid", lambda_grid, "comma-separated lambdas; enables search");
  auto* o_eps_rrt = app.add_option("--eps-rrt", eps_rrt, "nearest-to-sample parent probability");
  auto* o_eps_opt = app.add_option("--eps-opt", eps_opt, "greedy control probability");
  auto* o_roi = app.add_option("--roi", roi, "region of interest lo:hi per coordinate");
  auto* o_out = app.add_option("-o,--out-dir", out_dir, "output directory");
  auto* o_trials = app.add_option("--trials", trials, "run a batch of seeded trials");
  app.add_flag("-q,--quiet", quiet, "no progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig config;
  try {
    ConfigOverrides merged;
    if (!config_path.empty()) merged = load_config_file(config_path);
    ConfigOverrides flags;
    if (*o_problem) flags.problem = problem;
    if (*o_mode) flags.mode = mode;
    if (*o_particles) flags.particles = particles;
    if (*o_erode) flags.erode = erode;
    if (*o_steps) flags.steps = steps;
    if (*o_iters) flags.iterations = iters;
    if (*o_rollouts) flags.rollouts = rollouts;
    if (*o_seed) flags.seed = seed;
    if (*o_lambda) flags.lambda = lambda;
    if (*o_grid) flags.lambda_grid = parse_list(lambda_grid);
    if (*o_eps_rrt) flags.eps_rrt = eps_rrt;
    if (*o_eps_opt) flags.eps_opt = eps_opt;
    if (*o_roi) parse_roi(roi, flags);
    if (*o_out) flags.out_dir = out_dir;
    if (*o_trials) flags.trials = trials;
    merged.merge(flags);
    config = resolve(merged);
  } catch (const ConfigError& e) {
    err << "fbrrt: config error: " << e.what() << '\n';
    return kExitConfig;
  }

  RunOptions options;
  options.log = quiet ? nullptr : &err;
  try {
    if (config.trials >= 1) {
      const auto outcomes =
          trial_batch(config, config.trials, config.solver.seed, config.out_dir, options);
      int ok = 0;
      for (const auto& o : outcomes) ok += o.ok ? 1 : 0;
      out << ok << "/" << outcomes.size() << " trials succeeded; results in "
          << config.out_dir.string() << '\n';
      if (ok == 0) {
        err << "fbrrt: every trial failed\n";
        return kExitSolver;
      }
    } else {
      const SolveResult result = run_single(config, config.out_dir, options);
      out << "best cost " << result.reports.at(result.best_iteration - 1).best_cost
          << " at iteration " << result.best_iteration << "; results in "
          << config.out_dir.string() << '\n';
    }
  } catch (const IoError& e) {
    err << "fbrrt: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SolverError& e) {
    err << "fbrrt: solver failed at iteration " << e.iteration() << " (" << e.stage()
        << "): " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "fbrrt: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace fbrrt::app
