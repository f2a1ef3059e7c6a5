#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbrrt/problem.hpp"
#include "fbrrt/solver.hpp"

namespace fbrrt::app {

/// Invalid configuration (bad key, value, or unreadable file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved experiment: problem, solver settings, and output options.
struct RunConfig {
  std::string problem_name = "lqr1d";
  SocProblem problem;
  SolverConfig solver;
  std::filesystem::path out_dir = "fbrrt_out";
  int trials = 0;  // 0: single run; >= 1: trial batch
};

/**
 * Partial settings from a config file or command line. Unset fields keep the
 * problem defaults. Sections: [problem], [solver], [forward], [backward], [output].
 */
struct ConfigOverrides {
  std::optional<std::string> problem;
  std::optional<double> horizon;
  std::optional<double> control_weight;
  std::optional<std::vector<double>> terminal_weights;
  std::optional<std::vector<double>> initial_state;
  std::optional<std::vector<double>> roi_min;
  std::optional<std::vector<double>> roi_max;

  std::optional<int> particles;
  std::optional<int> erode;
  std::optional<int> steps;
  std::optional<int> iterations;
  std::optional<int> rollouts;
  std::optional<std::uint64_t> seed;

  std::optional<std::string> mode;
  std::optional<double> eps_rrt;
  std::optional<double> eps_opt;

  std::optional<double> lambda;
  std::optional<std::vector<double>> lambda_grid;
  std::optional<bool> lambda_search;
  std::optional<double> ridge_scale;

  std::optional<std::string> out_dir;
  std::optional<int> trials;

  /// Fields set in `other` replace ours.
  void merge(const ConfigOverrides& other);
};

ConfigOverrides parse_config(std::istream& in);
ConfigOverrides load_config_file(const std::filesystem::path& path);

/// Problem defaults, then overrides; validates the result.
RunConfig resolve(const ConfigOverrides& overrides);

/// Every setting materialized, in the format parse_config reads.
void write_config(std::ostream& out, const RunConfig& config);

std::vector<double> parse_list(const std::string& text);
std::string format_list(const std::vector<double>& values);

}  // namespace fbrrt::app
