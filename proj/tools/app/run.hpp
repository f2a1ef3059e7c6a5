#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "fbrrt/solver.hpp"

namespace fbrrt::app {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  bool write_tree = true;
  std::ostream* log = nullptr;  // per-iteration progress, optional
};

/// Solve once and write the CSV artifacts plus config.ini into `dir`.
SolveResult run_single(const RunConfig& config, const std::filesystem::path& dir,
                       const RunOptions& options = {});

struct TrialOutcome {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string message;
  std::vector<double> best_cost;  // per iteration
};

struct AggregateRow {
  int iteration = 0;
  int trials = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Statistics of best cost per iteration over successful trials.
std::vector<AggregateRow> aggregate(const std::vector<TrialOutcome>& outcomes);

/**
 * Runs `num_trials` trials with seeds seed_base + t in dir/trial_XXX and writes
 * trials.csv and aggregate.csv. A failing trial is recorded and skipped.
 */
std::vector<TrialOutcome> trial_batch(const RunConfig& config, int num_trials,
                                      std::uint64_t seed_base, const std::filesystem::path& dir,
                                      const RunOptions& options = {});

void write_reports_csv(std::ostream& out, const std::vector<IterationReport>& reports);
void write_timing_csv(std::ostream& out, const std::vector<IterationReport>& reports);
void write_diagnostics_csv(std::ostream& out,
                           const std::vector<std::vector<StepDiagnostics>>& diagnostics);
void write_erode_csv(std::ostream& out, const std::vector<ErodeReport>& erosions);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_trials_csv(std::ostream& out, const std::vector<TrialOutcome>& outcomes);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Reads a comma-separated file; lines starting with '#' are skipped.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

}  // namespace fbrrt::app
