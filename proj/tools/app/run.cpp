#include "app/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

namespace fbrrt::app {
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.precision(std::numeric_limits<double>::max_digits10);
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string trial_dir_name(int trial) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%03d", trial);
  return buf;
}

}  // namespace

void write_reports_csv(std::ostream& out, const std::vector<IterationReport>& reports) {
  out << "iteration,policy_cost,std_error,best_cost,lambda,min_width_forward,"
         "max_width_forward,min_width_eroded,null_space_fits,ridge_fallbacks,excluded_rollouts\n";
  for (const auto& r : reports) {
    out << r.iteration << ',' << r.policy_cost << ',' << r.std_error << ',' << r.best_cost << ','
        << r.lambda << ',' << r.min_width_forward << ',' << r.max_width_forward << ','
        << r.min_width_eroded << ',' << r.null_space_fits << ',' << r.ridge_fallbacks << ',' << r.excluded_rollouts << '\n';
  }
}

void write_timing_csv(std::ostream& out, const std::vector<IterationReport>& reports) {
  out << "iteration,wall_seconds\n";
  for (const auto& r : reports) out << r.iteration << ',' << r.wall_seconds << '\n';
}

void write_diagnostics_csv(std::ostream& out,
                           const std::vector<std::vector<StepDiagnostics>>& diagnostics) {
  out << "iteration,step,effective_sample_size,residual_norm,condition_estimate,null_space_fit,ridge_used\n";
  for (std::size_t it = 0; it < diagnostics.size(); ++it) {
    for (const auto& d : diagnostics[it]) {
      out << it + 1 << ',' << d.step << ',' << d.effective_sample_size << ',' << d.residual_norm
          << ',' << d.condition_estimate << ',' << (d.null_space_fit ? 1 : 0) << ',' << (d.ridge_used ? 1 : 0) << '\n';
    }
  }
}

void write_erode_csv(std::ostream& out, const std::vector<ErodeReport>& erosions) {
  out << "iteration,depth,removed,deficit\n";
  for (std::size_t it = 0; it < erosions.size(); ++it) {
    const auto& e = erosions[it];
    for (std::size_t d = 0; d < e.removed.size(); ++d) {
      out << it + 1 << ',' << d << ',' << e.removed[d] << ','
          << (d < e.deficit.size() ? e.deficit[d] : 0) << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "iteration,trials,mean_best_cost,std_best_cost,min_best_cost,max_best_cost\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.trials << ',' << r.mean << ',' << r.std_dev << ',' << r.min
        << ',' << r.max << '\n';
  }
}

void write_trials_csv(std::ostream& out, const std::vector<TrialOutcome>& outcomes) {
  out << "trial,seed,status,final_best_cost,message\n";
  for (const auto& o : outcomes) {
    std::string msg = o.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << o.trial << ',' << o.seed << ',' << (o.ok ? "ok" : "failed") << ',';
    if (o.ok && !o.best_cost.empty()) out << o.best_cost.back();
    else out << "nan";
    out << ',' << msg << '\n';
  }
}

SolveResult run_single(const RunConfig& config, const fs::path& dir, const RunOptions& options) {
  make_dir(dir);
  write_file(dir / "config.ini", [&](std::ostream& out) { write_config(out, config); });

  IterationCallback progress;
  if (options.log) {
    progress = [log = options.log](const IterationReport& r) {
      *log << "iter " << r.iteration << "  cost " << r.policy_cost << " +- " << r.std_error
           << "  best " << r.best_cost << "  lambda " << r.lambda << "  " << r.wall_seconds
           << " s\n";
      log->flush();
    };
  }
  SolveResult result = solve(config.problem, config.solver, progress);

  write_file(dir / "reports.csv", [&](std::ostream& o) { write_reports_csv(o, result.reports); });
  write_file(dir / "timing.csv", [&](std::ostream& o) { write_timing_csv(o, result.reports); });
  write_file(dir / "diagnostics.csv",
             [&](std::ostream& o) { write_diagnostics_csv(o, result.diagnostics); });
  write_file(dir / "erode.csv", [&](std::ostream& o) { write_erode_csv(o, result.erosions); });
  write_file(dir / "model.csv", [&](std::ostream& o) { write_model_csv(o, result.best_model); });
  write_file(dir / "model_last.csv",
             [&](std::ostream& o) { write_model_csv(o, result.last_model); });
  if (options.write_tree) {
    write_file(dir / "tree.csv", [&](std::ostream& o) { write_tree_csv(o, result.tree); });
  }
  return result;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialOutcome>& outcomes) {
  std::size_t iterations = 0;
  for (const auto& o : outcomes) {
    if (o.ok) iterations = std::max(iterations, o.best_cost.size());
  }
  std::vector<AggregateRow> rows;
  for (std::size_t i = 0; i < iterations; ++i) {
    std::vector<double> v;
    for (const auto& o : outcomes) {
      if (o.ok && i < o.best_cost.size()) v.push_back(o.best_cost[i]);
    }
    AggregateRow row;
    row.iteration = static_cast<int>(i) + 1;
    row.trials = static_cast<int>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    row.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - row.mean) * (x - row.mean);
    row.std_dev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    row.min = *lo;
    row.max = *hi;
    rows.push_back(row);
  }
  return rows;
}

std::vector<TrialOutcome> trial_batch(const RunConfig& config, int num_trials,
                                      std::uint64_t seed_base, const fs::path& dir,
                                      const RunOptions& options) {
  if (num_trials < 1) throw std::invalid_argument("trial_batch: num_trials must be at least 1");
  make_dir(dir);
  write_file(dir / "config.ini", [&](std::ostream& out) { write_config(out, config); });

  std::vector<TrialOutcome> outcomes;
  for (int t = 0; t < num_trials; ++t) {
    TrialOutcome outcome;
    outcome.trial = t;
    outcome.seed = seed_base + static_cast<std::uint64_t>(t);
    RunConfig trial = config;
    trial.solver.seed = outcome.seed;
    trial.trials = 0;
    trial.out_dir = dir / trial_dir_name(t);
    if (options.log) *options.log << "trial " << t << " seed " << outcome.seed << '\n';
    try {
      RunOptions per_trial = options;
      per_trial.write_tree = false;
      const SolveResult result = run_single(trial, trial.out_dir, per_trial);
      for (const auto& r : result.reports) outcome.best_cost.push_back(r.best_cost);
      outcome.ok = true;
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      outcome.message = e.what();
      if (options.log) *options.log << "trial " << t << " failed: " << e.what() << '\n';
    }
    outcomes.push_back(std::move(outcome));
  }

  write_file(dir / "trials.csv", [&](std::ostream& o) { write_trials_csv(o, outcomes); });
  write_file(dir / "aggregate.csv",
             [&](std::ostream& o) { write_aggregate_csv(o, aggregate(outcomes)); });
  return outcomes;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no CSV column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  return std::stod(rows.at(row).at(column(name)));
}

CsvTable read_csv(std::istream& in) {
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto cells = split(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != table.header.size()) {
        throw std::runtime_error("CSV row has " + std::to_string(cells.size()) +
                                 " cells, header has " + std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw std::runtime_error("CSV has no header");
  return table;
}

CsvTable read_csv_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  return read_csv(in);
}

}  // namespace fbrrt::app
