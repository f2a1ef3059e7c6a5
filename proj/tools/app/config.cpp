#include "app/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace fbrrt::app {
namespace pt = boost::property_tree;

namespace {

template <typename T>
void take(std::optional<T>& into, const std::optional<T>& from) {
  if (from) into = from;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T>
T convert(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_same_v<T, int>) {
      value = std::stoi(text, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative");
      value = std::stoull(text, &used);
    } else if constexpr (std::is_same_v<T, double>) {
      value = std::stod(text, &used);
    }
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
}

bool convert_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("empty entry in list '" + text + "'");
    values.push_back(convert<double>("list", item.substr(first, last - first + 1)));
  }
  if (values.empty()) throw ConfigError("empty list");
  return values;
}

std::string format_list(const std::vector<double>& values) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

void ConfigOverrides::merge(const ConfigOverrides& o) {
  take(problem, o.problem);
  take(horizon, o.horizon);
  take(control_weight, o.control_weight);
  take(terminal_weights, o.terminal_weights);
  take(initial_state, o.initial_state);
  take(roi_min, o.roi_min);
  take(roi_max, o.roi_max);
  take(particles, o.particles);
  take(erode, o.erode);
  take(steps, o.steps);
  take(iterations, o.iterations);
  take(rollouts, o.rollouts);
  take(seed, o.seed);
  take(mode, o.mode);
  take(eps_rrt, o.eps_rrt);
  take(eps_opt, o.eps_opt);
  take(lambda, o.lambda);
  take(lambda_grid, o.lambda_grid);
  take(lambda_search, o.lambda_search);
  take(ridge_scale, o.ridge_scale);
  take(out_dir, o.out_dir);
  take(trials, o.trials);
}

ConfigOverrides parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ConfigOverrides c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' must appear inside a section");
    }
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      const std::string v = node.data();
      if (key == "problem.name") c.problem = v;
      else if (key == "problem.horizon") c.horizon = convert<double>(key, v);
      else if (key == "problem.control_weight") c.control_weight = convert<double>(key, v);
      else if (key == "problem.terminal_weights") c.terminal_weights = parse_list(v);
      else if (key == "problem.initial_state") c.initial_state = parse_list(v);
      else if (key == "problem.roi_min") c.roi_min = parse_list(v);
      else if (key == "problem.roi_max") c.roi_max = parse_list(v);
      else if (key == "solver.particles") c.particles = convert<int>(key, v);
      else if (key == "solver.erode") c.erode = convert<int>(key, v);
      else if (key == "solver.steps") c.steps = convert<int>(key, v);
      else if (key == "solver.iterations") c.iterations = convert<int>(key, v);
      else if (key == "solver.rollouts") c.rollouts = convert<int>(key, v);
      else if (key == "solver.seed") c.seed = convert<std::uint64_t>(key, v);
      else if (key == "forward.mode") c.mode = v;
      else if (key == "forward.eps_rrt") c.eps_rrt = convert<double>(key, v);
      else if (key == "forward.eps_opt") c.eps_opt = convert<double>(key, v);
      else if (key == "backward.lambda") c.lambda = convert<double>(key, v);
      else if (key == "backward.lambda_grid") c.lambda_grid = parse_list(v);
      else if (key == "backward.lambda_search") c.lambda_search = convert_bool(key, v);
      else if (key == "backward.ridge_scale") c.ridge_scale = convert<double>(key, v);
      else if (key == "output.out_dir") c.out_dir = v;
      else if (key == "output.trials") c.trials = convert<int>(key, v);
      else throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return c;
}

ConfigOverrides load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return parse_config(in);
}

RunConfig resolve(const ConfigOverrides& o) {
  RunConfig rc;
  rc.problem_name = o.problem.value_or("lqr1d");
  try {
    rc.problem = make_problem(rc.problem_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  SocProblem& p = rc.problem;
  const auto check_dim = [&](const std::vector<double>& v, const char* what) {
    if (static_cast<int>(v.size()) != p.state_dim) {
      throw ConfigError(std::string(what) + " needs " + std::to_string(p.state_dim) +
                        " entries for " + rc.problem_name);
    }
  };
  if (o.horizon) p.horizon = *o.horizon;
  if (o.initial_state) {
    check_dim(*o.initial_state, "initial_state");
    p.initial_state = to_eigen(*o.initial_state);
  }
  if (o.control_weight || o.terminal_weights) {
    if (o.terminal_weights) check_dim(*o.terminal_weights, "terminal_weights");
    try {
      set_cost_weights(p, o.control_weight.value_or(p.control_weight),
                       o.terminal_weights ? to_eigen(*o.terminal_weights) : p.terminal_weights);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.roi_min) {
    check_dim(*o.roi_min, "roi_min");
    p.region_of_interest.lower = to_eigen(*o.roi_min);
  }
  if (o.roi_max) {
    check_dim(*o.roi_max, "roi_max");
    p.region_of_interest.upper = to_eigen(*o.roi_max);
  }

  SolverConfig& s = rc.solver;
  s = default_config(p);
  if (o.particles) s.particles = *o.particles;
  if (o.erode) {
    s.erode_width = *o.erode;
  } else if (o.particles) {
    // Keep the default erode fraction when only M changes.
    const SolverConfig d = default_config(p);
    s.erode_width = static_cast<int>(static_cast<long long>(*o.particles) * d.erode_width /
                                     d.particles);
  }
  if (o.steps) s.steps = *o.steps;
  if (o.iterations) s.iterations = *o.iterations;
  if (o.rollouts) s.rollouts = *o.rollouts;
  if (o.seed) s.seed = *o.seed;
  try {
    if (o.mode) s.forward.mode = parse_sampling_mode(*o.mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (o.eps_rrt) s.forward.eps_rrt = *o.eps_rrt;
  if (o.eps_opt) s.forward.eps_opt = *o.eps_opt;
  if (o.lambda) s.backward.lambda = *o.lambda;
  if (o.lambda_grid) {
    s.backward.lambda_grid = *o.lambda_grid;
    if (!o.lambda_search) s.backward.lambda_search = true;
  }
  if (o.lambda_search) s.backward.lambda_search = *o.lambda_search;
  if (o.ridge_scale) s.backward.ridge_scale = *o.ridge_scale;
  if (o.out_dir) rc.out_dir = *o.out_dir;
  if (o.trials) {
    if (*o.trials < 0) throw ConfigError("trials must be nonnegative (0: single run)");
    rc.trials = *o.trials;
  }
  try {
    s.validate(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

void write_config(std::ostream& out, const RunConfig& rc) {
  const SocProblem& p = rc.problem;
  const SolverConfig& s = rc.solver;
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "[problem]\n"
      << "name=" << rc.problem_name << '\n'
      << "horizon=" << p.horizon << '\n'
      << "control_weight=" << p.control_weight << '\n'
      << "terminal_weights=" << format_list(to_std(p.terminal_weights)) << '\n'
      << "initial_state=" << format_list(to_std(p.initial_state)) << '\n'
      << "roi_min=" << format_list(to_std(s.forward.roi.lower)) << '\n'
      << "roi_max=" << format_list(to_std(s.forward.roi.upper)) << '\n'
      << "\n[solver]\n"
      << "particles=" << s.particles << '\n'
      << "erode=" << s.erode_width << '\n'
      << "steps=" << s.steps << '\n'
      << "iterations=" << s.iterations << '\n'
      << "rollouts=" << s.rollouts << '\n'
      << "seed=" << s.seed << '\n'
      << "\n[forward]\n"
      << "mode=" << to_string(s.forward.mode) << '\n'
      << "eps_rrt=" << s.forward.eps_rrt << '\n'
      << "eps_opt=" << s.forward.eps_opt << '\n'
      << "\n[backward]\n"
      << "lambda=" << s.backward.lambda << '\n'
      << "lambda_grid=" << format_list(s.backward.lambda_grid) << '\n'
      << "lambda_search=" << (s.backward.lambda_search ? "true" : "false") << '\n'
      << "ridge_scale=" << s.backward.ridge_scale << '\n'
      << "\n[output]\n"
      << "out_dir=" << rc.out_dir.string() << '\n'
      << "trials=" << rc.trials << '\n';
  out.precision(precision);
}

}  // namespace fbrrt::app
