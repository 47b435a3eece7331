#pragma once

// INI run configuration. Every key has a default; the resolved values are
// dumped into the run manifest.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "smlab/evolution.hpp"
#include "smlab/probes.hpp"

namespace smlab {

inline GridSpec solver_grid() { return GridSpec{3, 16, 0.5, 128, 8.0}; }

struct DataConfig {
  std::string kind = "shell";  // "zero", "shell" (random shell atom) or "packet" (localized)
  int shell = 1;
  double norm = 0.01;          // target ||phi||_{B^{d/2}}
};

struct GaugeConfig {
  double margin = default_pole_margin;
  double amplitude = 0.3;      // sup |g| of the random test field
  int shell = 1;
};

struct RunConfig {
  std::uint64_t seed = 1;
  GridSpec grid = solver_grid();
  SolverConfig solver;
  DataConfig data;
  int splitstep_steps = 64;     // 0 disables the cross-check
  std::vector<double> snapshot_times{0.0, 0.5};
  LabParams lab;                // solver-side norms
  double direction_delta = 0.5;
  ProbeConfig probe;
  GaugeConfig gauge;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::config, "bad number '" + item + "' in list");
    }
  }
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace detail

// Reads an INI file; unknown sections or keys are errors.
inline RunConfig load_config(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  static const std::map<std::string, std::set<std::string>> known{
      {"run", {"seed"}},
      {"grid", {"dim", "n", "freq_step", "nt", "t_window"}},
      {"solver", {"epsilon", "max_iters", "tolerance", "dealias", "track_f_norm", "data", "data_shell", "data_norm",
                  "splitstep_steps", "snapshot_times", "k_y", "offset"}},
      {"probe", {"trials", "seed", "workers", "slope_threshold", "n", "freq_step", "nt", "t_window", "k_y", "offset"}},
      {"directions", {"delta", "shortlist"}},
      {"gauge", {"margin", "amplitude", "shell"}},
  };
  // read_ini drops empty sections, so headers are checked on the raw text too
  std::ifstream raw(path);
  for (std::string line; std::getline(raw, line);) {
    const auto a = line.find_first_not_of(" \t");
    if (a == std::string::npos || line[a] != '[') continue;
    const auto b = line.find(']', a);
    const std::string sec = line.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1);
    require(known.count(sec) > 0, ErrorCode::config, "unknown config section [" + sec + "]");
  }
  for (const auto& [sec, body] : tree) {
    const auto it = known.find(sec);
    require(it != known.end(), ErrorCode::config, "unknown config section [" + sec + "]");
    for (const auto& [key, v] : body)
      require(it->second.count(key) > 0, ErrorCode::config, "unknown key '" + key + "' in [" + sec + "]");
  }

  // ptree's defaulted get swallows conversion errors
  auto get = [&tree]<class T>(const char* path, T def) {
    return tree.get_child_optional(path) ? tree.get<T>(path) : def;
  };

  RunConfig c;
  try {
    c.seed = get("run.seed", c.seed);
    c.grid.dim = get("grid.dim", c.grid.dim);
    c.grid.n = get("grid.n", c.grid.n);
    c.grid.freq_step = get("grid.freq_step", c.grid.freq_step);
    c.grid.nt = get("grid.nt", c.grid.nt);
    c.grid.t_window = get("grid.t_window", c.grid.t_window);

    auto& s = c.solver;
    s.epsilon = get("solver.epsilon", s.epsilon);
    s.max_iters = get("solver.max_iters", s.max_iters);
    s.tolerance = get("solver.tolerance", s.tolerance);
    s.dealias = get("solver.dealias", s.dealias);
    s.track_f_norm = get("solver.track_f_norm", s.track_f_norm);
    c.data.kind = get("solver.data", c.data.kind);
    c.data.shell = get("solver.data_shell", c.data.shell);
    c.data.norm = get("solver.data_norm", s.epsilon);
    c.splitstep_steps = get("solver.splitstep_steps", c.splitstep_steps);
    if (auto t = tree.get_optional<std::string>("solver.snapshot_times")) c.snapshot_times = detail::parse_list(*t);
    c.lab.k_y = get("solver.k_y", c.lab.k_y);
    c.lab.offset = get("solver.offset", c.lab.offset);

    auto& p = c.probe;
    p.trials = get("probe.trials", p.trials);
    p.seed = get("probe.seed", c.seed);
    p.workers = get("probe.workers", p.workers);
    p.slope_threshold = get("probe.slope_threshold", p.slope_threshold);
    p.grid.n = get("probe.n", p.grid.n);
    p.grid.freq_step = get("probe.freq_step", p.grid.freq_step);
    p.grid.nt = get("probe.nt", p.grid.nt);
    p.grid.t_window = get("probe.t_window", p.grid.t_window);
    p.lab.k_y = get("probe.k_y", p.lab.k_y);
    p.lab.offset = get("probe.offset", p.lab.offset);

    c.direction_delta = get("directions.delta", c.direction_delta);
    const int shortlist = get("directions.shortlist", c.lab.shortlist);
    c.lab.shortlist = p.lab.shortlist = shortlist;

    c.gauge.margin = get("gauge.margin", c.gauge.margin);
    c.gauge.amplitude = get("gauge.amplitude", c.gauge.amplitude);
    c.gauge.shell = get("gauge.shell", c.gauge.shell);
  } catch (const pt::ptree_bad_data& e) {
    throw Error(ErrorCode::config, std::string("bad value: ") + e.what());
  }

  c.grid.validate();
  c.probe.grid.validate();
  require(c.data.kind == "zero" || c.data.kind == "shell" || c.data.kind == "packet", ErrorCode::config,
          "solver.data must be 'zero', 'shell' or 'packet'");
  require(c.solver.epsilon > 0.0 && c.solver.tolerance > 0.0 && c.solver.max_iters >= 1, ErrorCode::config,
          "solver: epsilon, tolerance and max_iters must be positive");
  require(c.splitstep_steps >= 0, ErrorCode::config, "solver.splitstep_steps must be non-negative");
  require(c.probe.trials >= 1, ErrorCode::config, "probe.trials must be positive");
  require(c.direction_delta > 0.0 && c.direction_delta < 1.0, ErrorCode::config, "directions.delta must lie in (0,1)");
  require(c.gauge.margin > 0.0 && c.gauge.margin < 2.0, ErrorCode::config, "gauge.margin must lie in (0,2)");
  if (c.direction_delta != 0.5) {
    auto set = std::make_shared<const DirectionSet>(build_direction_set(c.grid.dim, c.direction_delta));
    c.lab.directions = set;
    if (c.probe.grid.dim == c.grid.dim) c.probe.lab.directions = set;
  }
  return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["run"] = {{"seed", c.seed}};
  j["grid"] = c.grid;
  j["solver"] = {{"epsilon", c.solver.epsilon},
                 {"max_iters", c.solver.max_iters},
                 {"tolerance", c.solver.tolerance},
                 {"dealias", c.solver.dealias},
                 {"track_f_norm", c.solver.track_f_norm},
                 {"data", c.data.kind},
                 {"data_shell", c.data.shell},
                 {"data_norm", c.data.norm},
                 {"splitstep_steps", c.splitstep_steps},
                 {"snapshot_times", detail::join(c.snapshot_times)},
                 {"k_y", c.lab.k_y},
                 {"offset", c.lab.offset}};
  j["probe"] = {{"trials", c.probe.trials},
                {"seed", c.probe.seed},
                {"slope_threshold", c.probe.slope_threshold},
                {"grid", c.probe.grid},
                {"k_y", c.probe.lab.k_y},
                {"offset", c.probe.lab.offset}};
  j["directions"] = {{"delta", c.direction_delta}, {"shortlist", c.lab.shortlist}};
  j["gauge"] = {{"margin", c.gauge.margin}, {"amplitude", c.gauge.amplitude}, {"shell", c.gauge.shell}};
  return j;
}

}  // namespace smlab
