// smlab command-line front end: solve, probe, gauge, norms, report.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "smlab/atoms.hpp"
#include "smlab/config.hpp"
#include "smlab/evolution.hpp"
#include "smlab/gauge.hpp"
#include "smlab/io.hpp"
#include "smlab/norms.hpp"
#include "smlab/probes.hpp"

namespace fs = std::filesystem;
using namespace smlab;
using nlohmann::json;

namespace {

enum Exit { ok = 0, failure = 1, divergence = 2, bad_input = 3, verdict_fail = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "smlab_out";
};

RunConfig resolve(const Common& c) {
  RunConfig r = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.seed) r.seed = r.probe.seed = *c.seed;
  if (const char* w = std::getenv("SMLAB_WORKERS")) {
    try {
      r.probe.workers = std::max(1, std::stoi(w));
    } catch (const std::exception&) {
      throw Error(ErrorCode::config, std::string("SMLAB_WORKERS is not an integer: ") + w);
    }
  }
  return r;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class Run {
 public:
  Run(std::string command, const RunConfig& cfg, fs::path dir, GridSpec grid, std::uint64_t seed)
      : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    m_.command = std::move(command);
    m_.config = to_json(cfg);
    m_.grid = grid;
    m_.seed = seed;
    m_.started_at = utc_now();
  }
  fs::path path(const std::string& name) {
    m_.outputs.push_back(name);
    return dir_ / name;
  }
  int finish(int code) {
    m_.exit_code = code;
    m_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_manifest(dir_, m_);
    return code;
  }

 private:
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  RunManifest m_;
};

std::string num(double v) { return format_double(v); }

// ---- solve --------------------------------------------------------------------------

SpatialField initial_data(const RunConfig& c) {
  if (c.data.kind == "zero") return SpatialField::zeros(c.grid, Domain::fourier);
  if (c.data.kind == "packet") {
    // Gaussian of width 2^{-k} around the box centre, carrier 2^k along x_0
    const GridSpec& g = c.grid;
    SpatialField f = SpatialField::zeros(g);
    const double w = std::ldexp(1.0, -c.data.shell), mid = 0.5 * g.period(), xi0 = std::ldexp(1.0, c.data.shell);
    for (std::size_t s = 0; s < f.data.size(); ++s) {
      std::size_t r = s;
      double d2 = 0.0, x0 = 0.0;
      for (int a = g.dim - 1; a >= 0; --a) {
        const double x = static_cast<double>(r % g.n) * g.dx() - mid;
        r /= g.n;
        d2 += x * x;
        if (a == 0) x0 = x;
      }
      f.data[s] = std::exp(-0.5 * d2 / (w * w)) * std::polar(1.0, xi0 * x0);
    }
    f = two_thirds_project(to_fourier(f));
    return scaled(f, cplx(c.data.norm / besov_norm(f, 0.5 * g.dim).total));
  }
  AtomSpec a;
  a.kind = AtomKind::besov_shell;
  a.k = c.data.shell;
  a.sigma = 0.5 * c.grid.dim;
  a.target = c.data.norm;
  a.seed = derive_seed(c.seed, {hash_string("solve-data")});
  return make_atom(c.grid, a, c.lab).data;
}

void write_trace(const fs::path& p, const IterationTrace& tr) {
  std::ostringstream os;
  os << "iter,increment_l2,ratio,residual\n";
  for (std::size_t n = 0; n < tr.increment_l2.size(); ++n)
    os << n << ',' << num(tr.increment_l2[n]) << ',' << num(tr.ratio[n]) << ','
       << (n < tr.residual.size() ? num(tr.residual[n]) : std::string("nan")) << '\n';
  write_text(p, os.str());
}

json trace_json(const IterationTrace& tr) {
  return {{"iterations", tr.iterations},
          {"converged", tr.converged},
          {"integral_residual", tr.integral_residual},
          {"strong_residual", tr.strong_residual},
          {"data_norm", tr.data_norm},
          {"within_radius", tr.within_radius}};
}

int cmd_solve(const Common& common) {
  const RunConfig c = resolve(common);
  Run run("solve", c, common.out, c.grid, c.seed);
  const SpatialField phi = initial_data(c);
  write_field(run.path("phi.smlf"), phi);
  json summary;
  try {
    const auto res = picard_solve(phi, c.solver);
    write_trace(run.path("trace.csv"), res.trace);
    summary["picard"] = trace_json(res.trace);
    json snaps = json::array();
    for (double t : c.snapshot_times) {
      const auto p = time_index(res.u.grid, t);
      if (!p) {
        std::cerr << "snapshot time " << t << " is not on the time grid; skipped\n";
        continue;
      }
      const std::string name = "u_t" + num(t) + ".smlf";
      const SpatialField ut = time_slice(res.u, *p);
      write_field(run.path(name), ut, json{{"t", t}});
      json s{{"t", t}, {"file", name}};
      if (c.splitstep_steps > 0 && t > 0.0) {
        const int steps = std::max(1, static_cast<int>(std::lround(c.splitstep_steps * t)));
        const SpatialField ref = splitstep_solve(phi, t, steps);
        s["splitstep_steps"] = steps;
        s["splitstep_rel_l2"] = relative_l2_diff(ut.data, ref.data);
      }
      snaps.push_back(s);
    }
    summary["snapshots"] = snaps;
    write_json(run.path("solve.json"), summary);
    std::cout << "converged in " << res.trace.iterations << " iterations; integral residual "
              << res.trace.integral_residual << "\n";
    return run.finish(ok);
  } catch (const SolverDivergence& e) {
    write_trace(run.path("trace.csv"), e.trace());
    summary["picard"] = trace_json(e.trace());
    summary["error"] = e.what();
    write_json(run.path("solve.json"), summary);
    std::cerr << e.what() << "\n";
    return run.finish(divergence);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::range_violation) throw;
    summary["error"] = e.what();
    write_json(run.path("solve.json"), summary);
    std::cerr << e.what() << "\n";
    return run.finish(divergence);
  }
}

// ---- probe ----------------------------------------------------------------------------

int cmd_probe(const Common& common, const std::string& id, std::optional<int> trials) {
  RunConfig c = resolve(common);
  const EstimateRegistryEntry& entry = find_entry(id);
  if (trials) c.probe.trials = *trials;
  Run run("probe " + id, c, common.out, c.probe.grid, c.probe.seed);
  const auto rs = run_probe(entry, c.probe);
  const auto sum = summarize(entry.id, rs, c.probe.slope_threshold, entry.absolute_bound);
  std::ostringstream csv;
  write_csv_header(csv);
  write_csv_rows(csv, rs);
  write_text(run.path("probe_" + id + ".csv"), csv.str());
  json j = summary_json(sum);
  j["anchor"] = entry.anchor;
  j["lhs"] = entry.lhs_recipe;
  j["rhs"] = entry.rhs_recipe;
  write_json(run.path("probe_" + id + ".json"), j);

  std::cout << std::left << std::setw(12) << "id" << std::setw(10) << "variant" << std::setw(14) << "max_ratio"
            << std::setw(40) << "slopes" << "verdict\n";
  for (const auto& [name, v] : sum.variants) {
    std::ostringstream sl;
    for (const auto& [p, s] : v.slopes) sl << p << '=' << std::setprecision(3) << s << ' ';
    std::cout << std::setw(12) << id << std::setw(10) << name << std::setw(14) << std::setprecision(6) << v.max_ratio
              << std::setw(40) << sl.str() << (v.in_verdict ? (v.pass ? "PASS" : "FAIL") : "(info)") << "\n";
  }
  std::cout << id << ": " << (sum.pass ? "PASS" : "FAIL") << "\n";
  return run.finish(sum.pass ? ok : verdict_fail);
}

// ---- gauge ------------------------------------------------------------------------------

int cmd_gauge(const Common& common, const std::string& sphere_path) {
  const RunConfig c = resolve(common);
  Run run("gauge", c, common.out, c.grid, c.seed);
  json j;
  auto roundtrip = [&](const SphereField& s) {
    const GaugePair p = make_gauge_pair(s, c.gauge.margin);
    return json{{"unit_defect", max_unit_defect(s)},
                {"lift_unit_defect", max_unit_defect(stereo_lift(p.u))},
                {"roundtrip_sup", p.consistency},
                {"sup_g", sup_norm(p.u.data)}};
  };
  if (!sphere_path.empty()) {
    j["input"] = roundtrip(as_sphere(read_field(sphere_path)));
  } else {
    j["constant_Q"] = roundtrip(SphereField::constant(c.grid, {0.0, 0.0, 1.0}));
    AtomSpec a;
    a.kind = AtomKind::besov_shell;
    a.k = c.gauge.shell;
    a.seed = derive_seed(c.seed, {hash_string("gauge")});
    SpatialField g = to_physical(make_atom(c.grid, a, c.lab).data);
    g = scaled(g, cplx(c.gauge.amplitude / sup_norm(g.data)));
    const SphereField s = stereo_lift(g);
    write_field(run.path("sphere.smlf"), s);
    const SpatialField back = stereo_project(s, c.gauge.margin);
    j["random"] = {{"sup_g", sup_norm(g.data)},
                   {"lift_unit_defect", max_unit_defect(s)},
                   {"project_lift_sup", sup_norm(linear_combination(cplx(1.0), back, cplx(-1.0), g).data)},
                   {"lift_project_lift_sup", sphere_sup_diff(stereo_lift(back), s)}};
  }
  write_json(run.path("gauge.json"), j);
  std::cout << j.dump(2) << "\n";
  return run.finish(ok);
}

// ---- norms --------------------------------------------------------------------------------

int cmd_norms(const Common& common, const std::string& field_path, const std::string& norm, double sigma, int k) {
  const RunConfig c = resolve(common);
  const FieldFile file = read_field(field_path);
  json j{{"field", field_path}, {"norm", norm}};
  if (norm == "besov") {
    const SpatialField f = as_spatial(file);
    const double s = sigma > 0.0 ? sigma : 0.5 * f.grid.dim;
    require(s >= 0.5 * f.grid.dim, ErrorCode::config, "besov: sigma must be at least d/2");
    const auto r = besov_norm(f, s);
    j["sigma"] = s;
    j["value"] = r.total;
    json ps;
    for (const auto& [kk, v] : r.per_shell) ps[std::to_string(kk)] = v;
    j["per_shell"] = ps;
    j["outside_mass"] = r.outside_mass;
  } else if (norm == "xk" || norm == "zk") {
    const SpaceTimeField f = to_fourier(as_spacetime(file));
    j["k"] = k;
    if (norm == "xk") {
      const auto r = xk_norm(f, k);
      j["value"] = r.value;
      j["terms"] = r.terms;
    } else {
      const auto r = zk_norm_upper(f, k, c.lab);
      j["value"] = r.value;
      j["x_part"] = r.x_part;
      j["y_part"] = r.y_part;
      j["pure_x"] = r.choice.pure_x;
    }
  } else if (norm == "fsigma" || norm == "nsigma") {
    const SpaceTimeField f = to_fourier(as_spacetime(file));
    const double s = sigma > 0.0 ? sigma : 0.5 * f.grid.dim;
    require(s >= 0.5 * f.grid.dim, ErrorCode::config, norm + ": sigma must be at least d/2");
    const auto r = norm == "fsigma" ? fsigma_norm(f, s, c.lab) : nsigma_norm(f, s, c.lab);
    j["sigma"] = s;
    j["value"] = r.total;
    json ps;
    for (const auto& [kk, v] : r.per_shell) ps[std::to_string(kk)] = v;
    j["per_shell"] = ps;
  } else if (norm == "l2") {
    j["value"] = file.kind == "spacetime" ? l2_norm(as_spacetime(file)) : l2_norm(as_spatial(file));
  } else {
    throw Error(ErrorCode::config, "unknown norm '" + norm + "' (besov, xk, zk, fsigma, nsigma, l2)");
  }
  std::cout << j.dump(2) << "\n";
  return ok;
}

// ---- report ----------------------------------------------------------------------------------

int cmd_report(const Common& common) {
  const fs::path root = common.out;
  require(fs::is_directory(root), ErrorCode::config, "report: no such directory " + root.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::ostringstream table;
  table << "estimate_id,max_ratio,regression_slope,n_trials,verdict\n";
  int manifests = 0, problems = 0;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    if (name == "manifest.json") {
      ++manifests;
      for (const auto& p : validate_manifest(read_json(f), f.parent_path())) {
        std::cerr << f.string() << ": " << p << "\n";
        ++problems;
      }
    } else if (name.rfind("probe_", 0) == 0 && f.extension() == ".json") {
      const json j = read_json(f);
      table << j.at("estimate_id").get<std::string>() << ',' << num(j.at("max_ratio").get<double>()) << ','
            << num(j.at("regression_slope").get<double>()) << ',' << j.at("n_trials").get<int>() << ','
            << j.at("verdict").get<std::string>() << '\n';
    }
  }
  write_text(root / "report.csv", table.str());
  std::cout << table.str() << manifests << " manifest(s), " << problems << " problem(s)\n";
  return problems == 0 ? ok : bad_input;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral lab for small-data Schroedinger maps"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "run seed (overrides the config)");
    sub->add_option("--out", common.out, "output directory");
  };

  auto* solve = app.add_subcommand("solve", "Picard solve with split-step cross-check");
  add_common(solve);

  std::string id;
  std::optional<int> trials;
  auto* probe = app.add_subcommand("probe", "run one estimate probe sweep");
  probe->add_option("id", id, "estimate id")->required();
  probe->add_option("--trials", trials, "trials per parameter point");
  add_common(probe);

  std::string sphere_path;
  auto* gauge = app.add_subcommand("gauge", "stereographic gauge round trips");
  gauge->add_option("--field", sphere_path, "sphere field container")->check(CLI::ExistingFile);
  add_common(gauge);

  std::string field_path, norm;
  double sigma = 0.0;
  int k = 0;
  auto* norms = app.add_subcommand("norms", "evaluate a norm of a stored field");
  norms->add_option("field", field_path, "field container")->required()->check(CLI::ExistingFile);
  norms->add_option("norm", norm, "besov | xk | zk | fsigma | nsigma | l2")->required();
  norms->add_option("--sigma", sigma, "regularity (default d/2)");
  norms->add_option("--k", k, "dyadic shell for xk / zk");
  add_common(norms);

  auto* report = app.add_subcommand("report", "summarize probe results and validate manifests under --out");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : bad_input;
  }

  try {
    if (*solve) return cmd_solve(common);
    if (*probe) return cmd_probe(common, id, trials);
    if (*gauge) return cmd_gauge(common, sphere_path);
    if (*norms) return cmd_norms(common, field_path, norm, sigma, k);
    if (*report) return cmd_report(common);
  } catch (const Error& e) {
    std::cerr << "smlab: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::config:
      case ErrorCode::io:
      case ErrorCode::invalid_argument:
      case ErrorCode::pole_margin:
        return bad_input;
      case ErrorCode::divergence:
      case ErrorCode::range_violation:
        return divergence;
      default:
        return failure;
    }
  } catch (const std::exception& e) {
    std::cerr << "smlab: " << e.what() << "\n";
    return failure;
  }
  return failure;
}
