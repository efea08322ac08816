#include "ness/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <vector>

#include "ness/analysis.hpp"
#include "ness/collision.hpp"
#include "ness/divisibility.hpp"
#include "ness/errors.hpp"
#include "ness/generators.hpp"
#include "ness/observables.hpp"

namespace ness::cli {

namespace {

using nlohmann::json;

enum class Format { csv, json };

struct Common {
  std::string format = "csv";
  std::string out_path;
  int threads = -1;
  std::uint64_t seed = 1;

  Format fmt() const { return format == "json" ? Format::json : Format::csv; }
  // --threads wins when given (0 = auto); otherwise NESS_LAB_THREADS, then auto.
  int thread_request() const { return threads > 0 ? threads : 0; }
};

struct ModelFlags {
  ModelParams m;
};

void add_model_flags(CLI::App* app, ModelFlags& f, bool couplings = true) {
  app->add_option("--z1", f.m.z1, "temperature parameter of bath 1, in [-1, 1]");
  app->add_option("--z2", f.m.z2, "temperature parameter of bath 2, in [-1, 1]");
  app->add_option("--p", f.m.p, "memory probability, in [0, 1]");
  if (!couplings) return;
  app->add_option("--g1", f.m.gamma1, "system-bath coupling ratio Gamma1/Omega");
  app->add_option("--g2", f.m.gamma2, "system-bath coupling ratio Gamma2/Omega");
  app->add_option("--u1", f.m.upsilon1, "memory-system coupling ratio Upsilon1/Omega");
  app->add_option("--u2", f.m.upsilon2, "memory-system coupling ratio Upsilon2/Omega");
  app->add_option("--omega", f.m.omega, "level splitting (only fixes energy units)");
  app->add_option("--Omega", f.m.Omega, "inner coupling (only fixes time units)");
}

void add_common_flags(CLI::App* app, Common& c) {
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--out", c.out_path, "output file (default: stdout)");
  app->add_option("--threads", c.threads, "worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
  app->add_option("--seed", c.seed, "64-bit seed of the mt19937_64 generator");
}

// Output sink: the named file, or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw ParameterError("cannot open output file " + path);
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot open output file " + path);
  f << j.dump(2) << '\n';
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string line;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) line += ',';
    line += c;
    first = false;
  }
  return line + '\n';
}

std::string d(double v) { return format_double(v); }

json params_json(const ModelParams& m) {
  return json{{"z1", m.z1}, {"z2", m.z2}, {"g1", m.gamma1}, {"g2", m.gamma2},  {"u1", m.upsilon1},
              {"u2", m.upsilon2}, {"p", m.p}, {"omega", m.omega}, {"Omega", m.Omega}};
}

// Couplings are ratios to Omega, so a physical Omega only rescales time.
void cmd_steady(const Common& c, const ModelFlags& f, std::ostream& out) {
  f.m.validate();
  const auto gen = f.m.p > 0.0 ? build_memory_generator(f.m) : build_memoryless_generator(f.m);
  const auto rep = steady_state(gen);
  const CMatrix& rho = rep.rho_system.matrix();
  Sink sink(c.out_path, out);
  auto& os = sink.stream();
  if (c.fmt() == Format::json) {
    json re = json::array(), im = json::array();
    for (int i = 0; i < 4; ++i) {
      json rr = json::array(), ii = json::array();
      for (int j = 0; j < 4; ++j) {
        rr.push_back(rho(i, j).real());
        ii.push_back(rho(i, j).imag());
      }
      re.push_back(rr);
      im.push_back(ii);
    }
    const json j{{"params", params_json(f.m)},     {"concurrence", rep.concurrence}, {"q_dot", rep.q_dot},
                 {"q_dot_bath2", rep.q_dot_bath2}, {"s1", rep.s1},                   {"s2", rep.s2},
                 {"residual", rep.residual},       {"rho_re", re},                   {"rho_im", im}};
    os << j.dump(2) << '\n';
    return;
  }
  std::string header = "z1,z2,g1,g2,u1,u2,p,concurrence,q_dot,q_dot_bath2,s1,s2,residual";
  std::string row = csv_row({d(f.m.z1), d(f.m.z2), d(f.m.gamma1), d(f.m.gamma2), d(f.m.upsilon1), d(f.m.upsilon2),
                             d(f.m.p), d(rep.concurrence), d(rep.q_dot), d(rep.q_dot_bath2), d(rep.s1), d(rep.s2),
                             d(rep.residual)});
  row.pop_back();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      header += ",rho_re_" + std::to_string(i) + std::to_string(j) + ",rho_im_" + std::to_string(i) + std::to_string(j);
      row += "," + d(rho(i, j).real()) + "," + d(rho(i, j).imag());
    }
  os << header << '\n' << row << '\n';
}

struct MapFlags {
  double p = 0.0;
  int grid_n = 41;
  int starts = 20;
  int budget = 2000;
};

SearchOptions search_options(const Common& c, const MapFlags& f) {
  SearchOptions s;
  s.seed = c.seed;
  s.random_starts = f.starts;
  s.budget_per_start = f.budget;
  return s;
}

void check_map_flags(const MapFlags& f) {
  if (f.grid_n < 5) throw ParameterError("--grid-n must be >= 5");
  if (f.starts < 20) throw ParameterError("--starts must be >= 20");
  ModelParams m;
  m.p = f.p;
  m.validate();
}

void cmd_cmax_map(const Common& c, const MapFlags& f, std::ostream& out) {
  check_map_flags(f);
  const auto z = z_axis(f.grid_n);
  const auto rows = cmax_map(f.p, z, z, search_options(c, f), c.thread_request());
  Sink sink(c.out_path, out);
  auto& os = sink.stream();
  if (c.fmt() == Format::json) {
    json arr = json::array();
    for (const auto& r : rows) {
      const auto& b = r.result.best_params;
      arr.push_back(json{{"z1", r.z1},
                         {"z2", r.z2},
                         {"c_max", r.result.c_max},
                         {"g1", b.gamma1},
                         {"g2", b.gamma2},
                         {"u1", b.upsilon1},
                         {"u2", b.upsilon2},
                         {"q_dot", r.result.q_dot_at_best},
                         {"n_evaluations", r.result.n_evaluations},
                         {"converged", r.result.converged}});
    }
    os << json{{"p", f.p}, {"seed", c.seed}, {"rows", arr}}.dump(2) << '\n';
    return;
  }
  os << "z1,z2,c_max,g1,g2,u1,u2,q_dot,n_evaluations,converged\n";
  for (const auto& r : rows) {
    const auto& b = r.result.best_params;
    os << csv_row({d(r.z1), d(r.z2), d(r.result.c_max), d(b.gamma1), d(b.gamma2), d(b.upsilon1), d(b.upsilon2),
                   d(r.result.q_dot_at_best), std::to_string(r.result.n_evaluations),
                   r.result.converged ? "1" : "0"});
  }
}

struct RegionFlags {
  double z1 = 0.0, z2 = -1.0, p = 0.0;
  int samples = 10000;
  int bins = 200;
  std::string hull_path;
};

json hull_json(const RegionSample& r) {
  auto nullable = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isnan(x) ? json(nullptr) : json(x));
    return a;
  };
  json centers = json::array();
  for (int k = 0; k < r.bins(); ++k) centers.push_back((k + 0.5) * r.bin_width());
  const auto over = detect_overhang(r);
  return json{{"z1", r.z1},
              {"z2", r.z2},
              {"p", r.p},
              {"q_hi", r.q_hi},
              {"bin_width", r.bin_width()},
              {"epsilon", r.epsilon},
              {"q_center", centers},
              {"hull_upper", nullable(r.hull_upper)},
              {"hull_lower", nullable(r.hull_lower)},
              {"overhang", over ? json::array({over->lo, over->hi}) : json::array()}};
}

void cmd_cq_region(const Common& c, const RegionFlags& f, std::ostream& out) {
  RegionOptions o;
  o.n_samples = f.samples;
  o.bins = f.bins;
  o.seed = c.seed;
  o.threads = c.thread_request();
  const auto region = sample_cq_region(f.z1, f.z2, f.p, o);
  Sink sink(c.out_path, out);
  auto& os = sink.stream();
  if (c.fmt() == Format::json) {
    json pts = json::array();
    for (const auto& pt : region.points)
      pts.push_back(json::array({pt.q_abs, pt.concurrence, pt.params.gamma1, pt.params.gamma2, pt.params.upsilon1,
                                 pt.params.upsilon2}));
    os << json{{"columns", {"q_abs", "c", "g1", "g2", "u1", "u2"}}, {"points", pts}, {"hull", hull_json(region)}}.dump(2)
       << '\n';
    return;
  }
  os << "q_abs,c,g1,g2,u1,u2\n";
  for (const auto& pt : region.points)
    os << csv_row({d(pt.q_abs), d(pt.concurrence), d(pt.params.gamma1), d(pt.params.gamma2), d(pt.params.upsilon1),
                   d(pt.params.upsilon2)});
  std::string hull_path = f.hull_path;
  if (hull_path.empty() && !c.out_path.empty() && c.out_path != "-") hull_path = c.out_path + ".hull.json";
  if (!hull_path.empty()) write_json_file(hull_path, hull_json(region));
}

struct DivFlags {
  ModelFlags model;
  bool use_cmax = false;
  double tmax = 0.0;
  int grid = 1000;
  int max_grid = 16000;
  std::string summary_path;
};

int cmd_divisibility(const Common& c, DivFlags& f, std::ostream& out, std::ostream& err) {
  ModelParams m = f.model.m;
  m.validate();
  if (f.use_cmax) {
    SearchOptions s;
    s.seed = c.seed;
    m = maximize_concurrence(m.z1, m.z2, m.p, s).best_params;
  }
  DivisibilityOptions o;
  o.t_max = f.tmax;
  o.n_grid = f.grid;
  o.max_grid = f.max_grid;
  const auto rep = non_divisibility(m, o);
  const json summary{{"params", params_json(m)},     {"n_measure", rep.n_measure}, {"n_significant", rep.n_significant},
                     {"t_max", rep.t_max},           {"t_end", rep.t_end},         {"n_grid", rep.n_grid},
                     {"max_step_change", rep.max_step_change}, {"converged", rep.converged}};
  Sink sink(c.out_path, out);
  auto& os = sink.stream();
  if (c.fmt() == Format::json) {
    json j = summary;
    j["t"] = rep.t_grid;
    j["det_abs"] = rep.det_abs;
    os << j.dump(2) << '\n';
  } else {
    os << "t,det_abs\n";
    for (std::size_t k = 0; k < rep.t_grid.size(); ++k) os << csv_row({d(rep.t_grid[k]), d(rep.det_abs[k])});
    std::string path = f.summary_path;
    if (path.empty() && !c.out_path.empty() && c.out_path != "-") path = c.out_path + ".summary.json";
    if (!path.empty())
      write_json_file(path, summary);
    else
      err << "n_measure=" << d(rep.n_measure) << " converged=" << (rep.converged ? 1 : 0) << '\n';
  }
  if (!rep.converged) {
    err << "divisibility: grid refinement did not converge within " << o.max_grid << " cells\n";
    return exit_numerical;
  }
  return exit_ok;
}

void cmd_divisibility_map(const Common& c, const MapFlags& f, std::ostream& out) {
  check_map_flags(f);
  const auto z = z_axis(f.grid_n);
  const auto rows = divisibility_map(f.p, z, z, search_options(c, f), {}, c.thread_request());
  Sink sink(c.out_path, out);
  auto& os = sink.stream();
  if (c.fmt() == Format::json) {
    json arr = json::array();
    for (const auto& r : rows) {
      const auto& b = r.cmax.best_params;
      arr.push_back(json{{"z1", r.z1},
                         {"z2", r.z2},
                         {"c_max", r.cmax.c_max},
                         {"n_measure", r.evaluated ? json(r.n_measure) : json(nullptr)},
                         {"n_significant", r.evaluated ? json(r.n_significant) : json(nullptr)},
                         {"g1", b.gamma1},
                         {"g2", b.gamma2},
                         {"u1", b.upsilon1},
                         {"u2", b.upsilon2},
                         {"converged", r.converged}});
    }
    os << json{{"p", f.p}, {"seed", c.seed}, {"rows", arr}}.dump(2) << '\n';
    return;
  }
  os << "z1,z2,c_max,n_measure,n_significant,g1,g2,u1,u2,converged\n";
  for (const auto& r : rows) {
    const auto& b = r.cmax.best_params;
    os << csv_row({d(r.z1), d(r.z2), d(r.cmax.c_max), r.evaluated ? d(r.n_measure) : "nan",
                   r.evaluated ? d(r.n_significant) : "nan", d(b.gamma1), d(b.gamma2), d(b.upsilon1), d(b.upsilon2),
                   r.converged ? "1" : "0"});
  }
}

struct CollideFlags {
  ModelFlags model;
  double dt = 1e-3;
  long steps = 20000;
  long every = 1;
};

void cmd_collide(const Common& c, const CollideFlags& f, std::ostream& out) {
  const ModelParams& m = f.model.m;
  m.validate();
  if (!(f.dt > 0.0)) throw ParameterError("--dt must be > 0");
  if (f.steps < 1) throw ParameterError("--steps must be >= 1");
  if (f.every < 1) throw ParameterError("--every must be >= 1");
  const DensityMatrix sys(kron(thermal_qubit(m.z1).matrix(), thermal_qubit(m.z2).matrix()));
  const auto traj = simulate(with_thermal_memory(sys, m), m, f.dt, f.steps);
  Sink sink(c.out_path, out);
  auto& os = sink.stream();
  auto keep = [&](const TrajectoryPoint& pt) { return pt.step % f.every == 0 || pt.step == f.steps; };
  if (c.fmt() == Format::json) {
    json rows = json::array();
    for (const auto& pt : traj.points)
      if (keep(pt)) rows.push_back(json::array({pt.step, pt.t, pt.concurrence, pt.dE1, pt.dE2, pt.cumulative_q1}));
    os << json{{"params", params_json(m)},
               {"dt", f.dt},
               {"columns", {"step", "t", "C", "dE1", "dE2", "Q1"}},
               {"rows", rows}}
              .dump(2)
       << '\n';
    return;
  }
  os << "step,t,C,dE1,dE2,Q1\n";
  for (const auto& pt : traj.points)
    if (keep(pt))
      os << csv_row({std::to_string(pt.step), d(pt.t), d(pt.concurrence), d(pt.dE1), d(pt.dE2), d(pt.cumulative_q1)});
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ness_lab: steady-state entanglement and heat transport in a two-qubit collision model"};
  app.require_subcommand(1);
  Common common;

  ModelFlags steady_flags;
  auto* steady = app.add_subcommand("steady", "steady state, concurrence and heat current");
  add_model_flags(steady, steady_flags);
  add_common_flags(steady, common);

  MapFlags map_flags;
  auto* cmax = app.add_subcommand("cmax-map", "maximal concurrence over couplings on a (z1, z2) grid");
  cmax->add_option("--p", map_flags.p, "memory probability");
  cmax->add_option("--grid-n", map_flags.grid_n, "points per axis");
  cmax->add_option("--starts", map_flags.starts, "random starts per grid point (>= 20)");
  cmax->add_option("--budget", map_flags.budget, "objective evaluations per start");
  add_common_flags(cmax, common);

  RegionFlags region_flags;
  auto* region = app.add_subcommand("cq-region", "sampled (|Q|, C) region with hulls and overhang");
  region->add_option("--z1", region_flags.z1);
  region->add_option("--z2", region_flags.z2);
  region->add_option("--p", region_flags.p);
  region->add_option("--samples", region_flags.samples, "random coupling samples (>= 1000)");
  region->add_option("--bins", region_flags.bins, "hull bins over |Q|");
  region->add_option("--hull", region_flags.hull_path, "hull JSON path (default: <out>.hull.json)");
  add_common_flags(region, common);

  DivFlags div_flags;
  auto* div = app.add_subcommand("divisibility", "|det F(t)| trajectory and non-divisibility measure");
  add_model_flags(div, div_flags.model);
  div->add_flag("--use-cmax-params", div_flags.use_cmax, "replace couplings by the C_max optimum");
  div->add_option("--tmax", div_flags.tmax, "time horizon (default: rate heuristic)");
  div->add_option("--grid", div_flags.grid, "initial grid cells (>= 1000)");
  div->add_option("--max-grid", div_flags.max_grid, "refinement cap");
  div->add_option("--summary", div_flags.summary_path, "summary JSON path (default: <out>.summary.json)");
  add_common_flags(div, common);

  MapFlags dmap_flags;
  auto* dmap = app.add_subcommand("divisibility-map", "C_max and non-divisibility on a (z1, z2) grid");
  dmap->add_option("--p", dmap_flags.p, "memory probability");
  dmap->add_option("--grid-n", dmap_flags.grid_n, "points per axis");
  dmap->add_option("--starts", dmap_flags.starts, "random starts per grid point (>= 20)");
  dmap->add_option("--budget", dmap_flags.budget, "objective evaluations per start");
  add_common_flags(dmap, common);

  CollideFlags collide_flags;
  auto* collide = app.add_subcommand("collide", "discrete collision-model trajectory");
  add_model_flags(collide, collide_flags.model);
  collide->add_option("--dt", collide_flags.dt, "collision duration in units of 1/Omega");
  collide->add_option("--steps", collide_flags.steps, "number of collisions");
  collide->add_option("--every", collide_flags.every, "write every n-th step");
  add_common_flags(collide, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (*steady) cmd_steady(common, steady_flags, out);
    if (*cmax) cmd_cmax_map(common, map_flags, out);
    if (*region) cmd_cq_region(common, region_flags, out);
    if (*div) return cmd_divisibility(common, div_flags, out, err);
    if (*dmap) cmd_divisibility_map(common, dmap_flags, out);
    if (*collide) cmd_collide(common, collide_flags, out);
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const NonUniqueSteadyStateError& e) {
    err << "non-unique steady state: " << e.what() << '\n';
    return exit_numerical;
  } catch (const NumericalRangeError& e) {
    err << "numerical range error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_ok;
}

}  // namespace ness::cli
