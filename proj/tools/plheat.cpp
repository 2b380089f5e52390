#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "criteria.hpp"
#include "plheat/experiments.hpp"

using namespace plheat;

namespace {

enum Exit { kOk = 0, kInvariant = 1, kBadConfig = 2 };

ExperimentKind experiment_arg(const std::string& name) {
  const auto kind = parse_experiment(name);
  if (!kind) throw ConfigError("unknown experiment '" + name + "'");
  return *kind;
}

ExperimentConfig config_for(const std::string& experiment, const std::string& path) {
  const ExperimentKind kind = experiment_arg(experiment);
  if (path.empty()) return default_config(kind);
  return load_config(path, kind);
}

Abscissa abscissa_arg(const std::string& s) {
  if (s == "ndof") return Abscissa::ndof;
  if (s == "h") return Abscissa::h;
  if (s == "tau") return Abscissa::tau;
  throw ConfigError("--against must be ndof, h or tau");
}

void print_eoc(std::FILE* out, const std::vector<ErrorReport>& reports, const std::string& field, Abscissa against) {
  const OrderReport r = empirical_order(reports, field, against);
  std::fprintf(out, "%-8s %-4s %-10s %-24s %s\n", "ndof", "M", "tau", field.c_str(), "slope");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::fprintf(out, "%-8zu %-4d %-10.4g %-24.17g ", reports[i].ndof, reports[i].M, reports[i].tau,
                 field_value(reports[i], field));
    if (i == 0) std::fprintf(out, "-\n");
    else std::fprintf(out, "%.4f\n", r.slopes[i - 1]);
  }
  std::fprintf(out, "least-squares slope %.4f\n", r.ls_slope);
  if (reports.size() > 3) {
    const std::vector<ErrorReport> tail(reports.end() - 3, reports.end());
    std::fprintf(out, "last-3 slope %.4f\n", empirical_order(tail, field, against).ls_slope);
  }
}

int cmd_run(const std::string& experiment, const std::string& config_path, const std::string& output) {
  ExperimentConfig c = config_for(experiment, config_path);
  if (!output.empty()) c.output = output;
  if (c.output.empty()) c.output = std::string(to_string(c.experiment)) + ".csv";
  const StudyResult result = run_study(c, &std::cerr);
  write_outputs(c, result);
  std::fprintf(stderr, "wrote %s\n", c.output.string().c_str());
  const Abscissa a = Abscissa::ndof;
  for (const char* field : {"sqVerr", "sqLinftyError", "sqAerr"}) {
    try {
      print_eoc(stderr, result.reports, field, a);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s: no EOC (%s)\n", field, e.what());
    }
  }
  return kOk;
}

int cmd_eoc(const std::string& csv, const std::string& field, const std::string& against) {
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot read " + csv);
  print_eoc(stdout, read_csv(in), field, abscissa_arg(against));
  return kOk;
}

int cmd_verify(bool all) {
  const int last = all ? criteria::kCount : criteria::kPropertySuites;
  int failed = 0;
  for (int id = 1; id <= last; ++id) {
    const criteria::Outcome o = criteria::run(id);
    std::printf("%s\n", criteria::format(o).c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? kOk : kInvariant;
}

int cmd_dump_mesh(const std::string& domain_name, int level, const std::string& output) {
  const auto domain = parse_domain(domain_name);
  if (!domain) throw ConfigError("unknown domain '" + domain_name + "'");
  if (level < 0) throw ConfigError("level must be non-negative");
  const MeshPtr mesh = make_mesh(*domain, level);
  if (output.empty()) {
    write_mesh(std::cout, *mesh);
    return kOk;
  }
  std::ofstream out(output);
  if (!out) throw Error("cannot write " + output);
  write_mesh(out, *mesh);
  return kOk;
}

int cmd_dump_solution(const std::string& experiment, const std::string& config_path, int level, int steps,
                      const std::string& dir) {
  const ExperimentConfig c = config_for(experiment, config_path);
  if (level < 0) throw ConfigError("level must be non-negative");
  if (steps < 1) throw ConfigError("steps must be positive");
  const TimeGrid grid(c.t0, c.t_end, steps);
  StepOptions options;
  options.tol = c.tol;
  const FeSpacePtr space = build_space(make_mesh(experiment_domain(c), level), c.degree);
  const Trajectory tr = solve_evolution(problem_spec(c), space, grid, options);
  write_checkpoint(dir, tr);
  std::fprintf(stderr, "wrote %d snapshots (ndof %zu) to %s\n", steps + 1, space->ndof(), dir.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parabolic p-Laplace solver and convergence studies"};
  app.require_subcommand(1);

  std::string experiment, config, output, csv, field, against = "ndof", domain, dir = "solution";
  int level = 3, steps = 8;
  bool all = false;

  auto* run = app.add_subcommand("run", "run a convergence study and write CSV plus manifest");
  run->add_option("experiment", experiment, "slit_constant_force | rough_in_time | known_solution | p2_validation | custom")
      ->required();
  run->add_option("--config", config, "key = value file; defaults when omitted");
  run->add_option("--output", output, "CSV path, overrides the config");

  auto* eoc = app.add_subcommand("eoc", "empirical orders of one CSV column");
  eoc->add_option("csv", csv)->required();
  eoc->add_option("--field", field, "column name or sum such as sqLinftyError+sqVerr1")->required();
  eoc->add_option("--against", against, "ndof | h | tau");

  auto* verify = app.add_subcommand("verify", "property suites (criteria 1-5)");
  verify->add_flag("--all", all, "also run the convergence criteria 6-10");

  auto* dump_mesh = app.add_subcommand("dump-mesh", "write a refined mesh as text");
  dump_mesh->add_option("--domain", domain)->required();
  dump_mesh->add_option("--level", level);
  dump_mesh->add_option("--output", output, "file; stdout when omitted");

  auto* dump_solution = app.add_subcommand("dump-solution", "solve one (level, M) run and write all snapshots");
  dump_solution->add_option("experiment", experiment)->required();
  dump_solution->add_option("--config", config);
  dump_solution->add_option("--level", level);
  dump_solution->add_option("--steps", steps);
  dump_solution->add_option("--dir", dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    if (*run) return cmd_run(experiment, config, output);
    if (*eoc) return cmd_eoc(csv, field, against);
    if (*verify) return cmd_verify(all);
    if (*dump_mesh) return cmd_dump_mesh(domain, level, output);
    if (*dump_solution) return cmd_dump_solution(experiment, config, level, steps, dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "plheat: %s\n", e.what());
    return kBadConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "plheat: %s\n", e.what());
    return kInvariant;
  }
  return kOk;
}
