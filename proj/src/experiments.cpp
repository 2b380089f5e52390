#include "plheat/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "plheat/errors.hpp"

namespace plheat {

namespace {

constexpr double kPi = std::numbers::pi;

struct KindName {
  ExperimentKind kind;
  std::string_view name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::slit, "slit_constant_force"},    {ExperimentKind::rough_in_time, "rough_in_time"},
    {ExperimentKind::known_solution, "known_solution"}, {ExperimentKind::p2_validation, "p2_validation"},
    {ExperimentKind::custom, "custom"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long to_int(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    std::istringstream words(item);
    std::string w;
    while (words >> w) out.push_back(static_cast<int>(to_int(key, w)));
  }
  if (out.empty()) throw ConfigError("'" + key + "' expects a list of integers");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string_view to_string(DomainVariant v) { return v == DomainVariant::omega1 ? "omega1" : "omega2"; }

std::function<double(Point)> radial(double e) {
  return [e](Point x) { return std::pow(std::hypot(x.x, x.y), e); };
}

// |x|^e x / |x|
std::function<Vec2(Point)> radial_vector(double e) {
  return [e](Point x) {
    const double r = std::hypot(x.x, x.y);
    const double c = std::pow(r, e - 1.0);
    return Vec2{c * x.x, c * x.y};
  };
}

double sinsin(Point x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); }

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
  if (name == "slit") return ExperimentKind::slit;
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  return std::nullopt;
}

bool ExperimentConfig::discrete_reference() const {
  return experiment == ExperimentKind::slit || experiment == ExperimentKind::rough_in_time ||
         experiment == ExperimentKind::custom;
}

void ExperimentConfig::validate() const {
  if (!(p > 1.0)) throw ConfigError("p must exceed 1");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be non-negative");
  if (experiment == ExperimentKind::rough_in_time && !(beta > 0.0 && beta < 1.0)) {
    throw ConfigError("beta must lie in (0, 1); the force is not integrable otherwise");
  }
  if (experiment == ExperimentKind::known_solution && kappa != 0.0) {
    throw ConfigError("known_solution has closed forms only for kappa = 0");
  }
  if (experiment == ExperimentKind::p2_validation && p != 2.0) throw ConfigError("p2_validation needs p = 2");
  if (degree < 1 || degree > 3) throw ConfigError("degree must be 1, 2 or 3");
  if (!(t_end > t0)) throw ConfigError("t_end must exceed t0");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (quad_degree < 1 || quad_degree > 20) throw ConfigError("quad_degree must lie in [1, 20]");
  if (levels.empty()) throw ConfigError("levels must not be empty");
  if (levels.size() != steps.size()) throw ConfigError("levels and steps must have the same length");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] > 10) throw ConfigError("mesh levels must lie in [0, 10]");
    if (steps[i] < 1) throw ConfigError("step counts must be positive");
  }
  if (!discrete_reference()) return;
  if (ref_degree < 1 || ref_degree > 3) throw ConfigError("reference_degree must be 1, 2 or 3");
  if (ref_level > 10) throw ConfigError("reference_level must not exceed 10");
  if (ref_steps < 1) throw ConfigError("reference_steps must be positive");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] >= ref_level) throw ConfigError("every compared level must lie below reference_level");
    if (ref_steps % steps[i] != 0) throw ConfigError("every compared M must divide reference_steps");
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::slit:
      c.levels = {2, 3, 4, 5};
      c.steps = {8, 16, 32, 64};
      c.ref_level = 6;
      c.ref_steps = 128;
      break;
    case ExperimentKind::rough_in_time:
      c.t0 = -0.1;
      c.t_end = 0.1;
      c.levels = {2, 3, 4, 5};
      c.steps = {4, 8, 16, 32};
      c.ref_level = 6;
      c.ref_steps = 64;
      break;
    case ExperimentKind::known_solution:
      c.t0 = -1.0;
      c.t_end = 1.0;
      c.levels = {1, 2, 3, 4, 5};
      c.steps = {4, 8, 16, 32, 64};
      break;
    case ExperimentKind::p2_validation:
      c.p = 2.0;
      c.levels = {2, 3, 4, 5};
      c.steps = {4, 16, 64, 256};
      break;
    case ExperimentKind::custom:
      c.domain = Domain::unit_square;
      c.force = 1.0;
      c.levels = {1, 2, 3};
      c.steps = {4, 8, 16};
      c.ref_level = 4;
      c.ref_steps = 32;
      break;
  }
  return c;
}

ExperimentConfig parse_config(std::istream& in, std::optional<ExperimentKind> kind) {
  std::map<std::string, std::pair<std::string, int>> pairs;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(n) + ": empty key or value");
    if (!pairs.try_emplace(key, value, n).second) throw ConfigError("line " + std::to_string(n) + ": repeated key '" + key + "'");
  }

  if (auto it = pairs.find("experiment"); it != pairs.end()) {
    const auto named = parse_experiment(it->second.first);
    if (!named) throw ConfigError("unknown experiment '" + it->second.first + "'");
    if (kind && *kind != *named) throw ConfigError("config is for experiment '" + it->second.first + "'");
    kind = named;
    pairs.erase(it);
  }
  if (!kind) throw ConfigError("no experiment given");
  ExperimentConfig c = default_config(*kind);

  bool steps_given = false;
  std::optional<int> m0;
  for (const auto& [key, entry] : pairs) {
    const std::string& v = entry.first;
    if (key == "p") {
      c.p = to_double(key, v);
    } else if (key == "kappa") {
      c.kappa = to_double(key, v);
    } else if (key == "beta") {
      c.beta = to_double(key, v);
    } else if (key == "domain") {
      if (c.experiment == ExperimentKind::known_solution) {
        if (v == "omega1") {
          c.variant = DomainVariant::omega1;
        } else if (v == "omega2") {
          c.variant = DomainVariant::omega2;
        } else {
          throw ConfigError("known_solution domain must be omega1 or omega2");
        }
      } else {
        const auto d = parse_domain(v);
        if (!d) throw ConfigError("unknown domain '" + v + "'");
        if (c.experiment != ExperimentKind::custom && *d != experiment_domain(c)) {
          throw ConfigError("experiment " + std::string(to_string(c.experiment)) + " runs on " +
                            std::string(to_string(experiment_domain(c))));
        }
        c.domain = *d;
      }
    } else if (key == "force") {
      c.force = to_double(key, v);
    } else if (key == "amplitude") {
      c.amplitude = to_double(key, v);
    } else if (key == "degree") {
      c.degree = static_cast<int>(to_int(key, v));
    } else if (key == "levels") {
      c.levels = to_int_list(key, v);
    } else if (key == "steps") {
      c.steps = to_int_list(key, v);
      steps_given = true;
    } else if (key == "m0") {
      m0 = static_cast<int>(to_int(key, v));
      if (*m0 < 1) throw ConfigError("m0 must be positive");
    } else if (key == "reference_level") {
      c.ref_level = static_cast<int>(to_int(key, v));
    } else if (key == "reference_steps") {
      c.ref_steps = static_cast<int>(to_int(key, v));
    } else if (key == "reference_degree") {
      c.ref_degree = static_cast<int>(to_int(key, v));
    } else if (key == "t0") {
      c.t0 = to_double(key, v);
    } else if (key == "t_end") {
      c.t_end = to_double(key, v);
    } else if (key == "force_mode") {
      if (v == "theta_average") {
        c.force_mode = ForceMode::theta_average;
      } else if (v == "point_value") {
        c.force_mode = ForceMode::point_value;
      } else {
        throw ConfigError("force_mode must be theta_average or point_value");
      }
    } else if (key == "tol") {
      c.tol = to_double(key, v);
    } else if (key == "quad_degree") {
      c.quad_degree = static_cast<int>(to_int(key, v));
    } else if (key == "seed") {
      const long s = to_int(key, v);
      if (s < 0) throw ConfigError("seed must be non-negative");
      c.seed = static_cast<unsigned>(s);
    } else if (key == "output") {
      c.output = v;
    } else if (key == "dat") {
      c.write_dat = to_bool(key, v);
    } else {
      throw ConfigError("line " + std::to_string(entry.second) + ": unknown key '" + key + "'");
    }
  }
  if (m0) {
    if (steps_given) throw ConfigError("give either steps or m0, not both");
    c.steps.clear();
    for (std::size_t i = 0; i < c.levels.size(); ++i) c.steps.push_back(*m0 << i);
  } else if (!steps_given && c.steps.size() != c.levels.size()) {
    throw ConfigError("levels changed without steps or m0");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in, kind);
}

Domain experiment_domain(const ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::slit:
      return Domain::slit;
    case ExperimentKind::rough_in_time:
    case ExperimentKind::p2_validation:
      return Domain::unit_square;
    case ExperimentKind::known_solution:
      return c.variant == DomainVariant::omega1 ? Domain::centered_square : Domain::shifted_square;
    case ExperimentKind::custom:
      return c.domain;
  }
  return c.domain;
}

ExactSolution known_solution(double p) {
  const double pp = p / (p - 1.0);
  ExactSolution e;
  e.u.terms.push_back({TimeFactor::power(pp, 0.5, false), radial(1.0 / pp)});
  e.grad.terms.push_back({TimeFactor::power(1.0, 0.5, false), radial_vector(-1.0 / p)});
  e.v.terms.push_back({TimeFactor::power(1.0, p / 4.0, false), radial_vector(-0.5)});
  e.s.terms.push_back({TimeFactor::power(1.0, (p - 1.0) / 2.0, false), radial_vector(-1.0 / pp)});
  return e;
}

ScalarField known_solution_force(double p) {
  const double pp = p / (p - 1.0);
  ScalarField f;
  f.terms.push_back({TimeFactor::power(pp / 2.0, -0.5, true), radial(1.0 / pp)});
  f.terms.push_back({TimeFactor::power(-1.0 / p, (p - 1.0) / 2.0, false), radial(-1.0 - 1.0 / pp)});
  return f;
}

ExactSolution exact_solution(const ExperimentConfig& c) {
  if (c.experiment == ExperimentKind::known_solution) return known_solution(c.p);
  if (c.experiment != ExperimentKind::p2_validation) throw std::invalid_argument("experiment has no closed-form solution");
  const double a = c.amplitude;
  const auto decay = TimeFactor::callable([](double t) { return std::exp(-t); });
  ExactSolution e;
  e.u.terms.push_back({decay, [a](Point x) { return a * sinsin(x); }});
  e.grad.terms.push_back({decay, [a](Point x) {
                            return Vec2{a * kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                                        a * kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
                          }});
  return e;
}

ProblemSpec problem_spec(const ExperimentConfig& c) {
  ProblemSpec spec;
  spec.params = {c.p, c.kappa};
  spec.force_mode = c.force_mode;
  switch (c.experiment) {
    case ExperimentKind::slit:
    case ExperimentKind::custom:
      spec.force = constant_force(c.force);
      break;
    case ExperimentKind::rough_in_time:
      spec.force = power_time_force(c.beta);
      break;
    case ExperimentKind::known_solution: {
      spec.force = known_solution_force(c.p);
      spec.exact = known_solution(c.p).u;
      spec.boundary = BoundaryMode::averaged_nodal;
      const ScalarField u = spec.exact;
      const double t0 = c.t0;
      spec.initial = [u, t0](Point x) { return u(x, t0); };
      break;
    }
    case ExperimentKind::p2_validation: {
      const double a = c.amplitude;
      const auto decay = TimeFactor::callable([](double t) { return std::exp(-t); });
      spec.force.terms.push_back({decay, [a](Point x) { return a * (2.0 * kPi * kPi - 1.0) * sinsin(x); }});
      const double t0 = c.t0;
      spec.initial = [a, t0](Point x) { return a * std::exp(-t0) * sinsin(x); };
      break;
    }
  }
  return spec;
}

StudyResult run_study(const ExperimentConfig& c, std::ostream* log) {
  using clock = std::chrono::steady_clock;
  c.validate();
  const ProblemSpec spec = problem_spec(c);
  const Domain domain = experiment_domain(c);
  int finest = c.discrete_reference() ? c.ref_level : 0;
  for (int l : c.levels) finest = std::max(finest, l);
  const std::vector<MeshPtr> hierarchy = make_hierarchy(domain, finest);
  StepOptions options;
  options.tol = c.tol;

  StudyResult result;
  std::vector<std::shared_ptr<const Trajectory>> runs;
  std::optional<ExactSolution> exact;
  if (!c.discrete_reference()) exact = exact_solution(c);

  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    const auto start = clock::now();
    const FeSpacePtr space = build_space(hierarchy[c.levels[i]], c.degree);
    auto traj = std::make_shared<Trajectory>(solve_evolution(spec, space, TimeGrid(c.t0, c.t_end, c.steps[i]), options));
    int iterations = 0;
    for (const NewtonReport& r : traj->reports) iterations += r.iterations;
    result.total_newton_iterations += iterations;
    if (exact) {
      result.reports.push_back(compute_errors(*traj, *exact, spec.params, {.quad_degree = c.quad_degree}));
    } else {
      runs.push_back(std::move(traj));
    }
    if (log) {
      *log << to_string(c.experiment) << ": level " << c.levels[i] << ", ndof " << space->ndof() << ", M "
           << c.steps[i] << ", " << iterations << " Newton iterations, "
           << std::chrono::duration<double>(clock::now() - start).count() << " s\n";
    }
  }
  if (!exact) {
    const auto start = clock::now();
    const FeSpacePtr ref_space = build_space(hierarchy[c.ref_level], c.ref_degree);
    const TimeGrid ref_grid(c.t0, c.t_end, c.ref_steps);
    DiscreteErrorAccumulator acc(ref_space, ref_grid, spec.params);
    for (auto& run : runs) acc.add(run);
    runs.clear();
    const Trajectory ref = solve_evolution(spec, ref_space, ref_grid, options, acc.observer(), false);
    for (const NewtonReport& r : ref.reports) result.total_newton_iterations += r.iterations;
    result.reports = acc.reports();
    result.ref_ndof = ref_space->ndof();
    if (log) {
      *log << to_string(c.experiment) << ": reference level " << c.ref_level << ", degree " << c.ref_degree
           << ", ndof " << ref_space->ndof() << ", M " << c.ref_steps << ", "
           << std::chrono::duration<double>(clock::now() - start).count() << " s\n";
    }
  }
  return result;
}

namespace {

std::vector<ErrorReport> run_kind(const ExperimentConfig& c, ExperimentKind kind) {
  if (c.experiment != kind) throw ConfigError("config is for experiment " + std::string(to_string(c.experiment)));
  return run_study(c).reports;
}

}  // namespace

std::vector<ErrorReport> run_slit(const ExperimentConfig& c) { return run_kind(c, ExperimentKind::slit); }
std::vector<ErrorReport> run_rough_in_time(const ExperimentConfig& c) {
  return run_kind(c, ExperimentKind::rough_in_time);
}
std::vector<ErrorReport> run_known_solution(const ExperimentConfig& c) {
  return run_kind(c, ExperimentKind::known_solution);
}
std::vector<ErrorReport> run_p2_validation(const ExperimentConfig& c) {
  return run_kind(c, ExperimentKind::p2_validation);
}

namespace {

void write_rows(std::ostream& out, const std::vector<ErrorReport>& reports, char sep) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out.unsetf(std::ios::floatfield);
  out.precision(17);
  for (const ErrorReport& r : reports) {
    out << r.ndof << sep << r.M << sep << r.h << sep << r.tau << sep << r.sq_l2_v << sep << r.sq_l2_v_avg << sep
        << r.sq_linfty_l2 << sep << r.lp_s_sum << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ErrorReport>& reports) {
  out << kCsvHeader << '\n';
  write_rows(out, reports, ',');
}

void write_dat(std::ostream& out, const std::vector<ErrorReport>& reports) {
  std::string header(kCsvHeader);
  for (char& ch : header) {
    if (ch == ',') ch = ' ';
  }
  out << "# " << header << '\n';
  write_rows(out, reports, ' ');
}

std::vector<ErrorReport> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) throw ConfigError("CSV header must be " + std::string(kCsvHeader));
  std::vector<ErrorReport> out;
  for (int n = 2; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 8) throw ConfigError("CSV line " + std::to_string(n) + ": expected 8 columns");
    ErrorReport r;
    const long ndof = to_int("ndof", cells[0]);
    const long steps = to_int("M", cells[1]);
    if (ndof < 0 || steps < 0) throw ConfigError("CSV line " + std::to_string(n) + ": negative count");
    r.ndof = static_cast<std::size_t>(ndof);
    r.M = static_cast<int>(steps);
    r.h = to_double("h", cells[2]);
    r.tau = to_double("tau", cells[3]);
    r.sq_l2_v = to_double("sqVerr", cells[4]);
    r.sq_l2_v_avg = to_double("sqVerr1", cells[5]);
    r.sq_linfty_l2 = to_double("sqLinftyError", cells[6]);
    r.lp_s_sum = to_double("sqAerr", cells[7]);
    out.push_back(r);
  }
  return out;
}

void write_manifest(std::ostream& out, const ExperimentConfig& c, const StudyResult& result) {
  const auto precision = out.precision();
  out.precision(17);
  const Domain domain = experiment_domain(c);
  out << "experiment = " << to_string(c.experiment) << '\n';
  out << "p = " << c.p << '\n';
  out << "p_conjugate = " << c.p / (c.p - 1.0) << '\n';
  out << "kappa = " << c.kappa << '\n';
  switch (c.experiment) {
    case ExperimentKind::rough_in_time:
      out << "beta = " << c.beta << '\n';
      out << "force = sgn(t) |t|^-beta\n";
      break;
    case ExperimentKind::known_solution:
      out << "domain_variant = " << to_string(c.variant) << '\n';
      out << "force = closed form of u = p' |t|^(1/2) |x|^(1/p')\n";
      break;
    case ExperimentKind::p2_validation:
      out << "amplitude = " << c.amplitude << '\n';
      out << "force = amplitude (2 pi^2 - 1) exp(-t) sin(pi x) sin(pi y)\n";
      break;
    default:
      out << "force = " << c.force << '\n';
  }
  out << "domain = " << to_string(domain) << '\n';
  out << "degree = " << c.degree << '\n';
  out << "interval = " << c.t0 << ' ' << c.t_end << '\n';
  out << "levels = " << join(c.levels) << '\n';
  out << "steps = " << join(c.steps) << '\n';
  std::vector<int> ndofs;
  for (const ErrorReport& r : result.reports) ndofs.push_back(static_cast<int>(r.ndof));
  out << "ndof = " << join(ndofs) << '\n';
  if (c.discrete_reference()) {
    out << "reference = discrete\n";
    out << "reference_level = " << c.ref_level << '\n';
    out << "reference_degree = " << c.ref_degree << '\n';
    out << "reference_steps = " << c.ref_steps << '\n';
    out << "reference_ndof = " << result.ref_ndof << '\n';
  } else {
    out << "reference = exact\n";
    out << "quad_degree = " << c.quad_degree << '\n';
  }
  out << "initial_datum = "
      << (c.discrete_reference() ? "zero" : "L2 projection of the exact solution at t0") << '\n';
  out << "boundary = "
      << (c.experiment == ExperimentKind::known_solution ? "window-averaged nodal values of the exact solution"
                                                         : "homogeneous")
      << '\n';
  out << "force_mode = " << (c.force_mode == ForceMode::theta_average ? "theta_average" : "point_value") << '\n';
  out << "newton_tol = " << c.tol << '\n';
  out << "newton_iterations = " << result.total_newton_iterations << '\n';
  out << "seed = " << c.seed << '\n';
  out.precision(precision);
}

void write_outputs(const ExperimentConfig& c, const StudyResult& result) {
  if (c.output.empty()) return;
  if (c.output.has_parent_path()) std::filesystem::create_directories(c.output.parent_path());
  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
  };
  {
    auto out = open(c.output);
    write_csv(out, result.reports);
  }
  {
    std::filesystem::path manifest = c.output;
    auto out = open(manifest.replace_extension(".manifest"));
    write_manifest(out, c, result);
  }
  if (c.write_dat) {
    std::filesystem::path dat = c.output;
    auto out = open(dat.replace_extension(".dat"));
    write_dat(out, result.reports);
  }
}

}  // namespace plheat
