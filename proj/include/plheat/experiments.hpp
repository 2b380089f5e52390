#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plheat/error_metrics.hpp"
#include "plheat/mesh.hpp"
#include "plheat/timestepper.hpp"

namespace plheat {

enum class ExperimentKind { slit, rough_in_time, known_solution, p2_validation, custom };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment(std::string_view name);

enum class DomainVariant { omega1, omega2 };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::slit;
  double p = 1.5;
  double kappa = 0.0;
  double beta = 0.5;                            // rough_in_time
  DomainVariant variant = DomainVariant::omega2;  // known_solution
  Domain domain = Domain::slit;                  // custom
  double force = 2.0;                            // slit, custom
  double amplitude = 1.0;                        // p2_validation
  int degree = 1;
  std::vector<int> levels;
  std::vector<int> steps;
  int ref_level = 0;
  int ref_steps = 0;
  int ref_degree = 2;
  double t0 = 0.0;
  double t_end = 1.0;
  ForceMode force_mode = ForceMode::theta_average;
  double tol = 1e-10;
  int quad_degree = 8;
  unsigned seed = 0;
  std::filesystem::path output;  // CSV; empty means no files
  bool write_dat = false;

  /// True when errors are measured against a discrete reference run.
  bool discrete_reference() const;
  /// Throws ConfigError when the schedule or parameters are inconsistent.
  void validate() const;
};

/// Defaults of each experiment: desk-scale schedules with M doubling per level.
ExperimentConfig default_config(ExperimentKind kind);

/// Flat `key = value` lines with `#` comments. The experiment comes from the
/// `experiment` key or from `kind`; both must agree when given. Unknown or
/// repeated keys, malformed values and invalid schedules throw ConfigError.
ExperimentConfig parse_config(std::istream& in, std::optional<ExperimentKind> kind = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> kind = std::nullopt);

/// Evolution problem of an experiment.
ProblemSpec problem_spec(const ExperimentConfig& config);
Domain experiment_domain(const ExperimentConfig& config);
/// Closed-form solution of known_solution and p2_validation.
ExactSolution exact_solution(const ExperimentConfig& config);

/// u(x, t) = p' |t|^(1/2) |x|^(1/p') with its force and derived fields (kappa = 0).
ExactSolution known_solution(double p);
ScalarField known_solution_force(double p);

struct StudyResult {
  std::vector<ErrorReport> reports;
  std::size_t ref_ndof = 0;  // 0 for exact references
  int total_newton_iterations = 0;
};

/// Runs every (level, M) pair of the schedule, then the reference if any, and
/// measures the errors. Progress lines go to `log` when given.
StudyResult run_study(const ExperimentConfig& config, std::ostream* log = nullptr);

std::vector<ErrorReport> run_slit(const ExperimentConfig& config);
std::vector<ErrorReport> run_rough_in_time(const ExperimentConfig& config);
std::vector<ErrorReport> run_known_solution(const ExperimentConfig& config);
std::vector<ErrorReport> run_p2_validation(const ExperimentConfig& config);

inline constexpr std::string_view kCsvHeader = "ndof,M,h,tau,sqVerr,sqVerr1,sqLinftyError,sqAerr";

void write_csv(std::ostream& out, const std::vector<ErrorReport>& reports);
/// Whitespace-separated copy of the CSV with a `#` header line.
void write_dat(std::ostream& out, const std::vector<ErrorReport>& reports);
/// Reads a CSV written by write_csv (sq_lp_s stays 0). Throws ConfigError.
std::vector<ErrorReport> read_csv(std::istream& in);
/// `key = value` record of the configuration and reference.
void write_manifest(std::ostream& out, const ExperimentConfig& config, const StudyResult& result);

/// Writes <output>, <output>.manifest and, when enabled, <output stem>.dat.
void write_outputs(const ExperimentConfig& config, const StudyResult& result);

}  // namespace plheat
