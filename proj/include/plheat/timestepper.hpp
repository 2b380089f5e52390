#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "plheat/assembly.hpp"
#include "plheat/fields.hpp"
#include "plheat/projection.hpp"
#include "plheat/timegrid.hpp"

namespace plheat {

enum class ForceMode { theta_average, point_value };

/// Data of one evolution problem du/dt - div S(grad u) = f.
struct ProblemSpec {
  PLaplaceParams params;
  ScalarField force;
  ForceMode force_mode = ForceMode::theta_average;
  /// Initial datum; empty means u0 = 0.
  SpatialField initial;
  BoundaryMode boundary = BoundaryMode::homogeneous;
  /// Exact solution; required for averaged_nodal boundary data.
  ScalarField exact;
};

/// f(x, t) = c.
ScalarField constant_force(double c);
/// f(x, t) = sgn(t) |t|^(-beta); throws NonIntegrableForce unless 0 < beta < 1.
ScalarField power_time_force(double beta);

/// f_m at the assembly quadrature points: <f>_{theta_m} or f(t_m).
QuadratureField average_force(const ScalarField& force, int m, const TimeGrid& grid, const FeSpace& space,
                              ForceMode mode = ForceMode::theta_average);

struct NewtonReport {
  int iterations = 0;  // Newton plus Kacanov iterations
  int newton_iterations = 0;
  int kacanov_iterations = 0;
  double final_residual_norm = 0.0;
  double tolerance = 0.0;  // absolute threshold tol (1 + |rhs|)
  std::vector<double> energy_values;
  bool fallback_used = false;
  bool converged = false;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, NewtonReport report, int step)
      : Error(what), report_(std::move(report)), step_(step) {}
  const NewtonReport& report() const { return report_; }
  int step() const { return step_; }

 private:
  NewtonReport report_;
  int step_;
};

struct StepOptions {
  double tol = 1e-10;
  int max_iterations = 200;
  double eps_reg = kJacobianRegularization;
  double armijo_c = 1e-4;
  int max_halvings = 40;
  /// Kacanov iterations run after a Newton stall before Newton is retried.
  int kacanov_burst = 5;
  /// Consecutive poor Newton steps that also count as a stall (0 disables). A
  /// step is poor when its line-search factor is below short_step or its
  /// energy decrease is below min_efficiency times the linear prediction.
  int poor_step_limit = 2;
  double short_step = 0.25;
  double min_efficiency = 0.1;
  std::optional<SolveMethod> linear_method;
};

/// Solver for the per-step convex problems of one (space, tau) pair. Keeps the
/// mass matrix and the symbolic factorization across steps.
class StepSolver {
 public:
  StepSolver(FeSpacePtr space, PLaplaceParams params, double tau, StepOptions options = {});
  ~StepSolver();

  const StepSystem& system() const { return system_; }
  const FeSpacePtr& space() const { return space_; }

  /// Minimizes the step energy over coefficient vectors whose boundary entries
  /// equal `boundary` (full-length vector). Throws NonConvergence (step -1).
  std::pair<Vector, NewtonReport> solve(const Vector& u_prev, const Vector& load, const Vector& boundary);

  /// Pure lagged-coefficient iteration to the same tolerance (reference path).
  std::pair<Vector, NewtonReport> solve_kacanov(const Vector& u_prev, const Vector& load, const Vector& boundary);

 private:
  Vector linear_solve(const SparseMatrix& a, const Vector& b);
  bool kacanov_step(Vector& v, double& energy, NewtonReport& report);

  FeSpacePtr space_;
  StepOptions options_;
  StepSystem system_;
  struct Cache;
  std::unique_ptr<Cache> cache_;
};

/// One implicit Euler step from u_prev to t_m.
std::pair<FeFunction, NewtonReport> step(const FeFunction& u_prev, int m, const TimeGrid& grid,
                                         const ProblemSpec& spec, double tol = 1e-10);

struct Trajectory {
  FeSpacePtr space;
  TimeGrid grid;
  std::vector<FeFunction> snapshots;  // m = 0..M (empty when not kept)
  std::vector<NewtonReport> reports;  // m = 1..M at index m - 1
};

/// Called with (m, u_m) for m = 0..M.
using StepObserver = std::function<void(int, const Vector&)>;

/// Discrete initial datum: Pi_2 u0 on the unconstrained space, boundary entries
/// replaced by the step-1 boundary data.
FeFunction initial_datum(const ProblemSpec& spec, const FeSpacePtr& space, const TimeGrid& grid);

/// Boundary values of step m as a full-length vector.
Vector step_boundary(const ProblemSpec& spec, const FeSpace& space, int m, const TimeGrid& grid);

Trajectory solve_evolution(const ProblemSpec& spec, const FeSpacePtr& space, const TimeGrid& grid,
                           const StepOptions& options = {}, const StepObserver& observer = {},
                           bool keep_snapshots = true);

Trajectory solve_evolution(const ProblemSpec& spec, Domain domain, int level, int degree, const TimeGrid& grid,
                           double tol = 1e-10);

/// Writes snapshot_<m>.txt function dumps and manifest.txt with one line
/// `m t_m newton_iters residual` per snapshot.
void write_checkpoint(const std::filesystem::path& dir, const Trajectory& trajectory);

}  // namespace plheat
