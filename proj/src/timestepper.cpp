#include "plheat/timestepper.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "plheat/errors.hpp"
#include "plheat/sparse.hpp"

namespace plheat {

ScalarField constant_force(double c) {
  ScalarField f;
  f.terms.push_back({TimeFactor::constant(c), [](Point) { return 1.0; }});
  return f;
}

ScalarField power_time_force(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw NonIntegrableForce("power-law force needs 0 < beta < 1");
  ScalarField f;
  f.terms.push_back({TimeFactor::power(1.0, -beta, true), [](Point) { return 1.0; }});
  return f;
}

QuadratureField average_force(const ScalarField& force, int m, const TimeGrid& grid, const FeSpace& space,
                              ForceMode mode) {
  if (mode == ForceMode::point_value) {
    const double t = grid.t(m);
    return sample_field(space, [&](Point x) { return force(x, t); });
  }
  const TimeAverage<double> mean(force, theta_pieces(m, grid));
  return sample_field(space, [&](Point x) { return mean(x); });
}

struct StepSolver::Cache {
  CholeskySolver cholesky;
};

StepSolver::StepSolver(FeSpacePtr space, PLaplaceParams params, double tau, StepOptions options)
    : space_(std::move(space)),
      options_(options),
      system_(std::make_shared<const SparsityPattern>(space_),
              std::make_shared<const SparseMatrix>(assemble_mass(space_)), params, tau),
      cache_(std::make_unique<Cache>()) {}

StepSolver::~StepSolver() = default;

Vector StepSolver::linear_solve(const SparseMatrix& a, const Vector& b) {
  const SolveMethod method =
      options_.linear_method.value_or(a.rows() <= kDirectSolveThreshold ? SolveMethod::direct : SolveMethod::cg);
  if (method == SolveMethod::cg) {
    return conjugate_gradient(a, b, kDefaultLinearTolerance, static_cast<int>(10 * a.rows())).first;
  }
  cache_->cholesky.factorize(a);
  Vector x = cache_->cholesky.solve(b);
  const double bnorm = b.norm();
  if (bnorm > 0.0 && (b - a * x).norm() > kDefaultLinearTolerance * bnorm) x += cache_->cholesky.solve(b - a * x);
  return x;
}

bool StepSolver::kacanov_step(Vector& v, double& energy, NewtonReport& report) {
  const auto [a, rhs] = system_.kacanov_system(v, options_.eps_reg);
  const Vector d = linear_solve(a, rhs) - v;
  // Energy decrease is automatic for p <= 2; a safeguard covers p > 2.
  double alpha = 1.0;
  for (int h = 0; h <= options_.max_halvings; ++h, alpha *= 0.5) {
    const Vector w = v + alpha * d;
    const double ew = system_.energy(w);
    if (ew <= energy) {
      v = w;
      energy = ew;
      report.energy_values.push_back(ew);
      ++report.kacanov_iterations;
      return true;
    }
  }
  return false;
}

std::pair<Vector, NewtonReport> StepSolver::solve(const Vector& u_prev, const Vector& load, const Vector& boundary) {
  system_.set_step(u_prev, load, boundary);
  NewtonReport report;
  report.tolerance = options_.tol * (1.0 + system_.rhs_norm());
  Vector v = system_.constrain(u_prev);
  double energy = system_.energy(v);
  report.energy_values.push_back(energy);
  Vector r = system_.residual(v);
  double rn = r.norm();
  int kacanov_left = 0;
  int poor_steps = 0;

  while (rn > report.tolerance) {
    if (report.iterations >= options_.max_iterations) {
      report.final_residual_norm = rn;
      throw NonConvergence("step solver exceeded the iteration limit", report, -1);
    }
    ++report.iterations;

    if (kacanov_left > 0) {
      --kacanov_left;
      if (!kacanov_step(v, energy, report)) {
        report.final_residual_norm = rn;
        throw NonConvergence("step solver stalled: no descent from Newton or Kacanov", report, -1);
      }
      r = system_.residual(v);
      rn = r.norm();
      continue;
    }

    const Vector d = linear_solve(system_.jacobian(v, options_.eps_reg), -r);
    // Boundary rows of r vanish, so r.d is the directional derivative of E.
    const double slope = r.dot(d);
    bool accepted = false;
    if (slope < 0.0) {
      double alpha = 1.0;
      for (int h = 0; h <= options_.max_halvings && !accepted; ++h, alpha *= 0.5) {
        const Vector w = v + alpha * d;
        const double ew = system_.energy(w);
        bool ok = ew <= energy + options_.armijo_c * alpha * slope;
        Vector rw;
        const bool resolved = std::abs(alpha * slope) > 1e-13 * std::max(1.0, std::abs(energy));
        if (!ok && !resolved) {
          // Predicted decrease below the resolution of E: judge by the residual.
          rw = system_.residual(w);
          ok = rw.norm() < rn;
        }
        if (ok) {
          const bool poor =
              resolved && (alpha < options_.short_step || energy - ew < -options_.min_efficiency * alpha * slope);
          poor_steps = poor ? poor_steps + 1 : 0;
          v = w;
          energy = ew;
          r = rw.size() ? std::move(rw) : system_.residual(v);
          rn = r.norm();
          report.energy_values.push_back(ew);
          ++report.newton_iterations;
          accepted = true;
        }
      }
    }
    if (!accepted || (options_.poor_step_limit > 0 && poor_steps >= options_.poor_step_limit)) {
      report.fallback_used = true;
      kacanov_left = options_.kacanov_burst;
      poor_steps = 0;
    }
  }
  report.final_residual_norm = rn;
  report.converged = true;
  return {std::move(v), std::move(report)};
}

std::pair<Vector, NewtonReport> StepSolver::solve_kacanov(const Vector& u_prev, const Vector& load,
                                                          const Vector& boundary) {
  system_.set_step(u_prev, load, boundary);
  NewtonReport report;
  report.tolerance = options_.tol * (1.0 + system_.rhs_norm());
  Vector v = system_.constrain(u_prev);
  double energy = system_.energy(v);
  report.energy_values.push_back(energy);
  double rn = system_.residual(v).norm();
  const int limit = 50 * options_.max_iterations;
  while (rn > report.tolerance) {
    if (report.iterations >= limit) {
      report.final_residual_norm = rn;
      throw NonConvergence("Kacanov iteration exceeded the iteration limit", report, -1);
    }
    ++report.iterations;
    // The lagged system is solved exactly; energy is not re-checked here.
    const auto [a, rhs] = system_.kacanov_system(v, options_.eps_reg);
    v = linear_solve(a, rhs);
    energy = system_.energy(v);
    report.energy_values.push_back(energy);
    ++report.kacanov_iterations;
    rn = system_.residual(v).norm();
  }
  report.final_residual_norm = rn;
  report.converged = true;
  return {std::move(v), std::move(report)};
}

Vector step_boundary(const ProblemSpec& spec, const FeSpace& space, int m, const TimeGrid& grid) {
  if (spec.boundary == BoundaryMode::homogeneous) return Vector::Zero(static_cast<Eigen::Index>(space.ndof()));
  if (spec.exact.terms.empty() && !spec.exact.generic) {
    throw std::invalid_argument("averaged nodal boundary data needs the exact solution");
  }
  return averaged_boundary_values(space, spec.exact, m, grid).expand(space);
}

FeFunction initial_datum(const ProblemSpec& spec, const FeSpacePtr& space, const TimeGrid& grid) {
  FeFunction u0 = spec.initial ? l2_project(space, spec.initial) : FeFunction(space);
  const Vector g = step_boundary(spec, *space, 1, grid);
  for (int i : space->boundary_dofs()) u0.coeffs[i] = g[i];
  return u0;
}

std::pair<FeFunction, NewtonReport> step(const FeFunction& u_prev, int m, const TimeGrid& grid,
                                         const ProblemSpec& spec, double tol) {
  StepOptions options;
  options.tol = tol;
  StepSolver solver(u_prev.space, spec.params, grid.tau(), options);
  const Vector load = assemble_load(*u_prev.space, average_force(spec.force, m, grid, *u_prev.space, spec.force_mode));
  try {
    auto [v, report] = solver.solve(u_prev.coeffs, load, step_boundary(spec, *u_prev.space, m, grid));
    return {FeFunction(u_prev.space, std::move(v)), std::move(report)};
  } catch (const NonConvergence& e) {
    throw NonConvergence(e.what(), e.report(), m);
  }
}

namespace {

// Load vectors of a force, reusing per-term spatial loads when the force is separable.
class LoadBuilder {
 public:
  LoadBuilder(const ProblemSpec& spec, const FeSpace& space) : spec_(spec), space_(space) {
    if (spec.force.separable()) {
      for (const auto& term : spec.force.terms) terms_.push_back(assemble_load(space, sample_field(space, term.space)));
    }
  }

  Vector operator()(int m, const TimeGrid& grid) const {
    if (!spec_.force.separable()) {
      return assemble_load(space_, average_force(spec_.force, m, grid, space_, spec_.force_mode));
    }
    Vector b = Vector::Zero(static_cast<Eigen::Index>(space_.ndof()));
    const auto pieces = theta_pieces(m, grid);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const TimeFactor& time = spec_.force.terms[k].time;
      const double c = spec_.force_mode == ForceMode::point_value ? time(grid.t(m)) : time.integrate(pieces);
      if (c != 0.0) b += c * terms_[k];
    }
    return b;
  }

 private:
  const ProblemSpec& spec_;
  const FeSpace& space_;
  std::vector<Vector> terms_;
};

}  // namespace

Trajectory solve_evolution(const ProblemSpec& spec, const FeSpacePtr& space, const TimeGrid& grid,
                           const StepOptions& options, const StepObserver& observer, bool keep_snapshots) {
  Trajectory traj{space, grid, {}, {}};
  StepSolver solver(space, spec.params, grid.tau(), options);
  const LoadBuilder loads(spec, *space);
  FeFunction u = initial_datum(spec, space, grid);
  if (observer) observer(0, u.coeffs);
  if (keep_snapshots) traj.snapshots.push_back(u);
  for (int m = 1; m <= grid.steps; ++m) {
    try {
      auto [v, report] = solver.solve(u.coeffs, loads(m, grid), step_boundary(spec, *space, m, grid));
      u.coeffs = std::move(v);
      traj.reports.push_back(std::move(report));
    } catch (const NonConvergence& e) {
      throw NonConvergence(e.what(), e.report(), m);
    }
    if (observer) observer(m, u.coeffs);
    if (keep_snapshots) traj.snapshots.push_back(u);
  }
  return traj;
}

Trajectory solve_evolution(const ProblemSpec& spec, Domain domain, int level, int degree, const TimeGrid& grid,
                           double tol) {
  StepOptions options;
  options.tol = tol;
  return solve_evolution(spec, build_space(make_mesh(domain, level), degree), grid, options);
}

void write_checkpoint(const std::filesystem::path& dir, const Trajectory& trajectory) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  manifest << std::setprecision(17);
  for (std::size_t m = 0; m < trajectory.snapshots.size(); ++m) {
    std::ofstream out(dir / ("snapshot_" + std::to_string(m) + ".txt"));
    write_function(out, trajectory.snapshots[m]);
    const NewtonReport* rep = m > 0 && m - 1 < trajectory.reports.size() ? &trajectory.reports[m - 1] : nullptr;
    manifest << m << ' ' << trajectory.grid.t(static_cast<int>(m)) << ' ' << (rep ? rep->iterations : 0) << ' '
             << (rep ? rep->final_residual_norm : 0.0) << '\n';
  }
}

}  // namespace plheat
