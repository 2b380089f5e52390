#pragma once

#include <cstddef>
#include <memory>
#include <string_view>
#include <variant>
#include <vector>

#include "plheat/constitutive.hpp"
#include "plheat/fields.hpp"
#include "plheat/timestepper.hpp"

namespace plheat {

/// Closed-form solution. Empty v or s fields are derived pointwise from grad.
struct ExactSolution {
  ScalarField u;
  VectorField grad;
  VectorField v;
  VectorField s;
};

/// Fills in v = V(grad u) and s = S(grad u) when they are missing.
ExactSolution complete(ExactSolution exact, const PLaplaceParams& params);

using ReferenceSolution = std::variant<ExactSolution, std::shared_ptr<const Trajectory>>;

/// Squared errors of one run. Window averages are over J_m; every time sum
/// carries the weight tau per window.
struct ErrorReport {
  std::size_t ndof = 0;
  int M = 0;
  double h = 0.0;
  double tau = 0.0;
  double sq_linfty_l2 = 0.0;  // max_m ||u_m - <u>_{J_m}||^2
  double sq_l2_v = 0.0;       // tau sum_m avg_{J_m} ||V(grad u_m) - V(grad u(s))||^2
  double sq_l2_v_avg = 0.0;   // tau sum_m ||V(grad u_m) - <V(grad u)>_{J_m}||^2
  double sq_lp_s = 0.0;       // lp_s_sum^(2/p')
  double lp_s_sum = 0.0;      // tau sum_m ||S(grad u_m) - <S>_m||_{L^p'}^p'
};

struct ErrorOptions {
  /// Quadrature exactness for exact references.
  int quad_degree = 8;
  /// Quadrature exactness on the reference mesh for discrete references (0: 2 r_ref).
  int discrete_quad_degree = 0;
};

/// All error quantities of a trajectory against an exact solution. Time
/// averages of separable power-law fields are exact; other fields use
/// 5-point Gauss per half window, split at t = 0.
ErrorReport compute_errors(const Trajectory& traj, const ExactSolution& exact, const PLaplaceParams& params,
                           const ErrorOptions& options = {});

/// Errors against a discrete reference: <u_ref>_{J_m} is the trapezoidal mean
/// of the reference snapshots in J_m, V and S are applied to its gradient, and
/// sq_l2_v_avg equals sq_l2_v. Throws IncompatibleHierarchy.
ErrorReport compute_errors(const Trajectory& traj, const Trajectory& ref, const PLaplaceParams& params,
                           const ErrorOptions& options = {});

ErrorReport compute_errors(const Trajectory& traj, const ReferenceSolution& ref, const PLaplaceParams& params,
                           const ErrorOptions& options = {});

double err_linfty_l2(const Trajectory& traj, const ReferenceSolution& ref, const PLaplaceParams& params);
/// (sq_l2_v, sq_l2_v_avg).
std::pair<double, double> err_l2_v(const Trajectory& traj, const ReferenceSolution& ref, const PLaplaceParams& params);
double err_lp_s(const Trajectory& traj, const ReferenceSolution& ref, const PLaplaceParams& params);

/// Errors of several coarse runs against a reference that is streamed one
/// snapshot at a time, so the reference trajectory is never stored.
class DiscreteErrorAccumulator {
 public:
  DiscreteErrorAccumulator(FeSpacePtr ref_space, TimeGrid ref_grid, PLaplaceParams params, ErrorOptions options = {});
  ~DiscreteErrorAccumulator();
  DiscreteErrorAccumulator(const DiscreteErrorAccumulator&) = delete;
  DiscreteErrorAccumulator& operator=(const DiscreteErrorAccumulator&) = delete;

  /// Registers a run with stored snapshots. Throws IncompatibleHierarchy.
  void add(std::shared_ptr<const Trajectory> traj);
  /// Feeds reference snapshot j (j = 0..M_ref, in order).
  void observe(int j, const Vector& u_ref);
  StepObserver observer();
  /// One report per registered run, in registration order; requires all snapshots.
  std::vector<ErrorReport> reports() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Value of a CSV column (sqVerr, sqVerr1, sqLinftyError, sqAerr) or of sqLpS;
/// names joined by '+' are summed. Throws std::invalid_argument.
double field_value(const ErrorReport& report, std::string_view field);

enum class Abscissa { h, tau, ndof };

struct OrderReport {
  std::vector<double> slopes;  // between consecutive reports
  double ls_slope = 0.0;       // least-squares fit over all reports
};

/// Slopes of log(field) against log(abscissa). Throws InsufficientData for
/// fewer than two reports or non-positive values, std::invalid_argument when
/// the abscissa repeats.
OrderReport empirical_order(const std::vector<ErrorReport>& reports, std::string_view field, Abscissa against);

}  // namespace plheat
