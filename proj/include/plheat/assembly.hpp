#pragma once

#include <functional>
#include <memory>

#include "plheat/constitutive.hpp"
#include "plheat/fespace.hpp"
#include "plheat/sparse.hpp"

namespace plheat {

/// Quadrature exactness used for assembling a degree-r space.
inline int assembly_quadrature_degree(int r) { return 2 * r + 2; }

/// Values of a scalar field at every quadrature point of every triangle:
/// values[t * rule.size() + q] for the rule of exactness `degree`.
struct QuadratureField {
  int degree = 0;
  std::vector<double> values;
};

/// Samples g at the quadrature points of the assembly rule of `space`.
QuadratureField sample_field(const FeSpace& space, const std::function<double(Point)>& g);
QuadratureField constant_field(const FeSpace& space, double value);

/// M_ij = int phi_i phi_j, quadrature exact to degree 2r. No boundary treatment.
SparseMatrix assemble_mass(const SparsityPattern& pattern);
SparseMatrix assemble_mass(const FeSpacePtr& space);

/// A_ij = int w grad phi_i . grad phi_j with w given at assembly quadrature points
/// (w == nullptr means w = 1, the Laplace stiffness matrix).
SparseMatrix assemble_stiffness(const SparsityPattern& pattern, const QuadratureField* weight = nullptr);

/// b_i = int f phi_i.
Vector assemble_load(const FeSpace& space, const QuadratureField& f);

/// N(u)_i = int S(grad u) . grad phi_i.
Vector assemble_flux(const FeSpace& space, const Vector& u, const PLaplaceParams& params);

/// int phi(|grad u|) dx with the assembly rule.
double flux_energy(const FeSpace& space, const Vector& u, const PLaplaceParams& params);

/// K(u)_ij = int grad phi_i . DS(grad u) grad phi_j.
SparseMatrix assemble_flux_jacobian(const SparsityPattern& pattern, const Vector& u, const PLaplaceParams& params,
                                    double eps_reg = kJacobianRegularization);

/// Lagged Kacanov coefficient (kappa + max(|grad u|, eps_reg))^(p-2) at the assembly points.
QuadratureField kacanov_weight(const FeSpace& space, const Vector& u, const PLaplaceParams& params,
                               double eps_reg = kJacobianRegularization);

/// One implicit Euler step written as the minimization of
///   E(v) = |v - u_prev|^2_{L2} / (2 tau) + int phi(|grad v|) - int f v
/// over coefficient vectors whose boundary entries equal `boundary`.
class StepSystem {
 public:
  StepSystem(PatternPtr pattern, std::shared_ptr<const SparseMatrix> mass, PLaplaceParams params, double tau);

  const FeSpace& space() const { return pattern_->space(); }
  const SparsityPattern& pattern() const { return *pattern_; }
  const SparseMatrix& mass() const { return *mass_; }
  double tau() const { return tau_; }
  const PLaplaceParams& params() const { return params_; }

  /// Sets u_prev, the load vector int f phi_i and the boundary values (only
  /// entries at boundary DOFs are read).
  void set_step(const Vector& u_prev, Vector load, const Vector& boundary);

  const Vector& u_prev() const { return u_prev_; }
  const Vector& load() const { return load_; }
  const Vector& boundary() const { return boundary_; }

  /// Copy of v with boundary entries replaced by the boundary values.
  Vector constrain(Vector v) const;

  double energy(const Vector& v) const;
  /// Gradient of the energy (all rows, no boundary treatment).
  Vector energy_gradient(const Vector& v) const;
  /// Step residual: energy gradient on interior rows, v_i - g_i on boundary rows.
  Vector residual(const Vector& v) const;
  /// Interior part of the right-hand side M u_prev / tau + load, for scaling tolerances.
  double rhs_norm() const;
  /// M / tau + K(v) with boundary rows and columns pinned.
  SparseMatrix jacobian(const Vector& v, double eps_reg = kJacobianRegularization) const;
  /// Linear Kacanov system (M / tau + A_w(v)) x = M u_prev / tau + load with the
  /// lagged weight of v; boundary pinned and boundary values moved to the rhs.
  std::pair<SparseMatrix, Vector> kacanov_system(const Vector& v, double eps_reg = kJacobianRegularization) const;

 private:
  PatternPtr pattern_;
  std::shared_ptr<const SparseMatrix> mass_;
  PLaplaceParams params_;
  double tau_;
  Vector u_prev_;
  Vector load_;
  Vector boundary_;
  Vector mass_u_prev_;
};

/// Residual of one step (see StepSystem::residual); f_avg holds force values at
/// the assembly quadrature points and `boundary` the Dirichlet values.
Vector assemble_step_residual(const FeFunction& u, const FeFunction& u_prev, double tau, const QuadratureField& f_avg,
                              const PLaplaceParams& params, const Vector& boundary);

/// M / tau + K(u), boundary rows and columns pinned.
SparseMatrix assemble_step_jacobian(const FeFunction& u, double tau, const PLaplaceParams& params);

}  // namespace plheat
