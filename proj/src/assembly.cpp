#include "plheat/assembly.hpp"

#include <cmath>

#include "plheat/errors.hpp"

namespace plheat {

namespace {

// Cell loop context shared by the assembly routines.
struct CellLoop {
  const FeSpace& space;
  const QuadratureRule& rule;
  FeSpace::Tabulation tab;
  int nloc;

  CellLoop(const FeSpace& s, int degree)
      : space(s), rule(triangle_quadrature(degree)), tab(s.tabulate(rule)), nloc(s.dofs_per_cell()) {}

  std::span<const double> values(std::size_t q) const { return {tab.values.data() + q * nloc, std::size_t(nloc)}; }
  std::span<const double> dlambda(std::size_t q) const {
    return {tab.dlambda.data() + q * nloc * 3, std::size_t(nloc) * 3};
  }

  // Physical gradients of all local basis functions at point q of cell t.
  void basis_gradients(std::size_t t, std::size_t q, std::array<Gradient, 10>& out) const {
    const TriangleGeometry& g = space.geometry(t);
    const auto dl = dlambda(q);
    for (int i = 0; i < nloc; ++i) {
      out[i] = {0.0, 0.0};
      for (int k = 0; k < 3; ++k) {
        out[i][0] += dl[3 * i + k] * g.grad_lambda[k][0];
        out[i][1] += dl[3 * i + k] * g.grad_lambda[k][1];
      }
    }
  }

  void gather(const Vector& u, std::size_t t, std::array<double, 10>& local) const {
    const auto dofs = space.cell_dofs(t);
    for (int i = 0; i < nloc; ++i) local[i] = u[dofs[i]];
  }
};

Gradient combine(const std::array<Gradient, 10>& grads, const std::array<double, 10>& local, int nloc) {
  Gradient g{0.0, 0.0};
  for (int i = 0; i < nloc; ++i) {
    g[0] += local[i] * grads[i][0];
    g[1] += local[i] * grads[i][1];
  }
  return g;
}

void check_field(const FeSpace& space, const QuadratureField& f) {
  const std::size_t expected = space.mesh().num_triangles() * triangle_quadrature(f.degree).size();
  if (f.degree != assembly_quadrature_degree(space.degree()) || f.values.size() != expected) {
    throw SpaceMismatch("quadrature field does not match the assembly rule of the space");
  }
}

}  // namespace

QuadratureField sample_field(const FeSpace& space, const std::function<double(Point)>& g) {
  QuadratureField f;
  f.degree = assembly_quadrature_degree(space.degree());
  const QuadratureRule& rule = triangle_quadrature(f.degree);
  f.values.reserve(space.mesh().num_triangles() * rule.size());
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    for (const auto& lam : rule.points) f.values.push_back(g(space.map_to_physical(t, lam)));
  }
  return f;
}

QuadratureField constant_field(const FeSpace& space, double value) {
  QuadratureField f;
  f.degree = assembly_quadrature_degree(space.degree());
  f.values.assign(space.mesh().num_triangles() * triangle_quadrature(f.degree).size(), value);
  return f;
}

SparseMatrix assemble_mass(const SparsityPattern& pattern) {
  const FeSpace& s = pattern.space();
  const CellLoop loop(s, 2 * s.degree());
  const int n = loop.nloc;
  SparseMatrix m = pattern.make_matrix();
  double* vals = m.valuePtr();
  std::array<double, 100> local{};
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    local.fill(0.0);
    const double area = s.geometry(t).area;
    for (std::size_t q = 0; q < loop.rule.size(); ++q) {
      const double w = loop.rule.weights[q] * area;
      const auto phi = loop.values(q);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) local[i * n + j] += w * phi[i] * phi[j];
    }
    const auto slots = pattern.cell_slots(t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) vals[slots[i * n + j]] += local[std::min(i, j) * n + std::max(i, j)];
    }
  }
  return m;
}

SparseMatrix assemble_mass(const FeSpacePtr& space) { return assemble_mass(SparsityPattern(space)); }

SparseMatrix assemble_stiffness(const SparsityPattern& pattern, const QuadratureField* weight) {
  const FeSpace& s = pattern.space();
  const CellLoop loop(s, assembly_quadrature_degree(s.degree()));
  if (weight) check_field(s, *weight);
  const int n = loop.nloc;
  const std::size_t nq = loop.rule.size();
  SparseMatrix a = pattern.make_matrix();
  double* vals = a.valuePtr();
  std::array<Gradient, 10> grads{};
  std::array<double, 100> local{};
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    local.fill(0.0);
    const double area = s.geometry(t).area;
    for (std::size_t q = 0; q < nq; ++q) {
      const double w = loop.rule.weights[q] * area * (weight ? weight->values[t * nq + q] : 1.0);
      loop.basis_gradients(t, q, grads);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) local[i * n + j] += w * dot(grads[i], grads[j]);
    }
    const auto slots = pattern.cell_slots(t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) vals[slots[i * n + j]] += local[std::min(i, j) * n + std::max(i, j)];
    }
  }
  return a;
}

Vector assemble_load(const FeSpace& space, const QuadratureField& f) {
  check_field(space, f);
  const CellLoop loop(space, f.degree);
  const std::size_t nq = loop.rule.size();
  Vector b = Vector::Zero(space.ndof());
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    const double area = space.geometry(t).area;
    const auto dofs = space.cell_dofs(t);
    for (std::size_t q = 0; q < nq; ++q) {
      const double w = loop.rule.weights[q] * area * f.values[t * nq + q];
      const auto phi = loop.values(q);
      for (int i = 0; i < loop.nloc; ++i) b[dofs[i]] += w * phi[i];
    }
  }
  return b;
}

Vector assemble_flux(const FeSpace& space, const Vector& u, const PLaplaceParams& params) {
  const CellLoop loop(space, assembly_quadrature_degree(space.degree()));
  Vector r = Vector::Zero(space.ndof());
  std::array<Gradient, 10> grads{};
  std::array<double, 10> local{};
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    loop.gather(u, t, local);
    const double area = space.geometry(t).area;
    const auto dofs = space.cell_dofs(t);
    for (std::size_t q = 0; q < loop.rule.size(); ++q) {
      loop.basis_gradients(t, q, grads);
      const Vec2 flux = s_flux(combine(grads, local, loop.nloc), params);
      const double w = loop.rule.weights[q] * area;
      for (int i = 0; i < loop.nloc; ++i) r[dofs[i]] += w * dot(flux, grads[i]);
    }
  }
  return r;
}

double flux_energy(const FeSpace& space, const Vector& u, const PLaplaceParams& params) {
  const CellLoop loop(space, assembly_quadrature_degree(space.degree()));
  std::array<Gradient, 10> grads{};
  std::array<double, 10> local{};
  double e = 0.0;
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    loop.gather(u, t, local);
    const double area = space.geometry(t).area;
    for (std::size_t q = 0; q < loop.rule.size(); ++q) {
      loop.basis_gradients(t, q, grads);
      e += loop.rule.weights[q] * area * phi(norm(combine(grads, local, loop.nloc)), params);
    }
  }
  return e;
}

SparseMatrix assemble_flux_jacobian(const SparsityPattern& pattern, const Vector& u, const PLaplaceParams& params,
                                    double eps_reg) {
  const FeSpace& s = pattern.space();
  const CellLoop loop(s, assembly_quadrature_degree(s.degree()));
  const int n = loop.nloc;
  SparseMatrix k = pattern.make_matrix();
  double* vals = k.valuePtr();
  std::array<Gradient, 10> grads{};
  std::array<double, 10> local{};
  std::array<double, 100> cell{};
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    loop.gather(u, t, local);
    cell.fill(0.0);
    const double area = s.geometry(t).area;
    for (std::size_t q = 0; q < loop.rule.size(); ++q) {
      loop.basis_gradients(t, q, grads);
      const Sym2 ds = ds_jacobian(combine(grads, local, n), params, eps_reg);
      const double w = loop.rule.weights[q] * area;
      for (int j = 0; j < n; ++j) {
        const Vec2 dsg = ds.apply(grads[j]);
        for (int i = 0; i <= j; ++i) cell[i * n + j] += w * dot(grads[i], dsg);
      }
    }
    const auto slots = pattern.cell_slots(t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) vals[slots[i * n + j]] += cell[std::min(i, j) * n + std::max(i, j)];
    }
  }
  return k;
}

QuadratureField kacanov_weight(const FeSpace& space, const Vector& u, const PLaplaceParams& params, double eps_reg) {
  const CellLoop loop(space, assembly_quadrature_degree(space.degree()));
  QuadratureField w;
  w.degree = loop.rule.exactness_degree;
  w.values.reserve(space.mesh().num_triangles() * loop.rule.size());
  std::array<Gradient, 10> grads{};
  std::array<double, 10> local{};
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    loop.gather(u, t, local);
    for (std::size_t q = 0; q < loop.rule.size(); ++q) {
      loop.basis_gradients(t, q, grads);
      const double a = params.kappa + std::max(norm(combine(grads, local, loop.nloc)), eps_reg);
      w.values.push_back(std::pow(a, params.p - 2.0));
    }
  }
  return w;
}

StepSystem::StepSystem(PatternPtr pattern, std::shared_ptr<const SparseMatrix> mass, PLaplaceParams params,
                       double tau)
    : pattern_(std::move(pattern)), mass_(std::move(mass)), params_(params), tau_(tau) {
  params_.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
  const auto n = static_cast<Eigen::Index>(space().ndof());
  u_prev_ = load_ = boundary_ = mass_u_prev_ = Vector::Zero(n);
}

void StepSystem::set_step(const Vector& u_prev, Vector load, const Vector& boundary) {
  const auto n = static_cast<Eigen::Index>(space().ndof());
  if (u_prev.size() != n || load.size() != n || boundary.size() != n) {
    throw SpaceMismatch("step data does not match the space dimension");
  }
  u_prev_ = u_prev;
  load_ = std::move(load);
  boundary_ = boundary;
  mass_u_prev_ = (*mass_) * u_prev_;
}

Vector StepSystem::constrain(Vector v) const {
  for (int i : space().boundary_dofs()) v[i] = boundary_[i];
  return v;
}

double StepSystem::energy(const Vector& v) const {
  const Vector d = v - u_prev_;
  return d.dot((*mass_) * d) / (2.0 * tau_) + flux_energy(space(), v, params_) - load_.dot(v);
}

Vector StepSystem::energy_gradient(const Vector& v) const {
  return ((*mass_) * v - mass_u_prev_) / tau_ + assemble_flux(space(), v, params_) - load_;
}

Vector StepSystem::residual(const Vector& v) const {
  Vector r = energy_gradient(v);
  for (int i : space().boundary_dofs()) r[i] = v[i] - boundary_[i];
  return r;
}

double StepSystem::rhs_norm() const {
  Vector rhs = mass_u_prev_ / tau_ + load_;
  for (int i : space().boundary_dofs()) rhs[i] = 0.0;
  return rhs.norm();
}

SparseMatrix StepSystem::jacobian(const Vector& v, double eps_reg) const {
  SparseMatrix j = assemble_flux_jacobian(*pattern_, v, params_, eps_reg);
  j += (*mass_) / tau_;
  pin_dirichlet(j, space());
  return j;
}

std::pair<SparseMatrix, Vector> StepSystem::kacanov_system(const Vector& v, double eps_reg) const {
  const QuadratureField w = kacanov_weight(space(), v, params_, eps_reg);
  SparseMatrix a = assemble_stiffness(*pattern_, &w);
  a += (*mass_) / tau_;
  Vector g = Vector::Zero(static_cast<Eigen::Index>(space().ndof()));
  for (int i : space().boundary_dofs()) g[i] = boundary_[i];
  Vector rhs = mass_u_prev_ / tau_ + load_ - a * g;
  for (int i : space().boundary_dofs()) rhs[i] = boundary_[i];
  pin_dirichlet(a, space());
  return {std::move(a), std::move(rhs)};
}

Vector assemble_step_residual(const FeFunction& u, const FeFunction& u_prev, double tau, const QuadratureField& f_avg,
                              const PLaplaceParams& params, const Vector& boundary) {
  if (u.space != u_prev.space) throw SpaceMismatch("u and u_prev live on different spaces");
  auto pattern = std::make_shared<const SparsityPattern>(u.space);
  auto mass = std::make_shared<const SparseMatrix>(assemble_mass(*pattern));
  StepSystem sys(pattern, mass, params, tau);
  sys.set_step(u_prev.coeffs, assemble_load(*u.space, f_avg), boundary);
  return sys.residual(u.coeffs);
}

SparseMatrix assemble_step_jacobian(const FeFunction& u, double tau, const PLaplaceParams& params) {
  auto pattern = std::make_shared<const SparsityPattern>(u.space);
  auto mass = std::make_shared<const SparseMatrix>(assemble_mass(*pattern));
  StepSystem sys(pattern, mass, params, tau);
  return sys.jacobian(u.coeffs);
}

}  // namespace plheat
