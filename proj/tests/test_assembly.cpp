#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "plheat/assembly.hpp"
#include "plheat/errors.hpp"
#include "plheat/sparse.hpp"

using namespace plheat;

namespace {

Vector random_vector(std::size_t n, unsigned seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Dense Laplace stiffness matrix from gradients obtained through eval_gradient of
// unit coefficient vectors, integrated with a rule of sufficient degree.
Eigen::MatrixXd dense_laplace(const FeSpacePtr& s) {
  const std::size_t n = s->ndof();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const QuadratureRule& rule = triangle_quadrature(2 * s->degree());
  for (std::size_t t = 0; t < s->mesh().num_triangles(); ++t) {
    const auto dofs = s->cell_dofs(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      std::vector<Gradient> g;
      for (int i : dofs) {
        FeFunction e(s);
        e.coeffs[i] = 1.0;
        g.push_back(eval_gradient(e, t, rule.points[q]));
      }
      const double w = rule.weights[q] * s->mesh().signed_area(t);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) a(dofs[i], dofs[j]) += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
    }
  }
  return a;
}

StepSystem make_system(const FeSpacePtr& s, const PLaplaceParams& params, double tau) {
  auto pattern = std::make_shared<const SparsityPattern>(s);
  auto mass = std::make_shared<const SparseMatrix>(assemble_mass(*pattern));
  return StepSystem(pattern, mass, params, tau);
}

}  // namespace

TEST(Assembly, P1MassOnReferenceTriangle) {
  auto mesh = std::make_shared<const Mesh>(Domain::unit_square, std::vector<Point>{{0, 0}, {1, 0}, {0, 1}},
                                           std::vector<std::array<int, 3>>{{0, 1, 2}});
  const SparseMatrix m = assemble_mass(build_space(mesh, 1));
  Eigen::MatrixXd expected(3, 3);
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected *= 0.5 / 12.0;
  EXPECT_LE((Eigen::MatrixXd(m) - expected).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Assembly, MassPartitionOfUnityAndSymmetry) {
  for (Domain d : {Domain::unit_square, Domain::slit, Domain::shifted_square}) {
    for (int r = 1; r <= 3; ++r) {
      const FeSpacePtr s = build_space(make_mesh(d, 2), r);
      const SparseMatrix m = assemble_mass(s);
      const Eigen::MatrixXd dm(m);
      EXPECT_EQ((dm - dm.transpose()).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_NEAR(dm.sum(), domain_area(d), 1e-12 * domain_area(d));
      // Row sums are int phi_i, matching the load vector of f = 1.
      const Vector rows = dm.rowwise().sum();
      const Vector load = assemble_load(*s, constant_field(*s, 1.0));
      EXPECT_LE((rows - load).cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_GT(Eigen::LLT<Eigen::MatrixXd>(dm).info() == Eigen::Success, 0);
    }
  }
}

TEST(Assembly, AssemblyIsBitwiseDeterministic) {
  const FeSpacePtr s = build_space(make_mesh(Domain::slit, 2), 2);
  const SparsityPattern pattern(s);
  const Vector u = random_vector(s->ndof(), 1);
  const PLaplaceParams params{1.5, 0.0};
  const SparseMatrix a = assemble_flux_jacobian(pattern, u, params);
  const SparseMatrix b = assemble_flux_jacobian(pattern, u, params);
  ASSERT_EQ(a.nonZeros(), b.nonZeros());
  for (Eigen::Index k = 0; k < a.nonZeros(); ++k) EXPECT_EQ(a.valuePtr()[k], b.valuePtr()[k]);
  const Vector fa = assemble_flux(*s, u, params), fb = assemble_flux(*s, u, params);
  EXPECT_EQ((fa - fb).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assembly, StiffnessMatchesIndependentOracle) {
  for (int r = 1; r <= 3; ++r) {
    const FeSpacePtr s = build_space(make_mesh(Domain::centered_square, 1), r);
    const SparsityPattern pattern(s);
    const Eigen::MatrixXd a(assemble_stiffness(pattern));
    const Eigen::MatrixXd oracle = dense_laplace(s);
    EXPECT_LE((a - oracle).cwiseAbs().maxCoeff(), 1e-12 * oracle.cwiseAbs().maxCoeff());
  }
}

TEST(Assembly, LinearCaseResidual) {
  const FeSpacePtr s = build_space(make_mesh(Domain::unit_square, 2), 2);
  const PLaplaceParams params{2.0, 0.0};
  const double tau = 0.05;
  const Vector zero = Vector::Zero(s->ndof());
  const QuadratureField f0 = constant_field(*s, 0.0);
  const Vector r0 = assemble_step_residual(FeFunction(s), FeFunction(s), tau, f0, params, zero);
  EXPECT_EQ(r0.cwiseAbs().maxCoeff(), 0.0);

  const Vector u = random_vector(s->ndof(), 2), up = random_vector(s->ndof(), 3), g = random_vector(s->ndof(), 4);
  const QuadratureField f = sample_field(*s, [](Point x) { return std::sin(3 * x.x) + x.y; });
  const Vector r = assemble_step_residual(FeFunction(s, u), FeFunction(s, up), tau, f, params, g);
  const Eigen::MatrixXd a = dense_laplace(s);
  const Eigen::MatrixXd m(assemble_mass(s));
  const Vector load = assemble_load(*s, f);
  Vector expected = m * (u - up) / tau + a * u - load;
  for (int i : s->boundary_dofs()) expected[i] = u[i] - g[i];
  EXPECT_LE((r - expected).cwiseAbs().maxCoeff(), 1e-12 * expected.cwiseAbs().maxCoeff());

  // Jacobian for p = 2 is M / tau + A with pinned boundary.
  Eigen::MatrixXd j(assemble_step_jacobian(FeFunction(s, u), tau, params));
  Eigen::MatrixXd je = m / tau + a;
  for (int i : s->boundary_dofs()) {
    je.row(i).setZero();
    je.col(i).setZero();
    je(i, i) = 1.0;
  }
  EXPECT_LE((j - je).cwiseAbs().maxCoeff(), 1e-12 * je.cwiseAbs().maxCoeff());
}

TEST(Assembly, ResidualIsEnergyGradient) {
  for (double p : {1.5, 3.0}) {
    const FeSpacePtr s = build_space(make_mesh(Domain::shifted_square, 1), 2);
    StepSystem sys = make_system(s, {p, 0.0}, 0.1);
    const Vector up = random_vector(s->ndof(), 5);
    const QuadratureField f = sample_field(*s, [](Point x) { return x.x * x.y; });
    sys.set_step(up, assemble_load(*s, f), Vector::Zero(s->ndof()));
    const Vector u = random_vector(s->ndof(), 6);
    const Vector grad = sys.energy_gradient(u);
    for (unsigned k = 0; k < 5; ++k) {
      const Vector w = random_vector(s->ndof(), 100 + k);
      const double d = 1e-6;
      const double fd = (sys.energy(u + d * w) - sys.energy(u - d * w)) / (2 * d);
      const double ex = grad.dot(w);
      EXPECT_NEAR(fd, ex, 1e-5 * std::abs(ex)) << "p=" << p;
    }
  }
}

TEST(Assembly, JacobianDirectionalConsistency) {
  const FeSpacePtr s = build_space(make_mesh(Domain::unit_square, 2), 2);
  const PLaplaceParams params{3.0, 0.0};
  const double tau = 0.01;
  const Vector u = random_vector(s->ndof(), 7), up = random_vector(s->ndof(), 8);
  const QuadratureField f = constant_field(*s, 1.0);
  const Vector g = Vector::Zero(s->ndof());
  Vector w = random_vector(s->ndof(), 9);
  for (int i : s->boundary_dofs()) w[i] = 0.0;
  const double d = 1e-6;
  const Vector r1 = assemble_step_residual(FeFunction(s, u + d * w), FeFunction(s, up), tau, f, params, g);
  const Vector r0 = assemble_step_residual(FeFunction(s, u), FeFunction(s, up), tau, f, params, g);
  const Vector jw = assemble_step_jacobian(FeFunction(s, u), tau, params) * w;
  EXPECT_LE(((r1 - r0) / d - jw).norm(), 1e-4 * jw.norm());
}

TEST(Assembly, JacobianIsSpdOnCoarseMesh) {
  const FeSpacePtr s = build_space(make_mesh(Domain::slit, 1), 1);
  ASSERT_LE(s->ndof(), 50u);
  for (double p : {1.5, 3.0}) {
    const Eigen::MatrixXd j(assemble_step_jacobian(FeFunction(s, random_vector(s->ndof(), 10)), 0.1, {p, 0.0}));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_LE((j - j.transpose()).cwiseAbs().maxCoeff(), 1e-13 * j.cwiseAbs().maxCoeff());
  }
}

TEST(Assembly, SpaceMismatch) {
  const FeSpacePtr a = build_space(make_mesh(Domain::unit_square, 1), 1);
  const FeSpacePtr b = build_space(make_mesh(Domain::unit_square, 2), 1);
  EXPECT_THROW(assemble_step_residual(FeFunction(a), FeFunction(b), 0.1, constant_field(*a, 0.0), {2.0, 0.0},
                                      Vector::Zero(a->ndof())),
               SpaceMismatch);
}

TEST(Assembly, KacanovSystemFixedPointMatchesResidual) {
  // At any v, the Kacanov matrix applied to v minus its rhs equals the residual
  // on interior rows.
  const FeSpacePtr s = build_space(make_mesh(Domain::centered_square, 1), 2);
  StepSystem sys = make_system(s, {1.5, 0.2}, 0.05);
  const QuadratureField f = constant_field(*s, 2.0);
  const Vector g = random_vector(s->ndof(), 11);
  sys.set_step(random_vector(s->ndof(), 12), assemble_load(*s, f), g);
  const Vector v = sys.constrain(random_vector(s->ndof(), 13));
  const auto [a, rhs] = sys.kacanov_system(v);
  const Vector res = sys.residual(v);
  const Vector diff = a * v - rhs;
  for (std::size_t i = 0; i < s->ndof(); ++i) EXPECT_NEAR(diff[i], res[i], 1e-11 * (1 + res.cwiseAbs().maxCoeff()));
}

TEST(SolveSpd, IdentityAndMass) {
  SparseMatrix id(5, 5);
  id.setIdentity();
  const Vector b = random_vector(5, 14);
  const auto [x, rep] = solve_spd(id, b, 1e-12, SolveMethod::cg);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_LE((x - b).norm(), 1e-15);

  const SparseMatrix m = assemble_mass(build_space(make_mesh(Domain::slit, 3), 2));
  const Vector ones = Vector::Ones(m.rows());
  for (SolveMethod method : {SolveMethod::cg, SolveMethod::direct}) {
    const auto [y, r] = solve_spd(m, m * ones, 1e-11, method);
    EXPECT_LE(r.relative_residual, 1e-11);
    EXPECT_LE((y - ones).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(r.method, method);
  }
}

TEST(SolveSpd, RandomSpdAgainstDenseFactorization) {
  std::mt19937 rng(15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd b(50, 50);
  for (Eigen::Index i = 0; i < 50; ++i)
    for (Eigen::Index j = 0; j < 50; ++j) b(i, j) = u(rng);
  const Eigen::MatrixXd a = b * b.transpose() + 50.0 * Eigen::MatrixXd::Identity(50, 50);
  const SparseMatrix sa = a.sparseView();
  const Vector rhs = random_vector(50, 16);
  const Vector oracle = a.llt().solve(rhs);
  for (SolveMethod method : {SolveMethod::cg, SolveMethod::direct}) {
    const auto [x, rep] = solve_spd(sa, rhs, 1e-13, method);
    EXPECT_LE((x - oracle).norm(), 1e-10 * oracle.norm());
  }
}

TEST(SolveSpd, CgIterationLimit) {
  const SparseMatrix m = assemble_stiffness(SparsityPattern(build_space(make_mesh(Domain::unit_square, 3), 1)));
  SparseMatrix a = m;
  pin_dirichlet(a, *build_space(make_mesh(Domain::unit_square, 3), 1));
  const Vector b = Vector::Ones(a.rows());
  EXPECT_THROW(conjugate_gradient(a, b, 1e-14, 2), MaxIterations);
  try {
    conjugate_gradient(a, b, 1e-14, 2);
  } catch (const MaxIterations& e) {
    EXPECT_EQ(e.report().iterations, 2);
    EXPECT_GT(e.report().relative_residual, 1e-14);
  }
}

TEST(SolveSpd, CholeskyRejectsIndefinite) {
  SparseMatrix a(2, 2);
  a.insert(0, 0) = 1.0;
  a.insert(1, 1) = -1.0;
  CholeskySolver chol;
  EXPECT_THROW(chol.factorize(a), Error);
}
