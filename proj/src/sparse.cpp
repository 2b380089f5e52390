#include "plheat/sparse.hpp"

#include <Eigen/CholmodSupport>
#include <algorithm>
#include <cmath>

namespace plheat {

SparsityPattern::SparsityPattern(FeSpacePtr space) : space_(std::move(space)), nloc_(space_->dofs_per_cell()) {
  const FeSpace& s = *space_;
  const auto n = static_cast<Eigen::Index>(s.ndof());
  std::vector<std::vector<int>> rows(s.ndof());
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    const auto dofs = s.cell_dofs(t);
    for (int i : dofs)
      for (int j : dofs) rows[i].push_back(j);
  }
  std::vector<Eigen::Triplet<double, int>> triplets;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    for (int j : r) triplets.emplace_back(static_cast<int>(i), j, 0.0);
  }
  zero_.resize(n, n);
  zero_.setFromTriplets(triplets.begin(), triplets.end());
  zero_.makeCompressed();

  const int* outer = zero_.outerIndexPtr();
  const int* inner = zero_.innerIndexPtr();
  slots_.resize(s.mesh().num_triangles() * nloc_ * nloc_);
  for (std::size_t t = 0; t < s.mesh().num_triangles(); ++t) {
    const auto dofs = s.cell_dofs(t);
    int* out = slots_.data() + t * nloc_ * nloc_;
    for (int i = 0; i < nloc_; ++i) {
      const int* begin = inner + outer[dofs[i]];
      const int* end = inner + outer[dofs[i] + 1];
      for (int j = 0; j < nloc_; ++j) {
        out[i * nloc_ + j] = static_cast<int>(std::lower_bound(begin, end, dofs[j]) - inner);
      }
    }
  }
}

std::pair<Vector, LinearSolveReport> conjugate_gradient(const SparseMatrix& a, const Vector& b, double tol,
                                                        int max_iterations) {
  const Eigen::Index n = a.rows();
  Vector inv_diag = a.diagonal().cwiseInverse();
  Vector x = Vector::Zero(n);
  LinearSolveReport report{0, 0.0, SolveMethod::cg};
  const double bnorm = b.norm();
  if (bnorm == 0.0) return {x, report};

  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  Vector d = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector ad = a * d;
    const double alpha = rz / d.dot(ad);
    x += alpha * d;
    r -= alpha * ad;
    report.iterations = it;
    report.relative_residual = r.norm() / bnorm;
    if (report.relative_residual <= tol) return {x, report};
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    d = z + (rz_new / rz) * d;
    rz = rz_new;
  }
  throw MaxIterations("conjugate gradients did not reach the requested tolerance", report);
}

namespace {

using CscMatrix = Eigen::SparseMatrix<double>;

// Supernodal factorization hands dense blocks to the system BLAS. Some
// optimized BLAS kernels misbehave on some CPUs, so the supernodal path is
// only used when it solves a known system correctly.
bool probe_supernodal() {
  constexpr int k = 60;
  std::vector<Eigen::Triplet<double>> trip;
  auto id = [](int i, int j) { return i * k + j; };
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      trip.emplace_back(id(i, j), id(i, j), 4.5);
      if (i > 0) trip.emplace_back(id(i, j), id(i - 1, j), -1.0);
      if (j > 0) trip.emplace_back(id(i, j), id(i, j - 1), -1.0);
    }
  }
  CscMatrix lower(k * k, k * k);
  lower.setFromTriplets(trip.begin(), trip.end());
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(k * k, -1.0, 1.0);
  const Eigen::VectorXd b = lower.selfadjointView<Eigen::Lower>() * x;
  Eigen::CholmodSupernodalLLT<CscMatrix, Eigen::Lower> llt;
  llt.cholmod().print = 0;
  llt.compute(lower);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd y = llt.solve(b);
  return (y - x).cwiseAbs().maxCoeff() < 1e-10;
}

bool supernodal_usable() {
  static const bool ok = probe_supernodal();
  return ok;
}

}  // namespace

struct CholeskySolver::Impl {
  bool supernodal = supernodal_usable();
  Eigen::CholmodSupernodalLLT<CscMatrix, Eigen::Lower> super;
  Eigen::CholmodSimplicialLLT<CscMatrix, Eigen::Lower> simple;
  bool analyzed = false;
  Eigen::Index n = 0;
  Eigen::Index nnz = 0;

  template <class F>
  auto visit(F&& f) {
    return supernodal ? f(super) : f(simple);
  }
};

CholeskySolver::CholeskySolver() : impl_(std::make_unique<Impl>()) {}
CholeskySolver::~CholeskySolver() = default;

void CholeskySolver::factorize(const SparseMatrix& a) {
  // CSR of a symmetric matrix is the CSC of the same matrix.
  const Eigen::Map<const CscMatrix> csc(a.rows(), a.cols(), a.nonZeros(), a.outerIndexPtr(), a.innerIndexPtr(),
                                        a.valuePtr());
  const CscMatrix lower = csc.triangularView<Eigen::Lower>();
  const bool reanalyze = !impl_->analyzed || impl_->n != a.rows() || impl_->nnz != lower.nonZeros();
  const bool ok = impl_->visit([&](auto& llt) {
    if (reanalyze) llt.analyzePattern(lower);
    llt.factorize(lower);
    return llt.info() == Eigen::Success;
  });
  impl_->analyzed = true;
  impl_->n = a.rows();
  impl_->nnz = lower.nonZeros();
  if (!ok) throw Error("sparse Cholesky factorization failed (matrix not SPD)");
}

Vector CholeskySolver::solve(const Vector& b) const {
  return impl_->visit([&](auto& llt) -> Vector { return llt.solve(b); });
}

bool CholeskySolver::supernodal() const { return impl_->supernodal; }

std::pair<Vector, LinearSolveReport> solve_spd(const SparseMatrix& a, const Vector& b, double tol,
                                               std::optional<SolveMethod> method) {
  const SolveMethod m = method.value_or(a.rows() <= kDirectSolveThreshold ? SolveMethod::direct : SolveMethod::cg);
  if (m == SolveMethod::cg) return conjugate_gradient(a, b, tol, static_cast<int>(10 * a.rows()));

  CholeskySolver chol;
  chol.factorize(a);
  Vector x = chol.solve(b);
  LinearSolveReport report{1, 0.0, SolveMethod::direct};
  const double bnorm = b.norm();
  report.relative_residual = bnorm > 0.0 ? (b - a * x).norm() / bnorm : 0.0;
  if (report.relative_residual > tol) {
    // One step of iterative refinement recovers accuracy lost to conditioning.
    x += chol.solve(b - a * x);
    report.iterations = 2;
    report.relative_residual = (b - a * x).norm() / bnorm;
  }
  return {x, report};
}

void pin_dirichlet(SparseMatrix& a, const FeSpace& space) {
  for (Eigen::Index row = 0; row < a.outerSize(); ++row) {
    const bool row_fixed = space.is_boundary_dof(static_cast<int>(row));
    for (SparseMatrix::InnerIterator it(a, row); it; ++it) {
      const bool col_fixed = space.is_boundary_dof(static_cast<int>(it.col()));
      if (row_fixed || col_fixed) it.valueRef() = (it.col() == row) ? 1.0 : 0.0;
    }
  }
}

}  // namespace plheat
