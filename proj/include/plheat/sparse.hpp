#pragma once

#include <Eigen/SparseCore>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "plheat/errors.hpp"
#include "plheat/fespace.hpp"

namespace plheat {

/// Compressed row storage; the FE sparsity pattern is fixed at construction.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Sparsity pattern of a space together with, for every cell, the CSR slot of
/// each local (i, j) pair. Assembly writes through these slots so repeated
/// assembly over one space never touches the index arrays.
class SparsityPattern {
 public:
  explicit SparsityPattern(FeSpacePtr space);

  const FeSpace& space() const { return *space_; }
  const FeSpacePtr& space_ptr() const { return space_; }
  /// Zero-valued matrix with this pattern.
  SparseMatrix make_matrix() const { return zero_; }
  std::span<const int> cell_slots(std::size_t t) const {
    const std::size_t n = static_cast<std::size_t>(nloc_) * nloc_;
    return {slots_.data() + t * n, n};
  }

 private:
  FeSpacePtr space_;
  int nloc_;
  SparseMatrix zero_;
  std::vector<int> slots_;
};

using PatternPtr = std::shared_ptr<const SparsityPattern>;

enum class SolveMethod { cg, direct };

struct LinearSolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  SolveMethod method = SolveMethod::direct;
};

class MaxIterations : public Error {
 public:
  MaxIterations(const std::string& what, LinearSolveReport report) : Error(what), report_(report) {}
  const LinearSolveReport& report() const { return report_; }

 private:
  LinearSolveReport report_;
};

/// Systems up to this size are factorized; larger ones use preconditioned CG.
constexpr Eigen::Index kDirectSolveThreshold = 400000;
constexpr double kDefaultLinearTolerance = 1e-11;

/// Solves A x = b for SPD A. Diagonal-preconditioned CG (at most 10 n
/// iterations, else MaxIterations) or a sparse Cholesky factorization below
/// kDirectSolveThreshold unknowns unless a method is forced.
std::pair<Vector, LinearSolveReport> solve_spd(const SparseMatrix& a, const Vector& b,
                                               double tol = kDefaultLinearTolerance,
                                               std::optional<SolveMethod> method = std::nullopt);

/// Preconditioned conjugate gradients with the diagonal (Jacobi) preconditioner.
std::pair<Vector, LinearSolveReport> conjugate_gradient(const SparseMatrix& a, const Vector& b, double tol,
                                                        int max_iterations);

/// Sparse Cholesky that reuses its symbolic analysis across matrices sharing
/// one sparsity pattern.
class CholeskySolver {
 public:
  CholeskySolver();
  ~CholeskySolver();
  CholeskySolver(const CholeskySolver&) = delete;
  CholeskySolver& operator=(const CholeskySolver&) = delete;

  /// Throws Error when the matrix is not positive definite.
  void factorize(const SparseMatrix& a);
  Vector solve(const Vector& b) const;
  /// True when the BLAS-backed supernodal factorization is in use.
  bool supernodal() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Pins the rows and columns of the boundary DOFs of `space`: off-diagonals
/// zeroed, diagonal set to 1. Symmetry is preserved; callers move known values
/// to the right-hand side.
void pin_dirichlet(SparseMatrix& a, const FeSpace& space);

}  // namespace plheat
