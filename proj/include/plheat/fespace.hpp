#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "plheat/mesh.hpp"
#include "plheat/quadrature.hpp"

namespace plheat {

using Vector = Eigen::VectorXd;
using Gradient = std::array<double, 2>;

/// Lagrange shape functions of degree r on the reference triangle, written
/// in barycentric coordinates. Local node order: the three vertices, then
/// r-1 nodes per edge (edge k runs from vertex k to vertex k+1), then interior
/// nodes in lexicographic order.
class LagrangeElement {
 public:
  explicit LagrangeElement(int degree);

  int degree() const { return degree_; }
  int num_local() const { return static_cast<int>(nodes_.size()); }
  const std::vector<std::array<int, 3>>& node_indices() const { return nodes_; }

  void values(const std::array<double, 3>& lambda, std::span<double> out) const;
  /// d phi_i / d lambda_k, stored as out[3*i + k].
  void lambda_derivatives(const std::array<double, 3>& lambda, std::span<double> out) const;

 private:
  int degree_;
  std::vector<std::array<int, 3>> nodes_;  // r * barycentric coordinates
};

/// Per-triangle affine geometry: area and the (constant) gradients of the
/// barycentric coordinates.
struct TriangleGeometry {
  double area = 0.0;
  std::array<Gradient, 3> grad_lambda{};
};

/// Continuous degree-r Lagrange space on a mesh (r = 1, 2, 3).
///
/// DOF numbering is hierarchical: vertex DOFs carry the vertex index, edge
/// DOFs follow (ordered along the edge from its smaller to its larger vertex
/// index), interior DOFs come last.
class FeSpace {
 public:
  FeSpace(MeshPtr mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int degree() const { return element_.degree(); }
  const LagrangeElement& element() const { return element_; }
  std::size_t ndof() const { return dof_coords_.size(); }
  int dofs_per_cell() const { return element_.num_local(); }

  std::span<const int> cell_dofs(std::size_t t) const {
    return {cell_dofs_.data() + t * dofs_per_cell(), static_cast<std::size_t>(dofs_per_cell())};
  }
  const std::vector<Point>& dof_coords() const { return dof_coords_; }
  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
  bool is_boundary_dof(int i) const { return is_boundary_[i] != 0; }
  std::size_t num_interior_dofs() const { return ndof() - boundary_dofs_.size(); }
  const TriangleGeometry& geometry(std::size_t t) const { return geometry_[t]; }

  Point map_to_physical(std::size_t t, const std::array<double, 3>& lambda) const;

  /// Basis values/gradients of the element's shape functions at the points
  /// of a quadrature rule, tabulated once per rule.
  struct Tabulation {
    std::vector<double> values;       // [q * nloc + i]
    std::vector<double> dlambda;      // [(q * nloc + i) * 3 + k]
  };
  Tabulation tabulate(const QuadratureRule& rule) const;

 private:
  MeshPtr mesh_;
  LagrangeElement element_;
  std::vector<int> cell_dofs_;
  std::vector<Point> dof_coords_;
  std::vector<int> boundary_dofs_;
  std::vector<char> is_boundary_;
  std::vector<TriangleGeometry> geometry_;
};

using FeSpacePtr = std::shared_ptr<const FeSpace>;

/// Throws UnsupportedDegree unless degree is 1, 2 or 3.
FeSpacePtr build_space(MeshPtr mesh, int degree);

/// Coefficient vector over a space.
struct FeFunction {
  FeSpacePtr space;
  Vector coeffs;

  FeFunction() = default;
  explicit FeFunction(FeSpacePtr s) : space(std::move(s)), coeffs(Vector::Zero(space->ndof())) {}
  FeFunction(FeSpacePtr s, Vector c) : space(std::move(s)), coeffs(std::move(c)) {}
};

double eval(const FeFunction& f, std::size_t t, const std::array<double, 3>& lambda);
Gradient eval_gradient(const FeFunction& f, std::size_t t, const std::array<double, 3>& lambda);

/// Physical gradient of the local shape functions combined with coefficients.
Gradient combine_gradient(const TriangleGeometry& geo, std::span<const double> dlambda, std::span<const double> local,
                          int nloc);

/// Dump: `ndof <n> degree <r> level <k>`, then one coefficient per line.
void write_function(std::ostream& out, const FeFunction& f);

}  // namespace plheat
