#include "plheat/fespace.hpp"

#include <cassert>
#include <iomanip>
#include <ostream>

#include "plheat/errors.hpp"

namespace plheat {

namespace {

// P_i(l) = prod_{j<i} (r l - j) / (j + 1): equals 1 at l = i/r and vanishes at 0, 1/r, ..., (i-1)/r.
double silvester(int r, int i, double l) {
  double v = 1.0;
  for (int j = 0; j < i; ++j) v *= (r * l - j) / (j + 1.0);
  return v;
}

double silvester_derivative(int r, int i, double l) {
  double d = 0.0;
  for (int m = 0; m < i; ++m) {
    double term = r / (m + 1.0);
    for (int j = 0; j < i; ++j) {
      if (j != m) term *= (r * l - j) / (j + 1.0);
    }
    d += term;
  }
  return d;
}

}  // namespace

LagrangeElement::LagrangeElement(int degree) : degree_(degree) {
  if (degree < 1 || degree > 3) {
    throw UnsupportedDegree("Lagrange degree must be 1, 2 or 3, got " + std::to_string(degree));
  }
  const int r = degree;
  for (int k = 0; k < 3; ++k) {
    std::array<int, 3> a{0, 0, 0};
    a[k] = r;
    nodes_.push_back(a);
  }
  for (int k = 0; k < 3; ++k) {
    for (int j = 1; j < r; ++j) {
      std::array<int, 3> a{0, 0, 0};
      a[k] = r - j;
      a[(k + 1) % 3] = j;
      nodes_.push_back(a);
    }
  }
  for (int a0 = 1; a0 < r; ++a0) {
    for (int a1 = 1; a0 + a1 < r; ++a1) nodes_.push_back({a0, a1, r - a0 - a1});
  }
}

void LagrangeElement::values(const std::array<double, 3>& lambda, std::span<double> out) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    out[i] = silvester(degree_, a[0], lambda[0]) * silvester(degree_, a[1], lambda[1]) *
             silvester(degree_, a[2], lambda[2]);
  }
}

void LagrangeElement::lambda_derivatives(const std::array<double, 3>& lambda, std::span<double> out) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    std::array<double, 3> p{}, dp{};
    for (int k = 0; k < 3; ++k) {
      p[k] = silvester(degree_, a[k], lambda[k]);
      dp[k] = silvester_derivative(degree_, a[k], lambda[k]);
    }
    out[3 * i + 0] = dp[0] * p[1] * p[2];
    out[3 * i + 1] = p[0] * dp[1] * p[2];
    out[3 * i + 2] = p[0] * p[1] * dp[2];
  }
}

FeSpace::FeSpace(MeshPtr mesh, int degree) : mesh_(std::move(mesh)), element_(degree) {
  const Mesh& m = *mesh_;
  const int r = degree;
  const int nloc = element_.num_local();
  const std::size_t nv = m.num_vertices(), ne = m.num_edges(), nt = m.num_triangles();
  const int per_edge = r - 1;
  const int per_cell = nloc - 3 - 3 * per_edge;
  const std::size_t ndof = nv + ne * per_edge + nt * per_cell;

  dof_coords_.resize(ndof);
  is_boundary_.assign(ndof, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    dof_coords_[v] = m.vertices()[v];
    is_boundary_[v] = m.vertex_on_boundary()[v];
  }
  for (std::size_t e = 0; e < ne; ++e) {
    const Point a = m.vertices()[m.edges()[e][0]], b = m.vertices()[m.edges()[e][1]];
    for (int j = 1; j <= per_edge; ++j) {
      const std::size_t dof = nv + e * per_edge + (j - 1);
      const double s = static_cast<double>(j) / r;
      dof_coords_[dof] = (1.0 - s) * a + s * b;
      is_boundary_[dof] = m.edge_on_boundary()[e];
    }
  }

  cell_dofs_.resize(nt * nloc);
  geometry_.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = m.triangles()[t];
    int* dofs = cell_dofs_.data() + t * nloc;
    for (int k = 0; k < 3; ++k) dofs[k] = tri[k];
    for (int k = 0; k < 3; ++k) {
      const int e = m.triangle_edges()[t][k];
      const bool same = m.edges()[e][0] == tri[k];
      for (int j = 0; j < per_edge; ++j) {
        const int gj = same ? j : per_edge - 1 - j;
        dofs[3 + k * per_edge + j] = static_cast<int>(nv + e * per_edge + gj);
      }
    }
    for (int j = 0; j < per_cell; ++j) {
      const std::size_t dof = nv + ne * per_edge + t * per_cell + j;
      dofs[3 + 3 * per_edge + j] = static_cast<int>(dof);
      const auto& a = element_.node_indices()[3 + 3 * per_edge + j];
      dof_coords_[dof] = map_to_physical(t, {double(a[0]) / r, double(a[1]) / r, double(a[2]) / r});
    }

    const auto [p0, p1, p2] = m.corners(t);
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    TriangleGeometry& g = geometry_[t];
    g.area = 0.5 * det;
    // grad lambda_k = rot90(opposite edge) / det
    g.grad_lambda[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
    g.grad_lambda[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
    g.grad_lambda[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
  }

  for (std::size_t i = 0; i < ndof; ++i) {
    if (is_boundary_[i]) boundary_dofs_.push_back(static_cast<int>(i));
  }
}

Point FeSpace::map_to_physical(std::size_t t, const std::array<double, 3>& lambda) const {
  const auto [a, b, c] = mesh_->corners(t);
  return {lambda[0] * a.x + lambda[1] * b.x + lambda[2] * c.x, lambda[0] * a.y + lambda[1] * b.y + lambda[2] * c.y};
}

FeSpace::Tabulation FeSpace::tabulate(const QuadratureRule& rule) const {
  const int nloc = dofs_per_cell();
  Tabulation tab;
  tab.values.resize(rule.size() * nloc);
  tab.dlambda.resize(rule.size() * nloc * 3);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    element_.values(rule.points[q], std::span(tab.values).subspan(q * nloc, nloc));
    element_.lambda_derivatives(rule.points[q], std::span(tab.dlambda).subspan(q * nloc * 3, nloc * 3));
  }
  return tab;
}

FeSpacePtr build_space(MeshPtr mesh, int degree) { return std::make_shared<const FeSpace>(std::move(mesh), degree); }

Gradient combine_gradient(const TriangleGeometry& geo, std::span<const double> dlambda, std::span<const double> local,
                          int nloc) {
  std::array<double, 3> dl{0.0, 0.0, 0.0};
  for (int i = 0; i < nloc; ++i) {
    dl[0] += local[i] * dlambda[3 * i];
    dl[1] += local[i] * dlambda[3 * i + 1];
    dl[2] += local[i] * dlambda[3 * i + 2];
  }
  Gradient g{0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    g[0] += dl[k] * geo.grad_lambda[k][0];
    g[1] += dl[k] * geo.grad_lambda[k][1];
  }
  return g;
}

double eval(const FeFunction& f, std::size_t t, const std::array<double, 3>& lambda) {
  const FeSpace& s = *f.space;
  std::array<double, 10> phi{};
  s.element().values(lambda, std::span(phi).first(s.dofs_per_cell()));
  double v = 0.0;
  const auto dofs = s.cell_dofs(t);
  for (std::size_t i = 0; i < dofs.size(); ++i) v += f.coeffs[dofs[i]] * phi[i];
  return v;
}

Gradient eval_gradient(const FeFunction& f, std::size_t t, const std::array<double, 3>& lambda) {
  const FeSpace& s = *f.space;
  const int nloc = s.dofs_per_cell();
  std::array<double, 30> dl{};
  s.element().lambda_derivatives(lambda, std::span(dl).first(3 * nloc));
  std::array<double, 10> local{};
  const auto dofs = s.cell_dofs(t);
  for (int i = 0; i < nloc; ++i) local[i] = f.coeffs[dofs[i]];
  return combine_gradient(s.geometry(t), dl, local, nloc);
}

void write_function(std::ostream& out, const FeFunction& f) {
  out << "ndof " << f.space->ndof() << " degree " << f.space->degree() << " level " << f.space->mesh().level()
      << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < f.coeffs.size(); ++i) out << f.coeffs[i] << '\n';
}

}  // namespace plheat
