#include "plheat/projection.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "plheat/errors.hpp"
#include "plheat/sparse.hpp"

namespace plheat {

namespace {

constexpr double kProjectionTolerance = 1e-13;

double fit_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept = nullptr) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (intercept) *intercept = (sy - slope * sx) / n;
  return slope;
}

}  // namespace

FeFunction l2_project(const FeSpacePtr& space, const QuadratureField& g) {
  const SparseMatrix m = assemble_mass(space);
  const Vector b = assemble_load(*space, g);
  return FeFunction(space, solve_spd(m, b, kProjectionTolerance).first);
}

FeFunction l2_project(const FeSpacePtr& space, const SpatialField& g) {
  return l2_project(space, sample_field(*space, g));
}

FeFunction nodal_interpolate(const FeSpacePtr& space, const SpatialField& g) {
  FeFunction f(space);
  for (std::size_t i = 0; i < space->ndof(); ++i) {
    const double v = g(space->dof_coords()[i]);
    if (!std::isfinite(v)) throw NonFiniteValue("interpolated field is not finite at a DOF node");
    f.coeffs[static_cast<Eigen::Index>(i)] = v;
  }
  return f;
}

Vector BoundaryData::expand(const FeSpace& space) const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space.ndof()));
  const auto& dofs = space.boundary_dofs();
  if (values.size() != dofs.size()) throw SpaceMismatch("boundary data does not match the space");
  for (std::size_t k = 0; k < dofs.size(); ++k) v[dofs[k]] = values[k];
  return v;
}

BoundaryData homogeneous_boundary(const FeSpace& space) {
  return {BoundaryMode::homogeneous, std::vector<double>(space.boundary_dofs().size(), 0.0)};
}

BoundaryData averaged_boundary_values(const FeSpace& space, const ScalarField& u_exact, int m, const TimeGrid& grid) {
  const TimeAverage<double> mean(u_exact, window_pieces(m, grid));
  BoundaryData data{BoundaryMode::averaged_nodal, {}};
  data.values.reserve(space.boundary_dofs().size());
  for (int i : space.boundary_dofs()) data.values.push_back(mean(space.dof_coords()[i]));
  return data;
}

DecayReport verify_l2_decay(const FeSpacePtr& space, bool constant_input) {
  DecayReport report;
  const Mesh& mesh = space->mesh();
  if (constant_input) {
    report.applicable = false;
    return report;
  }
  // Source: the triangle whose centroid is closest to the centre of the bounding box.
  Point lo = mesh.vertices()[0], hi = lo;
  for (const Point& p : mesh.vertices()) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const Point mid = 0.5 * (lo + hi);
  std::size_t source = 0;
  double best = INFINITY;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Point c = mesh.centroid(t);
    const double d = std::hypot(c.x - mid.x, c.y - mid.y);
    if (d < best) {
      best = d;
      source = t;
    }
  }

  QuadratureField g = constant_field(*space, 0.0);
  const std::size_t nq = g.values.size() / mesh.num_triangles();
  std::fill(g.values.begin() + source * nq, g.values.begin() + (source + 1) * nq, 1.0);
  const FeFunction proj = l2_project(space, g);

  // Breadth-first layers over edge neighbours.
  std::vector<std::vector<std::size_t>> by_edge(mesh.num_edges());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    for (int e : mesh.triangle_edges()[t]) by_edge[e].push_back(t);
  std::vector<int> dist(mesh.num_triangles(), -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t t = queue.front();
    queue.pop_front();
    for (int e : mesh.triangle_edges()[t]) {
      for (std::size_t n : by_edge[e]) {
        if (dist[n] < 0) {
          dist[n] = dist[t] + 1;
          queue.push_back(n);
        }
      }
    }
  }
  const int layers = *std::max_element(dist.begin(), dist.end()) + 1;
  report.layer_max.assign(layers, 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (dist[t] < 0) continue;
    for (int i : space->cell_dofs(t)) {
      report.layer_max[dist[t]] = std::max(report.layer_max[dist[t]], std::abs(proj.coeffs[i]));
    }
  }
  // Fit over layers still above roundoff.
  std::vector<double> k, logs;
  const double floor = 1e-13 * report.layer_max[0];
  for (int l = 0; l < layers; ++l) {
    if (report.layer_max[l] <= floor) break;
    k.push_back(l);
    logs.push_back(std::log(report.layer_max[l]));
  }
  if (k.size() < 2) {
    report.applicable = false;
    return report;
  }
  double intercept = 0.0;
  report.q_fit = std::exp(fit_slope(k, logs, &intercept));
  report.c_fit = std::exp(intercept);
  return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientData("slope fit needs at least two points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_slope(lx, ly);
}

StabilityReport verify_v_stability(Domain domain, int degree, const std::vector<int>& levels, const SpatialField& v,
                                   const std::function<Vec2(Point)>& grad_v, const PLaplaceParams& params) {
  StabilityReport report;
  const QuadratureRule& rule = triangle_quadrature(2 * degree + 4);
  for (int level : levels) {
    const FeSpacePtr space = build_space(make_mesh(domain, level), degree);
    const FeFunction proj = l2_project(space, v);
    double sum = 0.0;
    for (std::size_t t = 0; t < space->mesh().num_triangles(); ++t) {
      const double area = space->geometry(t).area;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2 a = v_transform(grad_v(space->map_to_physical(t, rule.points[q])), params);
        const Vec2 b = v_transform(eval_gradient(proj, t, rule.points[q]), params);
        sum += rule.weights[q] * area * ((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]));
      }
    }
    report.h.push_back(mesh_quality(space->mesh()).h_max);
    report.error.push_back(std::sqrt(sum));
  }
  if (report.h.size() >= 2) report.order = loglog_slope(report.h, report.error);
  return report;
}

}  // namespace plheat
