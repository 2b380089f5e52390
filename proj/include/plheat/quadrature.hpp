#pragma once

#include <array>
#include <vector>

namespace plheat {

/// Quadrature on the reference triangle; points are barycentric coordinates
/// and weights are normalized to sum to one (i.e. relative to the triangle area).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Collapsed (conical product) Gauss rule exact for polynomials of total
/// degree <= d, 1 <= d <= 20. Gauss-Jacobi in the collapsed direction,
/// Gauss-Legendre in the other; all weights positive. d = 1 is the centroid rule.
/// Rules are built once and cached.
const QuadratureRule& triangle_quadrature(int exactness_degree);

/// Gauss-Legendre rule with n points on [0,1]; weights sum to one.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const LineRule& gauss_legendre(int n);

}  // namespace plheat
