#pragma once

#include <functional>
#include <vector>

#include "plheat/assembly.hpp"
#include "plheat/constitutive.hpp"
#include "plheat/fields.hpp"
#include "plheat/fespace.hpp"
#include "plheat/timegrid.hpp"

namespace plheat {

using SpatialField = std::function<double(Point)>;

/// L2 projection onto the full (unconstrained) space: M c = (g, phi_i) with the
/// load integrated at exactness 2r + 2.
FeFunction l2_project(const FeSpacePtr& space, const SpatialField& g);
/// Same, with g given at the assembly quadrature points.
FeFunction l2_project(const FeSpacePtr& space, const QuadratureField& g);

/// Coefficients equal to g at the DOF nodes. Throws NonFiniteValue.
FeFunction nodal_interpolate(const FeSpacePtr& space, const SpatialField& g);

enum class BoundaryMode { homogeneous, averaged_nodal };

/// Dirichlet values of one step, one entry per DOF in space.boundary_dofs() order.
struct BoundaryData {
  BoundaryMode mode = BoundaryMode::homogeneous;
  std::vector<double> values;

  /// Full-length vector with the boundary entries set and zeros elsewhere.
  Vector expand(const FeSpace& space) const;
};

BoundaryData homogeneous_boundary(const FeSpace& space);

/// Window mean (1/|J_m|) int_{J_m} u(x_b, s) ds at every boundary node x_b.
/// Separable power-law factors are integrated exactly; other time factors use
/// 5-point Gauss per half of J_m, split at s = 0.
BoundaryData averaged_boundary_values(const FeSpace& space, const ScalarField& u_exact, int m, const TimeGrid& grid);

/// Spatial decay of the L2 projection of a localized input.
struct DecayReport {
  bool applicable = true;
  double q_fit = 0.0;  // fitted decay factor per layer of neighbours
  double c_fit = 0.0;
  std::vector<double> layer_max;  // max |Pi_2 v| over triangles at graph distance k
};

/// Projects the indicator of one triangle near the middle of the mesh (or a
/// constant when `constant_input`), bins max |Pi_2 v| by edge-graph distance
/// from the source triangle and fits log(max) = log(c) + k log(q).
DecayReport verify_l2_decay(const FeSpacePtr& space, bool constant_input = false);

struct StabilityReport {
  std::vector<double> h;
  std::vector<double> error;  // ||V(grad v) - V(grad Pi_2 v)||_{L2}
  double order = 0.0;         // least-squares slope of log(error) against log(h)
};

/// ||V(grad v) - V(grad Pi_2 v)|| across the given refinement levels.
StabilityReport verify_v_stability(Domain domain, int degree, const std::vector<int>& levels, const SpatialField& v,
                                   const std::function<Vec2(Point)>& grad_v, const PLaplaceParams& params);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace plheat
