#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace plheat {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

enum class Domain {
  unit_square,      // (0,1)^2
  centered_square,  // (-1,1)^2, origin is a vertex
  shifted_square,   // (1,3) x (-1,1)
  slit,             // (-1,1)^2 minus (-1,0] x {0}
};

std::string_view to_string(Domain d);
std::optional<Domain> parse_domain(std::string_view name);
/// Lebesgue measure of the domain.
double domain_area(Domain d);

enum class BoundaryTag { outer = 0, slit = 1 };

struct BoundaryEdge {
  std::array<int, 2> vertices;
  BoundaryTag tag = BoundaryTag::outer;
};

/// Side of the cut used to resolve point queries lying on the slit.
enum class SlitSide { none, upper, lower };

struct PointLocation {
  int triangle = -1;
  std::array<double, 3> barycentric{};
};

struct MeshQuality {
  double h_max = 0.0;
  double h_min = 0.0;
  double gamma = 0.0;  // max h_T / rho_T
  double quasi_uniformity_ratio = 0.0;
};

/// Conforming, positively oriented triangulation of a polygonal domain.
///
/// Level-k meshes obtained by `refine_uniform` keep a handle to their parent;
/// children of parent triangle t are stored at indices 4t..4t+3. Local edge k
/// of a triangle joins local vertices k and (k+1)%3.
///
/// Slit meshes carry two copies of every vertex on the open cut, one used by
/// the triangles above and one by the triangles below.
class Mesh {
 public:
  Mesh(Domain domain, std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
       int level = 0, std::shared_ptr<const Mesh> parent = nullptr);

  Domain domain() const { return domain_; }
  int level() const { return level_; }
  const std::shared_ptr<const Mesh>& parent() const { return parent_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  /// Unique edges as (smaller, larger) vertex index pairs.
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  /// Global edge index of local edge k of every triangle.
  const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  /// Per-edge flag: true iff the edge lies on the boundary.
  const std::vector<char>& edge_on_boundary() const { return edge_on_boundary_; }
  /// Per-vertex flag: true iff the vertex lies on a boundary edge.
  const std::vector<char>& vertex_on_boundary() const { return vertex_on_boundary_; }

  std::array<Point, 3> corners(std::size_t t) const;
  double signed_area(std::size_t t) const;
  double diameter(std::size_t t) const;
  Point centroid(std::size_t t) const;

  /// Index of the parent triangle, or -1 on a root mesh.
  int parent_triangle(std::size_t t) const { return parent_ ? static_cast<int>(t / 4) : -1; }

  /// Ancestor of triangle t on the given coarser level of the same hierarchy.
  int ancestor(std::size_t t, int coarse_level) const;

  PointLocation locate_point(Point x, SlitSide side = SlitSide::none) const;

 private:
  void build_topology();

  Domain domain_;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<char> edge_on_boundary_;
  std::vector<char> vertex_on_boundary_;
  int level_ = 0;
  std::shared_ptr<const Mesh> parent_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Coarse template of a domain.
///
/// unit_square: 2 triangles split along the (0,0)-(1,1) diagonal.
/// centered_square / shifted_square: 2x2 squares, each split along its
/// lower-left to upper-right diagonal (8 triangles, 9 vertices).
/// slit: 12 vertices, 10 triangles; (-1,0) and (-1/2,0) are duplicated and
/// every vertex lies on the boundary.
MeshPtr make_initial_mesh(Domain domain);

/// Red refinement: each triangle split into 4 similar children via edge midpoints.
MeshPtr refine_uniform(const MeshPtr& mesh);

/// Initial mesh refined `level` times.
MeshPtr make_mesh(Domain domain, int level);

/// All levels 0..finest_level of one hierarchy.
std::vector<MeshPtr> make_hierarchy(Domain domain, int finest_level);

MeshQuality mesh_quality(const Mesh& mesh);

/// Barycentric coordinates of x with respect to triangle t.
std::array<double, 3> barycentric(const Mesh& mesh, std::size_t t, Point x);

/// Plain-text dump: `vertices <n> triangles <m>`, then `x y` lines, then `i j k` lines.
void write_mesh(std::ostream& out, const Mesh& mesh);

}  // namespace plheat
