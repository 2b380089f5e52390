#include "plheat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

#include "plheat/errors.hpp"

namespace plheat {

namespace {

constexpr double kLocateTolerance = 1e-10;

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool on_open_cut(Point x) { return std::abs(x.y) <= kLocateTolerance && x.x < -kLocateTolerance; }

}  // namespace

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::unit_square:
      return "unit_square";
    case Domain::centered_square:
      return "centered_square";
    case Domain::shifted_square:
      return "shifted_square";
    case Domain::slit:
      return "slit";
  }
  return "unknown";
}

std::optional<Domain> parse_domain(std::string_view name) {
  for (Domain d : {Domain::unit_square, Domain::centered_square, Domain::shifted_square, Domain::slit}) {
    if (to_string(d) == name) return d;
  }
  if (name == "omega1") return Domain::centered_square;
  if (name == "omega2") return Domain::shifted_square;
  return std::nullopt;
}

double domain_area(Domain d) { return d == Domain::unit_square ? 1.0 : 4.0; }

Mesh::Mesh(Domain domain, std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles, int level,
           std::shared_ptr<const Mesh> parent)
    : domain_(domain),
      vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      level_(level),
      parent_(std::move(parent)) {
  for (auto& tri : triangles_) {
    const Point a = vertices_[tri[0]], b = vertices_[tri[1]], c = vertices_[tri[2]];
    const double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (det < 0.0) std::swap(tri[1], tri[2]);
  }
  build_topology();
}

void Mesh::build_topology() {
  std::map<std::pair<int, int>, int> edge_index;
  std::vector<int> edge_use;
  triangle_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = triangles_[t][k], b = triangles_[t][(k + 1) % 3];
      auto key = std::minmax(a, b);
      auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({key.first, key.second});
        edge_use.push_back(0);
      }
      ++edge_use[it->second];
      triangle_edges_[t][k] = it->second;
    }
  }

  edge_on_boundary_.assign(edges_.size(), 0);
  vertex_on_boundary_.assign(vertices_.size(), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_use[e] > 2) throw Error("mesh is not conforming: edge shared by more than two triangles");
    if (edge_use[e] != 1) continue;
    edge_on_boundary_[e] = 1;
    const auto [a, b] = edges_[e];
    vertex_on_boundary_[a] = vertex_on_boundary_[b] = 1;
    BoundaryTag tag = BoundaryTag::outer;
    if (domain_ == Domain::slit) {
      const Point pa = vertices_[a], pb = vertices_[b];
      if (pa.y == 0.0 && pb.y == 0.0 && pa.x <= 0.0 && pb.x <= 0.0) tag = BoundaryTag::slit;
    }
    boundary_edges_.push_back({{a, b}, tag});
  }
}

std::array<Point, 3> Mesh::corners(std::size_t t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double Mesh::signed_area(std::size_t t) const {
  const auto [a, b, c] = corners(t);
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double Mesh::diameter(std::size_t t) const {
  const auto [a, b, c] = corners(t);
  return std::max({distance(a, b), distance(b, c), distance(c, a)});
}

Point Mesh::centroid(std::size_t t) const {
  const auto [a, b, c] = corners(t);
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

int Mesh::ancestor(std::size_t t, int coarse_level) const {
  if (coarse_level > level_ || coarse_level < 0) throw IncompatibleHierarchy("ancestor level out of range");
  std::size_t idx = t;
  const Mesh* m = this;
  while (m->level_ > coarse_level) {
    if (!m->parent_) throw IncompatibleHierarchy("mesh has no parent at the requested level");
    idx /= 4;
    m = m->parent_.get();
  }
  return static_cast<int>(idx);
}

std::array<double, 3> barycentric(const Mesh& mesh, std::size_t t, Point x) {
  const auto [a, b, c] = mesh.corners(t);
  const double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double l1 = ((x.x - a.x) * (c.y - a.y) - (x.y - a.y) * (c.x - a.x)) / det;
  const double l2 = ((b.x - a.x) * (x.y - a.y) - (b.y - a.y) * (x.x - a.x)) / det;
  return {1.0 - l1 - l2, l1, l2};
}

namespace {

// Picks the candidate in which x is "most inside"; on the open cut only
// triangles on the requested side qualify.
int best_candidate(const Mesh& mesh, std::size_t begin, std::size_t end, Point x, SlitSide side) {
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  const bool cut = mesh.domain() == Domain::slit && on_open_cut(x);
  for (std::size_t t = begin; t < end; ++t) {
    const auto lam = barycentric(mesh, t, x);
    const double score = std::min({lam[0], lam[1], lam[2]});
    if (score < -kLocateTolerance) continue;
    if (cut && side != SlitSide::none) {
      const bool upper = mesh.centroid(t).y > 0.0;
      if (upper != (side == SlitSide::upper)) continue;
    }
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(t);
    }
  }
  return best;
}

}  // namespace

PointLocation Mesh::locate_point(Point x, SlitSide side) const {
  if (domain_ == Domain::slit && on_open_cut(x) && side == SlitSide::none) {
    throw std::invalid_argument("point on the slit requires a side hint");
  }
  int t = -1;
  if (!parent_) {
    t = best_candidate(*this, 0, triangles_.size(), x, side);
  } else {
    const PointLocation coarse = parent_->locate_point(x, side);
    t = best_candidate(*this, 4 * static_cast<std::size_t>(coarse.triangle),
                       4 * static_cast<std::size_t>(coarse.triangle) + 4, x, side);
  }
  if (t < 0) throw PointOutsideDomain("point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") outside mesh");

  auto lam = barycentric(*this, t, x);
  double sum = 0.0;
  for (double& l : lam) {
    l = std::clamp(l, 0.0, 1.0);
    sum += l;
  }
  for (double& l : lam) l /= sum;
  return {t, lam};
}

MeshPtr make_initial_mesh(Domain domain) {
  std::vector<Point> v;
  std::vector<std::array<int, 3>> t;
  switch (domain) {
    case Domain::unit_square:
      v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
      t = {{0, 1, 2}, {0, 2, 3}};
      break;
    case Domain::centered_square:
    case Domain::shifted_square: {
      const double x0 = domain == Domain::centered_square ? -1.0 : 1.0;
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) v.push_back({x0 + i, -1.0 + j});
      for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
          const int a = 3 * j + i, b = a + 1, c = a + 4, d = a + 3;
          t.push_back({a, b, c});
          t.push_back({a, c, d});
        }
      }
      break;
    }
    case Domain::slit:
      // 7, 8: upper copies of (-1,0), (-1/2,0); 10, 11: lower copies.
      v = {{-1, -1}, {0, -1}, {1, -1}, {1, 0},    {1, 1},     {0, 1},
           {-1, 1},  {-1, 0}, {-0.5, 0}, {0, 0}, {-1, 0}, {-0.5, 0}};
      t = {{9, 3, 4},  {9, 4, 5},  {7, 8, 6},  {8, 9, 5},  {8, 5, 6},
           {9, 1, 2},  {9, 2, 3},  {10, 11, 0}, {11, 9, 1}, {11, 1, 0}};
      break;
  }
  return std::make_shared<const Mesh>(domain, std::move(v), std::move(t));
}

MeshPtr refine_uniform(const MeshPtr& mesh) {
  const auto& verts = mesh->vertices();
  const int nv = static_cast<int>(verts.size());
  std::vector<Point> v = verts;
  v.reserve(verts.size() + mesh->num_edges());
  for (const auto& e : mesh->edges()) v.push_back(0.5 * (verts[e[0]] + verts[e[1]]));

  std::vector<std::array<int, 3>> t;
  t.reserve(4 * mesh->num_triangles());
  for (std::size_t k = 0; k < mesh->num_triangles(); ++k) {
    const auto& tri = mesh->triangles()[k];
    const auto& te = mesh->triangle_edges()[k];
    const int m01 = nv + te[0], m12 = nv + te[1], m20 = nv + te[2];
    t.push_back({tri[0], m01, m20});
    t.push_back({m01, tri[1], m12});
    t.push_back({m20, m12, tri[2]});
    t.push_back({m12, m20, m01});
  }
  return std::make_shared<const Mesh>(mesh->domain(), std::move(v), std::move(t), mesh->level() + 1, mesh);
}

MeshPtr make_mesh(Domain domain, int level) {
  MeshPtr m = make_initial_mesh(domain);
  for (int l = 0; l < level; ++l) m = refine_uniform(m);
  return m;
}

std::vector<MeshPtr> make_hierarchy(Domain domain, int finest_level) {
  std::vector<MeshPtr> levels{make_initial_mesh(domain)};
  for (int l = 0; l < finest_level; ++l) levels.push_back(refine_uniform(levels.back()));
  return levels;
}

MeshQuality mesh_quality(const Mesh& mesh) {
  MeshQuality q;
  q.h_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto [a, b, c] = mesh.corners(t);
    const double perimeter = distance(a, b) + distance(b, c) + distance(c, a);
    const double inradius = 2.0 * std::abs(mesh.signed_area(t)) / perimeter;
    const double h = mesh.diameter(t);
    q.h_max = std::max(q.h_max, h);
    q.h_min = std::min(q.h_min, h);
    q.gamma = std::max(q.gamma, h / (2.0 * inradius));
  }
  q.quasi_uniformity_ratio = q.h_max / q.h_min;
  return q;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "vertices " << mesh.num_vertices() << " triangles " << mesh.num_triangles() << '\n';
  out << std::setprecision(17);
  for (const Point& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace plheat
