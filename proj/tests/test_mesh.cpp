#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "plheat/errors.hpp"
#include "plheat/mesh.hpp"

using namespace plheat;

namespace {

const Domain kAllDomains[] = {Domain::unit_square, Domain::centered_square, Domain::shifted_square, Domain::slit};

double total_area(const Mesh& m) {
  double a = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) a += m.signed_area(t);
  return a;
}

// Edge use counts straight from the triangle list.
std::map<std::pair<int, int>, int> edge_uses(const Mesh& m) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& tri : m.triangles()) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  }
  return uses;
}

Point random_point(Domain d, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (d) {
    case Domain::unit_square: return {u(rng), u(rng)};
    case Domain::shifted_square: return {1.0 + 2.0 * u(rng), -1.0 + 2.0 * u(rng)};
    default: return {-1.0 + 2.0 * u(rng), -1.0 + 2.0 * u(rng)};
  }
}

}  // namespace

TEST(Mesh, TemplatesAreConformingAndPositivelyOriented) {
  for (Domain d : kAllDomains) {
    for (int level = 0; level <= 3; ++level) {
      const MeshPtr m = make_mesh(d, level);
      for (std::size_t t = 0; t < m->num_triangles(); ++t) EXPECT_GT(m->signed_area(t), 0.0);
      std::size_t boundary = 0;
      for (const auto& [edge, count] : edge_uses(*m)) {
        ASSERT_TRUE(count == 1 || count == 2);
        boundary += count == 1;
      }
      EXPECT_EQ(boundary, m->boundary_edges().size());
      EXPECT_EQ(m->num_edges(), edge_uses(*m).size());
      EXPECT_NEAR(total_area(*m), domain_area(d), 1e-12 * domain_area(d));
    }
  }
}

TEST(Mesh, BoundaryEdgeCountDoublesPerLevel) {
  for (Domain d : kAllDomains) {
    auto h = make_hierarchy(d, 4);
    for (int k = 1; k <= 4; ++k) EXPECT_EQ(h[k]->boundary_edges().size(), 2 * h[k - 1]->boundary_edges().size());
  }
}

TEST(Mesh, EulerFormulaOnSimplyConnectedTemplates) {
  for (Domain d : {Domain::unit_square, Domain::centered_square, Domain::shifted_square}) {
    const MeshPtr m = make_mesh(d, 2);
    EXPECT_EQ(static_cast<long>(m->num_vertices()) - static_cast<long>(m->num_edges()) +
                  static_cast<long>(m->num_triangles()),
              1);
  }
  EXPECT_EQ(make_initial_mesh(Domain::unit_square)->num_triangles(), 2u);
}

TEST(Mesh, SlitDuplicatesCutVertices) {
  for (int level = 0; level <= 3; ++level) {
    const MeshPtr m = make_mesh(Domain::slit, level);
    std::map<std::pair<double, double>, int> copies;
    for (const Point& p : m->vertices()) ++copies[{p.x, p.y}];
    for (const auto& [xy, n] : copies) {
      const auto [x, y] = xy;
      if (y == 0.0 && x < 0.0) {
        EXPECT_EQ(n, 2) << "cut vertex (" << x << ", " << y << ")";
      } else {
        EXPECT_EQ(n, 1) << "vertex (" << x << ", " << y << ")";
      }
    }
    EXPECT_EQ(copies.at({0.0, 0.0}), 1);
    // Both copies lie on slit-tagged boundary edges.
    std::size_t slit_edges = 0;
    for (const auto& e : m->boundary_edges()) slit_edges += e.tag == BoundaryTag::slit;
    EXPECT_EQ(slit_edges, 4u << level);  // two cut segments, two sides
    for (std::size_t v = 0; v < m->num_vertices(); ++v) {
      const Point p = m->vertices()[v];
      if (p.y == 0.0 && p.x < 0.0) EXPECT_TRUE(m->vertex_on_boundary()[v]);
    }
  }
}

TEST(Mesh, OriginIsVertexWhereSingular) {
  for (Domain d : {Domain::centered_square, Domain::slit}) {
    const MeshPtr m = make_initial_mesh(d);
    bool found = false;
    for (const Point& p : m->vertices()) found |= p.x == 0.0 && p.y == 0.0;
    EXPECT_TRUE(found);
  }
}

TEST(Mesh, ShiftedSquareBoundingBox) {
  const MeshPtr m = make_mesh(Domain::shifted_square, 2);
  for (const Point& p : m->vertices()) {
    EXPECT_GE(p.x, 1.0);
    EXPECT_LE(p.x, 3.0);
    EXPECT_GE(p.y, -1.0);
    EXPECT_LE(p.y, 1.0);
  }
}

TEST(Mesh, RefinementPreservesShapeAndHalvesDiameter) {
  for (Domain d : kAllDomains) {
    auto h = make_hierarchy(d, 3);
    for (int k = 1; k <= 3; ++k) {
      const MeshQuality a = mesh_quality(*h[k - 1]);
      const MeshQuality b = mesh_quality(*h[k]);
      EXPECT_EQ(h[k]->num_triangles(), 4 * h[k - 1]->num_triangles());
      EXPECT_EQ(h[k]->level(), k);
      EXPECT_NEAR(b.gamma, a.gamma, 1e-12 * a.gamma);
      EXPECT_NEAR(b.h_max, 0.5 * a.h_max, 1e-12 * a.h_max);
      EXPECT_NEAR(b.quasi_uniformity_ratio, a.quasi_uniformity_ratio, 1e-12 * a.quasi_uniformity_ratio);
      EXPECT_GT(b.gamma, 2.0);
      EXPECT_GE(b.quasi_uniformity_ratio, 1.0);
    }
  }
}

TEST(Mesh, ChildrenTileParentAndUseMidpoints) {
  auto h = make_hierarchy(Domain::slit, 2);
  const Mesh& fine = *h[2];
  const Mesh& coarse = *h[1];
  for (std::size_t t = 0; t < coarse.num_triangles(); ++t) {
    double a = 0.0;
    for (int c = 0; c < 4; ++c) a += fine.signed_area(4 * t + c);
    EXPECT_NEAR(a, coarse.signed_area(t), 1e-14);
    const auto pc = coarse.corners(t);
    for (int c = 0; c < 4; ++c) {
      for (const Point& q : fine.corners(4 * t + c)) {
        // Every child corner is a parent corner or a parent edge midpoint.
        bool ok = false;
        for (int i = 0; i < 3; ++i) {
          const Point mid = 0.5 * (pc[i] + pc[(i + 1) % 3]);
          ok |= std::hypot(q.x - pc[i].x, q.y - pc[i].y) < 1e-15;
          ok |= std::hypot(q.x - mid.x, q.y - mid.y) < 1e-15;
        }
        EXPECT_TRUE(ok);
      }
      EXPECT_EQ(fine.parent_triangle(4 * t + c), static_cast<int>(t));
    }
  }
}

TEST(MeshQuality, RightTriangleInradius) {
  const Mesh m(Domain::unit_square, {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  const MeshQuality q = mesh_quality(m);
  const double rho = 2.0 - std::sqrt(2.0);  // 2 r with r = (2 - sqrt 2) / 2
  EXPECT_NEAR(q.h_max, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(q.gamma, std::sqrt(2.0) / rho, 1e-14);
}

TEST(MeshQuality, EquilateralTriangle) {
  const Mesh m(Domain::unit_square, {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}, {{0, 1, 2}});
  EXPECT_NEAR(mesh_quality(m).gamma, std::sqrt(3.0), 1e-14);
}

TEST(Mesh, NegativeOrientationIsFixed) {
  const Mesh m(Domain::unit_square, {{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}});
  EXPECT_GT(m.signed_area(0), 0.0);
}

TEST(LocatePoint, CentroidVertexAndEdge) {
  const MeshPtr m = make_mesh(Domain::centered_square, 2);
  for (std::size_t t = 0; t < m->num_triangles(); ++t) {
    const PointLocation loc = m->locate_point(m->centroid(t));
    EXPECT_EQ(loc.triangle, static_cast<int>(t));
    for (double b : loc.barycentric) EXPECT_NEAR(b, 1.0 / 3.0, 1e-12);
  }
  const auto c = m->corners(5);
  const PointLocation v = m->locate_point(c[1]);
  const auto bv = barycentric(*m, v.triangle, c[1]);
  EXPECT_NEAR(*std::max_element(bv.begin(), bv.end()), 1.0, 1e-12);
  const Point mid = 0.5 * (c[0] + c[1]);
  const PointLocation e = m->locate_point(mid);
  const auto be = e.barycentric;
  EXPECT_NEAR(*std::min_element(be.begin(), be.end()), 0.0, 1e-12);
  EXPECT_NEAR(be[0] + be[1] + be[2], 1.0, 1e-12);
}

TEST(LocatePoint, OutsideThrows) {
  const MeshPtr m = make_mesh(Domain::shifted_square, 1);
  EXPECT_THROW(m->locate_point({0.0, 0.0}), PointOutsideDomain);
  EXPECT_THROW(m->locate_point({3.5, 0.0}), PointOutsideDomain);
}

TEST(LocatePoint, SlitSideHint) {
  const MeshPtr m = make_mesh(Domain::slit, 2);
  const Point on_cut{-0.3, 0.0};
  const PointLocation up = m->locate_point(on_cut, SlitSide::upper);
  const PointLocation lo = m->locate_point(on_cut, SlitSide::lower);
  EXPECT_GT(m->centroid(up.triangle).y, 0.0);
  EXPECT_LT(m->centroid(lo.triangle).y, 0.0);
  EXPECT_THROW(m->locate_point(on_cut), std::invalid_argument);
  // Points off the cut need no hint.
  EXPECT_NO_THROW(m->locate_point({0.3, 0.0}));
}

TEST(LocatePoint, NestingAcrossLevels) {
  std::mt19937 rng(7);
  for (Domain d : kAllDomains) {
    auto h = make_hierarchy(d, 3);
    for (int i = 0; i < 100; ++i) {
      const Point x = random_point(d, rng);
      if (d == Domain::slit && x.y == 0.0) continue;
      const PointLocation coarse = h[2]->locate_point(x);
      const PointLocation fine = h[3]->locate_point(x);
      const auto bc = barycentric(*h[2], fine.triangle / 4, x);
      // Either the same parent, or x sits on a coarse edge shared with it.
      if (fine.triangle / 4 != coarse.triangle) {
        EXPECT_NEAR(*std::min_element(bc.begin(), bc.end()), 0.0, 1e-10);
      }
      EXPECT_EQ(h[3]->ancestor(fine.triangle, 2), fine.triangle / 4);
      EXPECT_EQ(h[3]->ancestor(fine.triangle, 0), fine.triangle / 64);
      double s = 0.0;
      for (double b : fine.barycentric) {
        EXPECT_GE(b, 0.0);
        EXPECT_LE(b, 1.0);
        s += b;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Mesh, DumpFormat) {
  const MeshPtr m = make_initial_mesh(Domain::unit_square);
  std::ostringstream out;
  write_mesh(out, *m);
  std::istringstream in(out.str());
  std::string w1, w2;
  std::size_t nv = 0, nt = 0;
  in >> w1 >> nv >> w2 >> nt;
  EXPECT_EQ(w1, "vertices");
  EXPECT_EQ(w2, "triangles");
  EXPECT_EQ(nv, 4u);
  EXPECT_EQ(nt, 2u);
  double x, y;
  for (std::size_t i = 0; i < nv; ++i) in >> x >> y;
  int a, b, c;
  for (std::size_t i = 0; i < nt; ++i) in >> a >> b >> c;
  EXPECT_TRUE(in.good());
  EXPECT_EQ(c, m->triangles().back()[2]);
}

TEST(Mesh, DomainNames) {
  for (Domain d : kAllDomains) EXPECT_EQ(parse_domain(to_string(d)), d);
  EXPECT_FALSE(parse_domain("circle").has_value());
}
