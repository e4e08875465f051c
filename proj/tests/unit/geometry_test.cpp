#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "../common/support.hpp"
#include "tsss/energy.hpp"
#include "tsss/errors.hpp"
#include "tsss/geometry.hpp"

namespace tsss {
namespace {

using std::numbers::pi;
const UnitVector3 e1(1, 0, 0), e2(0, 1, 0), e3(0, 0, 1);

double planar_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * (b - a).cross(c - a).norm(); }

// Sum of planar areas of the chords of a 4^depth split, projected to the sphere.
double subdivided_area(const Vec3& a, const Vec3& b, const Vec3& c, int depth) {
  if (depth == 0) return planar_area(a, b, c);
  const Vec3 ab = (a + b).normalized(), bc = (b + c).normalized(), ca = (c + a).normalized();
  return subdivided_area(a, ab, ca, depth - 1) + subdivided_area(ab, b, bc, depth - 1) +
         subdivided_area(ca, bc, c, depth - 1) + subdivided_area(ab, bc, ca, depth - 1);
}

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c) {
  Eigen::Matrix4d m;
  m << 0, 0, 0, 1, a.x(), a.y(), a.z(), 1, b.x(), b.y(), b.z(), 1, c.x(), c.y(), c.z(), 1;
  return m.determinant();
}

TEST(UnitVector, NormalizesAndRejectsZero) {
  const UnitVector3 u(3, 4, 12);
  EXPECT_NEAR(u.vec().norm(), 1.0, 1e-12);
  EXPECT_THROW(UnitVector3(0, 0, 0), GeometryError);
}

TEST(UnitVector, SphericalRoundTrip) {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double theta = 0.01 + (pi - 0.02) * rng.uniform();
    const double phi = 2 * pi * rng.uniform();
    const UnitVector3 x = UnitVector3::from_spherical(theta, phi);
    EXPECT_NEAR(x.x3(), std::cos(theta), 1e-15);
    EXPECT_NEAR(x.colatitude(), theta, 1e-10);
    double back = x.longitude();
    if (back < 0) back += 2 * pi;
    EXPECT_NEAR(std::remainder(back - phi, 2 * pi), 0.0, 1e-10);
  }
}

TEST(Barycentric, OctantCases) {
  const SphericalTriangle oct(e1, e2, e3);
  const auto b = spherical_barycentric(oct, e1);
  EXPECT_EQ(b.b1, 1.0);
  EXPECT_EQ(b.b2, 0.0);
  EXPECT_EQ(b.b3, 0.0);
  const auto c = spherical_barycentric(oct, UnitVector3(1, 1, 1));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(c[k], 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(Barycentric, VertexIsExactUnitVector) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const SphericalTriangle tri = test::random_triangle(rng);
    const auto b = spherical_barycentric(tri, tri.vertex(1));
    EXPECT_EQ(b.b1, 0.0);
    EXPECT_EQ(b.b2, 1.0);
    EXPECT_EQ(b.b3, 0.0);
  }
}

TEST(Barycentric, MatchesLinearSolveAndVolumeRatios) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const SphericalTriangle tri = test::random_triangle(rng, 0.05 + rng.uniform());
    const UnitVector3 p = test::random_inside(tri, rng);
    const auto b = spherical_barycentric(tri, p);
    const Vec3 &v1 = tri.vertex(0).vec(), &v2 = tri.vertex(1).vec(), &v3 = tri.vertex(2).vec();
    EXPECT_LT((b.b1 * v1 + b.b2 * v2 + b.b3 * v3 - p.vec()).norm(), 1e-12);
    Mat3 V;
    V.col(0) = v1;
    V.col(1) = v2;
    V.col(2) = v3;
    const Vec3 solved = V.colPivHouseholderQr().solve(p.vec());
    const double vol = tet_volume(v1, v2, v3);
    const Vec3 ratios(tet_volume(p.vec(), v2, v3) / vol, tet_volume(v1, p.vec(), v3) / vol,
                      tet_volume(v1, v2, p.vec()) / vol);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(b[k], solved[k], 1e-12);
      EXPECT_NEAR(b[k], ratios[k], 1e-12);
      EXPECT_GE(b[k], 0.0);
    }
  }
}

TEST(Triangle, RejectsDegenerate) {
  EXPECT_THROW(SphericalTriangle(e1, e2, UnitVector3(1, 1, 0)), GeometryError);
  EXPECT_THROW(SphericalTriangle(e1, e3, e2), GeometryError);
}

TEST(Geodesic, Basics) {
  EXPECT_NEAR(geodesic_distance(e1, e2), pi / 2, 1e-15);
  EXPECT_EQ(geodesic_distance(e1, e1), 0.0);
  EXPECT_NEAR(geodesic_distance(e1, -e1), pi, 1e-15);
}

TEST(Area, OctantAndOctahedron) {
  EXPECT_NEAR(triangle_area(SphericalTriangle(e1, e2, e3)), pi / 2, 1e-14);
  const auto mesh = test::octahedron();
  double total = 0;
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t) total += triangle_area(mesh->triangle(static_cast<int>(t)));
  EXPECT_NEAR(total, 4 * pi, 1e-10);
}

TEST(Area, SmallTriangleCloseToPlanar) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const SphericalTriangle tri = test::random_triangle(rng, 0.02);
    ASSERT_LT(longest_edge(tri), 0.05);
    const double planar = planar_area(tri.vertex(0).vec(), tri.vertex(1).vec(), tri.vertex(2).vec());
    EXPECT_NEAR(triangle_area(tri) / planar, 1.0, 0.01);
  }
}

TEST(Area, MatchesRecursiveSubdivision) {
  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    const SphericalTriangle tri = test::random_triangle(rng, 0.8);
    const double oracle = subdivided_area(tri.vertex(0).vec(), tri.vertex(1).vec(), tri.vertex(2).vec(), 7);
    EXPECT_NEAR(triangle_area(tri) / oracle, 1.0, 1e-4);
  }
}

TEST(Area, AdditiveUnderInteriorSplit) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const SphericalTriangle tri = test::random_triangle(rng, 0.1 + rng.uniform());
    const UnitVector3 p = test::random_inside(tri, rng, 0.05);
    const double parts = triangle_area(SphericalTriangle(p, tri.vertex(1), tri.vertex(2))) +
                         triangle_area(SphericalTriangle(tri.vertex(0), p, tri.vertex(2))) +
                         triangle_area(SphericalTriangle(tri.vertex(0), tri.vertex(1), p));
    EXPECT_NEAR(parts, triangle_area(tri), 1e-10);
  }
}

TEST(Inradius, Octant) {
  const SphericalCap cap = incenter_inradius(SphericalTriangle(e1, e2, e3));
  EXPECT_NEAR(cap.radius, std::asin(1 / std::sqrt(3.0)), 1e-12);
  EXPECT_LT((cap.center.vec() - Vec3(1, 1, 1).normalized()).norm(), 1e-12);
}

TEST(Inradius, SymmetricAboutPole) {
  const double z = 0.8, r = std::sqrt(1 - z * z);
  std::array<UnitVector3, 3> v;
  for (int k = 0; k < 3; ++k) v[k] = UnitVector3(r * std::cos(2 * pi * k / 3), r * std::sin(2 * pi * k / 3), z);
  const SphericalCap cap = incenter_inradius(SphericalTriangle(v[0], v[1], v[2]));
  EXPECT_LT((cap.center.vec() - e3.vec()).norm(), 1e-12);
}

// Largest distance from an interior sample to the nearest edge arc, by brute force.
double brute_inradius(const SphericalTriangle& tri, int samples) {
  double best = 0;
  for (int i = 0; i <= samples; ++i) {
    for (int j = 0; i + j <= samples; ++j) {
      const double a = double(i) / samples, b = double(j) / samples;
      const Vec3 p = (1 - a - b) * tri.vertex(0).vec() + a * tri.vertex(1).vec() + b * tri.vertex(2).vec();
      if (p.norm() < 1e-12) continue;
      const UnitVector3 u(p);
      double d = pi;
      for (int k = 0; k < 3; ++k) d = std::min(d, distance_to_arc(u, tri.vertex((k + 1) % 3), tri.vertex((k + 2) % 3)));
      best = std::max(best, d);
    }
  }
  return best;
}

TEST(Inradius, EquidistantAndBelowHalfEdge) {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const SphericalTriangle tri = test::random_triangle(rng, 0.05 + rng.uniform());
    const SphericalCap cap = incenter_inradius(tri);
    for (int k = 0; k < 3; ++k) {
      const Vec3 n = tri.vertex((k + 1) % 3).vec().cross(tri.vertex((k + 2) % 3).vec()).normalized();
      EXPECT_NEAR(std::asin(std::abs(cap.center.vec().dot(n))), cap.radius, 1e-10);
    }
    EXPECT_LT(cap.radius, longest_edge(tri) / 2);
    if (i < 10) {
      const double brute = brute_inradius(tri, 300);
      EXPECT_LE(brute, cap.radius + 1e-12);
      EXPECT_GT(brute, cap.radius * (1 - 1e-2));
    }
  }
}

TEST(LongestEdge, Basics) {
  EXPECT_NEAR(longest_edge(SphericalTriangle(e1, e2, e3)), pi / 2, 1e-15);
  const double ca = 0.15, cb = 0.2, cc = 0.3;
  const UnitVector3 a = e1;
  const UnitVector3 b(std::cos(cc), std::sin(cc), 0);
  const double angle = std::acos((std::cos(cb) - std::cos(ca) * std::cos(cc)) / (std::sin(ca) * std::sin(cc)));
  const UnitVector3 c(Vec3(std::cos(ca) * a.vec() + std::sin(ca) * (std::cos(angle) * e2.vec() + std::sin(angle) * e3.vec())));
  const SphericalTriangle tri(a, b, c);
  EXPECT_NEAR(geodesic_distance(a, c), ca, 1e-12);
  EXPECT_NEAR(geodesic_distance(b, c), cb, 1e-12);
  EXPECT_NEAR(longest_edge(tri), cc, 1e-12);
}

TEST(RadialProject, VertexAndCentroid) {
  const SphericalTriangle oct(e1, e2, e3);
  const double h = plane_offset(oct);
  EXPECT_NEAR(h, 1 / std::sqrt(3.0), 1e-15);
  const RadialPoint v = radial_project(oct, e2.vec());
  EXPECT_LT((v.point.vec() - e2.vec()).norm(), 1e-15);
  EXPECT_NEAR(v.jacobian, h, 1e-15);
  const RadialPoint c = radial_project(oct, Vec3(1, 1, 1) / 3);
  EXPECT_NEAR(c.jacobian, 3.0, 1e-12);
}

TEST(RadialProject, ConstantIntegratesToArea) {
  const SphericalTriangle oct(e1, e2, e3);
  const QuadratureRule rule = QuadratureRule::collapsed_gauss(12);
  EXPECT_NEAR(integrate_triangle([](const UnitVector3&) { return 1.0; }, oct, rule), pi / 2, 1e-10);
}

TEST(RadialProject, RecoversPlanarPoint) {
  Rng rng(10);
  for (int i = 0; i < 500; ++i) {
    const SphericalTriangle tri = test::random_triangle(rng, 0.05 + rng.uniform());
    double a = rng.uniform(), b = rng.uniform();
    if (a + b > 1) {
      a = 1 - a;
      b = 1 - b;
    }
    const Vec3 p = (1 - a - b) * tri.vertex(0).vec() + a * tri.vertex(1).vec() + b * tri.vertex(2).vec();
    const RadialPoint rp = radial_project(tri, p);
    const Vec3 n = (tri.vertex(1).vec() - tri.vertex(0).vec()).cross(tri.vertex(2).vec() - tri.vertex(0).vec()).normalized();
    const double t = n.dot(tri.vertex(0).vec()) / n.dot(rp.point.vec());
    EXPECT_LT((t * rp.point.vec() - p).norm(), 1e-12);
  }
}

}  // namespace
}  // namespace tsss
