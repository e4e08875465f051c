#include "tsss/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "tsss/errors.hpp"

namespace tsss {

namespace {

constexpr double kVertexSnap = 1e-14;
constexpr double kMinEdge = 1e-8;
constexpr double kHemisphereSlack = 1e-12;

Vec3 normalized_or_throw(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw GeometryError("cannot normalize a zero or non-finite vector onto the sphere");
  }
  // Already unit to rounding: keep the bits so re-reading written vertices is exact.
  if (std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return v;
  return v / n;
}

}  // namespace

UnitVector3::UnitVector3(double x1, double x2, double x3) : UnitVector3(Vec3(x1, x2, x3)) {}

UnitVector3::UnitVector3(const Vec3& v) : v_(normalized_or_throw(v)) {}

UnitVector3 UnitVector3::from_spherical(double theta, double phi) {
  const double s = std::sin(theta);
  return UnitVector3(s * std::cos(phi), s * std::sin(phi), std::cos(theta));
}

double UnitVector3::colatitude() const noexcept {
  return std::atan2(std::hypot(v_[0], v_[1]), v_[2]);
}

double UnitVector3::longitude() const noexcept {
  double phi = std::atan2(v_[1], v_[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  if (phi >= 2.0 * std::numbers::pi) phi = 0.0;
  return phi;
}

UnitVector3 UnitVector3::operator-() const noexcept {
  UnitVector3 out;
  out.v_ = -v_;
  return out;
}

double BarycentricCoords::min() const noexcept { return std::min({b1, b2, b3}); }

bool SphericalCap::contains(const UnitVector3& p, double slack) const noexcept {
  return geodesic_distance(center, p) <= radius + slack;
}

SphericalTriangle::SphericalTriangle(const UnitVector3& v1, const UnitVector3& v2,
                                     const UnitVector3& v3)
    : v_{v1, v2, v3} {
  for (int k = 0; k < 3; ++k) {
    normals_[k] = v_[(k + 1) % 3].vec().cross(v_[(k + 2) % 3].vec());
  }
  det_ = v1.vec().dot(normals_[0]);
  if (!(det_ / 6.0 > kMinVolume)) {
    throw GeometryError("degenerate or clockwise spherical triangle (signed volume " +
                        std::to_string(det_ / 6.0) + ")");
  }
  for (int k = 0; k < 3; ++k) {
    if (v_[k].vec().dot(v_[(k + 1) % 3].vec()) <= -1.0 + kHemisphereSlack) {
      throw GeometryError("spherical triangle is not contained in an open hemisphere");
    }
  }
  for (int k = 0; k < 3; ++k) {
    forms_.row(k) = normals_[k].transpose() / v_[k].vec().dot(normals_[k]);
  }
}

BarycentricCoords spherical_barycentric(const SphericalTriangle& tri, const UnitVector3& p) {
  for (int k = 0; k < 3; ++k) {
    if ((p.vec() - tri.v_[k].vec()).norm() < kVertexSnap) {
      BarycentricCoords e;
      (k == 0 ? e.b1 : (k == 1 ? e.b2 : e.b3)) = 1.0;
      return e;
    }
  }
  // b_k = vol<0, p, v_{k+1}, v_{k+2}> / vol<0, v_k, v_{k+1}, v_{k+2}>.
  const Vec3& x = p.vec();
  return {x.dot(tri.normals_[0]) / tri.v_[0].vec().dot(tri.normals_[0]),
          x.dot(tri.normals_[1]) / tri.v_[1].vec().dot(tri.normals_[1]),
          x.dot(tri.normals_[2]) / tri.v_[2].vec().dot(tri.normals_[2])};
}

double geodesic_distance(const UnitVector3& a, const UnitVector3& b) noexcept {
  return std::atan2(a.vec().cross(b.vec()).norm(), a.vec().dot(b.vec()));
}

UnitVector3 geodesic_midpoint(const UnitVector3& a, const UnitVector3& b) {
  return UnitVector3(a.vec() + b.vec());
}

double interior_angle(const SphericalTriangle& tri, int k) {
  const Vec3& a = tri.vertex(k).vec();
  const Vec3& b = tri.vertex((k + 1) % 3).vec();
  const Vec3& c = tri.vertex((k + 2) % 3).vec();
  Vec3 tb = b - a.dot(b) * a;
  Vec3 tc = c - a.dot(c) * a;
  tb.normalize();
  tc.normalize();
  return std::atan2(tb.cross(tc).norm(), tb.dot(tc));
}

double triangle_area(const SphericalTriangle& tri) {
  for (int k = 0; k < 3; ++k) {
    if (geodesic_distance(tri.vertex(k), tri.vertex((k + 1) % 3)) < kMinEdge) {
      throw GeometryError("triangle edge shorter than 1e-8; area is ill-conditioned");
    }
  }
  return interior_angle(tri, 0) + interior_angle(tri, 1) + interior_angle(tri, 2) -
         std::numbers::pi;
}

SphericalCap incenter_inradius(const SphericalTriangle& tri) {
  // Unit normals of the edge planes point into the triangle; the incenter c
  // satisfies c . n_k = sin(rho) for all k.
  Mat3 normals;
  for (int k = 0; k < 3; ++k) {
    const Vec3 n = tri.vertex((k + 1) % 3).vec().cross(tri.vertex((k + 2) % 3).vec());
    normals.row(k) = n.normalized().transpose();
  }
  const Vec3 rhs = Vec3::Ones();
  const Vec3 c = normals.fullPivLu().solve(rhs);
  const UnitVector3 center(c);
  const double s = std::clamp(center.vec().dot(normals.row(0).transpose()), -1.0, 1.0);
  return {center, std::asin(s)};
}

SphericalCap bounding_cap(const SphericalTriangle& tri) noexcept {
  const UnitVector3 center(tri.vertex(0).vec() + tri.vertex(1).vec() + tri.vertex(2).vec());
  double r = 0.0;
  for (int k = 0; k < 3; ++k) r = std::max(r, geodesic_distance(center, tri.vertex(k)));
  return {center, r};
}

double longest_edge(const SphericalTriangle& tri) noexcept {
  return std::max({geodesic_distance(tri.vertex(0), tri.vertex(1)),
                   geodesic_distance(tri.vertex(1), tri.vertex(2)),
                   geodesic_distance(tri.vertex(2), tri.vertex(0))});
}

double distance_to_arc(const UnitVector3& p, const UnitVector3& a, const UnitVector3& b) noexcept {
  const Vec3 n = a.vec().cross(b.vec());
  const double nn = n.norm();
  const double da = geodesic_distance(p, a);
  const double db = geodesic_distance(p, b);
  if (nn == 0.0) return std::min(da, db);
  const Vec3 unit_n = n / nn;
  const Vec3 proj = p.vec() - p.vec().dot(unit_n) * unit_n;
  if (proj.norm() > 0.0) {
    const Vec3 q = proj.normalized();
    // q lies on the arc iff it is between a and b on the great circle.
    if (a.vec().cross(q).dot(unit_n) >= 0.0 && q.cross(b.vec()).dot(unit_n) >= 0.0) {
      return std::asin(std::clamp(std::abs(p.vec().dot(unit_n)), 0.0, 1.0));
    }
  }
  return std::min(da, db);
}

double plane_offset(const SphericalTriangle& tri) {
  const Vec3& v1 = tri.vertex(0).vec();
  const Vec3 n = (tri.vertex(1).vec() - v1).cross(tri.vertex(2).vec() - v1);
  const double nn = n.norm();
  if (nn == 0.0) throw GeometryError("vertex plane is undefined");
  return std::abs(v1.dot(n)) / nn;
}

RadialPoint radial_project(const SphericalTriangle& tri, const Vec3& p_plane) {
  const double h = plane_offset(tri);
  if (h < 1e-14) throw GeometryError("vertex plane passes through the origin");
  const double u = p_plane.norm();
  return {UnitVector3(p_plane), h / (u * u * u)};
}

}  // namespace tsss
