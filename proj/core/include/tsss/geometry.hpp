#pragma once

#include <array>

#include <Eigen/Core>

namespace tsss {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Point on the unit sphere. Construction normalizes; the zero vector and
/// non-finite input are rejected with GeometryError.
class UnitVector3 {
 public:
  UnitVector3() = default;
  UnitVector3(double x1, double x2, double x3);
  explicit UnitVector3(const Vec3& v);

  /// theta = colatitude in [0, pi], phi = longitude.
  /// x = (sin theta cos phi, sin theta sin phi, cos theta).
  static UnitVector3 from_spherical(double theta, double phi);

  double x1() const noexcept { return v_[0]; }
  double x2() const noexcept { return v_[1]; }
  double x3() const noexcept { return v_[2]; }
  double operator[](int i) const noexcept { return v_[i]; }
  const Vec3& vec() const noexcept { return v_; }

  double colatitude() const noexcept;
  /// Longitude in [0, 2 pi).
  double longitude() const noexcept;

  UnitVector3 operator-() const noexcept;
  friend bool operator==(const UnitVector3& a, const UnitVector3& b) noexcept {
    return a.v_ == b.v_;
  }

 private:
  Vec3 v_{0.0, 0.0, 1.0};
};

struct BarycentricCoords {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;

  double operator[](int k) const noexcept { return k == 0 ? b1 : (k == 1 ? b2 : b3); }
  double min() const noexcept;
  double sum() const noexcept { return b1 + b2 + b3; }
};

struct SphericalCap {
  UnitVector3 center;
  double radius = 0.0;  // geodesic radians, 0 < radius < pi

  bool contains(const UnitVector3& p, double slack = 0.0) const noexcept;
};

/// Nondegenerate spherical triangle <v1, v2, v3>, counterclockwise seen from
/// outside. The rows of the inverse vertex matrix are cached so barycentric
/// coordinates are three dot products.
class SphericalTriangle {
 public:
  static constexpr double kMinVolume = 1e-14;

  SphericalTriangle(const UnitVector3& v1, const UnitVector3& v2, const UnitVector3& v3);

  const UnitVector3& vertex(int k) const noexcept { return v_[k]; }
  std::array<UnitVector3, 3> vertices() const noexcept { return v_; }

  /// det[v1 v2 v3]; six times the signed volume of <0, v1, v2, v3>.
  double determinant() const noexcept { return det_; }

  /// Rows are the linear forms l_k with b_k(x) = l_k . x.
  const Mat3& barycentric_forms() const noexcept { return forms_; }

  /// Barycentric coordinates of an arbitrary (possibly off-sphere) vector.
  /// Linear in x; no vertex snapping.
  Vec3 linear_coords(const Vec3& x) const noexcept { return forms_ * x; }

 private:
  std::array<UnitVector3, 3> v_;
  std::array<Vec3, 3> normals_;  // v_{k+1} x v_{k+2}
  Mat3 forms_;
  double det_ = 0.0;

  friend BarycentricCoords spherical_barycentric(const SphericalTriangle&, const UnitVector3&);
};

/// Solves p = b1 v1 + b2 v2 + b3 v3 as ratios of signed tetrahedron volumes.
/// Returns the exact unit coordinate vector at a vertex.
BarycentricCoords spherical_barycentric(const SphericalTriangle& tri, const UnitVector3& p);

inline bool contains(const SphericalTriangle& tri, const UnitVector3& p, double tol = 1e-12) {
  return spherical_barycentric(tri, p).min() >= -tol;
}

/// atan2(|a x b|, a . b), in [0, pi].
double geodesic_distance(const UnitVector3& a, const UnitVector3& b) noexcept;

/// Normalized chord midpoint, which is the geodesic midpoint.
UnitVector3 geodesic_midpoint(const UnitVector3& a, const UnitVector3& b);

/// Interior angle at vertex k from normalized tangent projections.
double interior_angle(const SphericalTriangle& tri, int k);

/// Girard's formula. Throws GeometryError for edges shorter than 1e-8.
double triangle_area(const SphericalTriangle& tri);

/// Largest cap inside the triangle.
SphericalCap incenter_inradius(const SphericalTriangle& tri);

/// Smallest cap centred on the normalized vertex sum that covers the triangle.
SphericalCap bounding_cap(const SphericalTriangle& tri) noexcept;

double longest_edge(const SphericalTriangle& tri) noexcept;

/// Geodesic distance from p to the arc <a, b> (shorter arc).
double distance_to_arc(const UnitVector3& p, const UnitVector3& a, const UnitVector3& b) noexcept;

struct RadialPoint {
  UnitVector3 point;
  double jacobian = 0.0;  // h / |u|^3
};

/// Distance from the origin to the plane through the three vertices.
double plane_offset(const SphericalTriangle& tri);

/// Maps a point of the planar triangle <v1, v2, v3> to the sphere along the ray
/// from the origin, with the surface-measure Jacobian h / |u|^3.
RadialPoint radial_project(const SphericalTriangle& tri, const Vec3& p_plane);

}  // namespace tsss
