#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "tsss/estimator.hpp"
#include "tsss/geometry.hpp"
#include "tsss/mesh.hpp"
#include "tsss/rng.hpp"

namespace tsss::test {

inline UnitVector3 random_unit(Rng& rng) {
  return UnitVector3(Vec3(rng.normal(), rng.normal(), rng.normal()));
}

/// Uniform-ish point strictly inside a spherical triangle.
inline UnitVector3 random_inside(const SphericalTriangle& tri, Rng& rng, double margin = 1e-3) {
  double a = rng.uniform(), b = rng.uniform();
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  double c = 1.0 - a - b;
  a = margin + (1.0 - 3.0 * margin) * a;
  b = margin + (1.0 - 3.0 * margin) * b;
  c = margin + (1.0 - 3.0 * margin) * c;
  return UnitVector3(a * tri.vertex(0).vec() + b * tri.vertex(1).vec() + c * tri.vertex(2).vec());
}

/// Small random triangle around a random centre, counterclockwise.
inline SphericalTriangle random_triangle(Rng& rng, double size = 0.5) {
  const Vec3 c = random_unit(rng).vec();
  Vec3 t1 = c.unitOrthogonal();
  Vec3 t2 = c.cross(t1);
  const double a0 = 2.0 * std::numbers::pi * rng.uniform();
  std::array<UnitVector3, 3> v;
  for (int k = 0; k < 3; ++k) {
    const double a = a0 + 2.0 * std::numbers::pi * k / 3.0 + 0.4 * (rng.uniform() - 0.5);
    const double r = size * (0.6 + 0.4 * rng.uniform());
    v[static_cast<std::size_t>(k)] = UnitVector3(c + r * (std::cos(a) * t1 + std::sin(a) * t2));
  }
  return SphericalTriangle(v[0], v[1], v[2]);
}

inline std::shared_ptr<const TriMesh> octahedron(int levels = 0) {
  return std::make_shared<const TriMesh>(refine(base_mesh(BaseMesh::Octahedron), levels));
}

inline std::shared_ptr<const TriMesh> icosahedron(int levels = 0) {
  return std::make_shared<const TriMesh>(refine(base_mesh(BaseMesh::Icosahedron), levels));
}

inline std::vector<UnitVector3> random_points(std::size_t n, Rng& rng) {
  std::vector<UnitVector3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_unit(rng));
  return pts;
}

/// gamma = Z theta with theta standard normal.
inline Eigen::VectorXd random_feasible(const SplineSpace& space, Rng& rng) {
  Eigen::VectorXd theta(space.effective_dim());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.normal();
  return space.Z() * theta;
}

}  // namespace tsss::test
