#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "tsss/geometry.hpp"
#include "tsss/mesh.hpp"

namespace tsss {

inline constexpr int kMaxDegree = 12;

/// Exponents (i, j, k) of b1, b2, b3 with i + j + k = d.
struct MultiIndex {
  int i = 0;
  int j = 0;
  int k = 0;

  int operator[](int slot) const noexcept { return slot == 0 ? i : (slot == 1 ? j : k); }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

constexpr int basis_size(int degree) noexcept { return (degree + 1) * (degree + 2) / 2; }

/// Enumeration (d,0,0), (d-1,1,0), (d-1,0,1), (d-2,2,0), ..., (0,0,d).
const std::vector<MultiIndex>& multi_indices(int degree);

/// Position of (i, j, k) in the enumeration.
constexpr int multi_index_position(int degree, int i, int /*j*/, int k) noexcept {
  const int a = degree - i;
  return a * (a + 1) / 2 + k;
}

std::int64_t multinomial(int degree, const MultiIndex& m);

/// p = d mod 2, the homogeneous extension degree used for the penalty.
constexpr int extension_degree(int degree) noexcept { return degree % 2; }

/// Throws ConfigError unless 0 <= degree <= kMaxDegree.
void check_degree(int degree);

/// Global coefficient layout: one contiguous block of basis_size(d) columns
/// per triangle.
class BasisLayout {
 public:
  BasisLayout() = default;
  BasisLayout(int degree, std::size_t num_triangles);

  int degree() const noexcept { return degree_; }
  int block_size() const noexcept { return block_; }
  std::size_t num_triangles() const noexcept { return triangles_; }
  Eigen::Index width() const noexcept { return static_cast<Eigen::Index>(triangles_) * block_; }
  Eigen::Index block_offset(int triangle) const noexcept {
    return static_cast<Eigen::Index>(triangle) * block_;
  }
  Eigen::Index column(int triangle, int local) const noexcept {
    return block_offset(triangle) + local;
  }

 private:
  int degree_ = 0;
  int block_ = 1;
  std::size_t triangles_ = 0;
};

/// Values B_ijk(x) in enumeration order. x may be any vector of R^3; the basis
/// is a homogeneous polynomial of degree d.
Eigen::VectorXd eval_basis(const SphericalTriangle& tri, int degree, const Vec3& x);
inline Eigen::VectorXd eval_basis(const SphericalTriangle& tri, int degree, const UnitVector3& x) {
  return eval_basis(tri, degree, x.vec());
}
/// Same, from precomputed barycentric coordinates.
Eigen::VectorXd eval_basis(int degree, const BarycentricCoords& b);

/// R^3 gradients of the homogeneous basis polynomials, one column per basis
/// function.
Eigen::Matrix<double, 3, Eigen::Dynamic> eval_basis_gradient(const SphericalTriangle& tri, int degree,
                                                             const Vec3& x);

/// Rows xx, yy, zz, xy, xz, yz of the second partial derivatives of the
/// extensions |x|^(p-d) B_ijk(x), one column per basis function.
Eigen::Matrix<double, 6, Eigen::Dynamic> second_derivatives_extended(const SphericalTriangle& tri,
                                                                     int degree, int p,
                                                                     const Vec3& x);

/// Spline value at x: locate, then dot the local block with the basis.
double eval_spline(const Eigen::VectorXd& gamma, const BasisLayout& layout, const TriMesh& mesh,
                   const UnitVector3& x);

/// Value of the polynomial piece of triangle t at x, x anywhere on the sphere.
double eval_piece(const Eigen::VectorXd& gamma, const BasisLayout& layout, const TriMesh& mesh,
                  int triangle, const Vec3& x);

/// Domain points normalize((i v1 + j v2 + k v3) / d) in enumeration order.
std::vector<UnitVector3> domain_points(const SphericalTriangle& tri, int degree);

using SphereFunction = std::function<double(const UnitVector3&)>;

/// Coefficients of the polynomial piece interpolating f at the domain points.
Eigen::VectorXd interpolate_on_triangle(const SphericalTriangle& tri, int degree,
                                        const SphereFunction& f);

/// Blockwise interpolation over the whole mesh. Continuous across edges only
/// when f restricted to each triangle is a homogeneous polynomial of degree d.
Eigen::VectorXd interpolate_spline(const TriMesh& mesh, const BasisLayout& layout,
                                   const SphereFunction& f);

}  // namespace tsss
