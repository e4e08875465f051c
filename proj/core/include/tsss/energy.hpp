#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "tsss/basis.hpp"
#include "tsss/geometry.hpp"
#include "tsss/mesh.hpp"

namespace tsss {

/// Rule on the reference triangle: barycentric points, positive weights
/// summing to 1, exact for polynomials up to `exactness`.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int exactness = 0;

  /// Collapsed (Duffy) Gauss-Legendre product rule with n x n points,
  /// n = ceil((exactness + 2) / 2).
  static QuadratureRule collapsed_gauss(int exactness);
  /// Rule used for the degree-d penalty: exactness 2(d + 2).
  static QuadratureRule for_degree(int degree) { return collapsed_gauss(2 * (degree + 2)); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct IntegrationOptions {
  double rel_tol = 1e-10;
  int max_depth = 6;
};

struct IntegrationResult {
  int depth = 0;       // uniform 4-way subdivision depth accepted
  bool converged = false;
};

namespace detail {

template <class T>
double magnitude(const T& v) {
  if constexpr (std::is_arithmetic_v<T>) {
    return std::abs(v);
  } else {
    return v.norm();
  }
}

// Rule applied on every subtriangle of a depth-`depth` uniform split of the
// planar triangle <v1, v2, v3>, mapped radially to the sphere.
template <class F>
auto integrate_at_depth(F& f, const SphericalTriangle& tri, const QuadratureRule& rule, int depth,
                        double h, double planar_area) {
  using R = std::decay_t<decltype(f(std::declval<const UnitVector3&>()))>;
  const int m = 1 << depth;
  const double sub_area = planar_area / (static_cast<double>(m) * m);
  const Vec3& a = tri.vertex(0).vec();
  const Vec3& b = tri.vertex(1).vec();
  const Vec3& c = tri.vertex(2).vec();
  std::optional<R> acc;
  auto add_sub = [&](const std::array<double, 3>& p0, const std::array<double, 3>& p1,
                     const std::array<double, 3>& p2) {
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      double bc[3];
      for (int k = 0; k < 3; ++k) bc[k] = l[0] * p0[k] + l[1] * p1[k] + l[2] * p2[k];
      const Vec3 u = bc[0] * a + bc[1] * b + bc[2] * c;
      const double un = u.norm();
      const double w = rule.weights[q] * sub_area * h / (un * un * un);
      if (acc) {
        *acc += w * f(UnitVector3(u));
      } else {
        acc.emplace(w * f(UnitVector3(u)));
      }
    }
  };
  const double inv = 1.0 / m;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; i + j < m; ++j) {
      // Barycentric lattice point (i, j) -> weights on (v2, v3).
      auto node = [&](int ii, int jj) {
        return std::array<double, 3>{1.0 - (ii + jj) * inv, ii * inv, jj * inv};
      };
      add_sub(node(i, j), node(i + 1, j), node(i, j + 1));
      if (i + j + 1 < m) add_sub(node(i + 1, j), node(i + 1, j + 1), node(i, j + 1));
    }
  }
  return *acc;
}

}  // namespace detail

/// Integral of f over the spherical triangle, via the planar triangle through
/// its vertices and the radial Jacobian h / |u|^3. Subdivides uniformly until
/// successive estimates agree to rel_tol or max_depth is reached. f may return
/// a scalar or an Eigen matrix.
template <class F>
auto integrate_triangle(F&& f, const SphericalTriangle& tri, const QuadratureRule& rule,
                        const IntegrationOptions& opts = {}, IntegrationResult* info = nullptr) {
  const double h = plane_offset(tri);
  const Vec3& v1 = tri.vertex(0).vec();
  const double planar_area =
      0.5 * (tri.vertex(1).vec() - v1).cross(tri.vertex(2).vec() - v1).norm();
  auto prev = detail::integrate_at_depth(f, tri, rule, 0, h, planar_area);
  for (int depth = 1; depth <= opts.max_depth; ++depth) {
    auto cur = detail::integrate_at_depth(f, tri, rule, depth, h, planar_area);
    const double diff = detail::magnitude(decltype(cur)(cur - prev));
    const double scale = detail::magnitude(cur);
    prev = std::move(cur);
    if (diff <= opts.rel_tol * scale || diff == 0.0) {
      if (info) *info = {depth, true};
      return prev;
    }
  }
  if (info) *info = {opts.max_depth, false};
  return prev;
}

/// Block-diagonal energy matrix: gamma' P gamma = sum over |alpha| = 2 of the
/// integral of (D^alpha s_p)^2.
class PenaltyMatrix {
 public:
  PenaltyMatrix() = default;
  PenaltyMatrix(int block_size, std::vector<Eigen::MatrixXd> blocks);

  int block_size() const noexcept { return block_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  const Eigen::MatrixXd& block(std::size_t t) const { return blocks_.at(t); }
  Eigen::Index width() const noexcept { return static_cast<Eigen::Index>(blocks_.size()) * block_; }

  double quadratic_form(const Eigen::VectorXd& gamma) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& gamma) const;
  /// Z' P Z for a dense Z with `width()` rows.
  Eigen::MatrixXd project(const Eigen::MatrixXd& Z) const;
  /// Z' P gamma.
  Eigen::VectorXd project(const Eigen::MatrixXd& Z, const Eigen::VectorXd& gamma) const;

 private:
  int block_ = 0;
  std::vector<Eigen::MatrixXd> blocks_;
};

struct PenaltyOptions {
  /// Extension degree; defaults to d mod 2.
  std::optional<int> extension;
  IntegrationOptions integration;
  int threads = 1;
};

/// Energy block of one triangle.
Eigen::MatrixXd penalty_block(const SphericalTriangle& tri, int degree, int p,
                              const QuadratureRule& rule, const IntegrationOptions& opts,
                              IntegrationResult* info = nullptr);

PenaltyMatrix assemble_penalty(const TriMesh& mesh, int degree, const PenaltyOptions& opts = {});

}  // namespace tsss
