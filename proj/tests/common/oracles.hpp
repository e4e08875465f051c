#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "tsss/basis.hpp"
#include "tsss/geometry.hpp"
#include "tsss/mesh.hpp"

namespace tsss::oracle {

/// Midpoint rule on a uniform geodesic subdivision: each leaf contributes its
/// Girard area times f at its normalized centroid. Two depths are combined by
/// Richardson extrapolation, which cancels the h^2 error term.
inline double sphere_midpoint_rule(const std::function<double(const UnitVector3&)>& f,
                                   const SphericalTriangle& tri, int depth) {
  auto leaf_sum = [&](int levels) {
    double total = 0.0;
    std::function<void(const Vec3&, const Vec3&, const Vec3&, int)> rec =
        [&](const Vec3& a, const Vec3& b, const Vec3& c, int k) {
          if (k == 0) {
            const SphericalTriangle t{UnitVector3(a), UnitVector3(b), UnitVector3(c)};
            total += triangle_area(t) * f(UnitVector3(Vec3(a + b + c)));
            return;
          }
          const Vec3 ab = (a + b).normalized(), bc = (b + c).normalized(), ca = (c + a).normalized();
          rec(a, ab, ca, k - 1);
          rec(ab, b, bc, k - 1);
          rec(ca, bc, c, k - 1);
          rec(ab, bc, ca, k - 1);
        };
    rec(tri.vertex(0).vec(), tri.vertex(1).vec(), tri.vertex(2).vec(), levels);
    return total;
  };
  const double fine = leaf_sum(depth);
  const double coarse = leaf_sum(depth - 1);
  return (4.0 * fine - coarse) / 3.0;
}

/// Sum over |alpha| = 2 of (D^alpha s_p)^2 at x for the piece with local
/// coefficients g, by central differences of the extension.
inline double fd_energy_density(const SphericalTriangle& tri, int d, int p, const Eigen::VectorXd& g,
                                const Vec3& x, double h = 1e-4) {
  auto f = [&](const Vec3& y) { return std::pow(y.norm(), p - d) * g.dot(eval_basis(tri, d, y)); };
  double total = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const Vec3 ea = Vec3::Unit(a) * h, eb = Vec3::Unit(b) * h;
      const double dab = (f(x + ea + eb) - f(x + ea - eb) - f(x - ea + eb) + f(x - ea - eb)) / (4 * h * h);
      // Mixed partials appear once per unordered pair in the energy.
      total += (a == b ? 1.0 : 0.5) * dab * dab;
    }
  }
  return total;
}

/// Dense penalty block of one triangle: rows D^alpha of the extended basis by
/// central differences, integrated with the Richardson midpoint rule above.
inline Eigen::MatrixXd brute_force_penalty_block(const SphericalTriangle& tri, int d, int p, int depth,
                                                 double h = 1e-4) {
  const int k = basis_size(d);
  auto ext = [&](const Vec3& y) -> Eigen::VectorXd { return std::pow(y.norm(), p - d) * eval_basis(tri, d, y); };
  const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
  auto density = [&](const Vec3& x) {
    Eigen::MatrixXd D(6, k);
    for (int r = 0; r < 6; ++r) {
      const Vec3 ea = Vec3::Unit(pairs[r][0]) * h, eb = Vec3::Unit(pairs[r][1]) * h;
      D.row(r) = ((ext(x + ea + eb) - ext(x + ea - eb) - ext(x - ea + eb) + ext(x - ea - eb)) / (4 * h * h)).transpose();
    }
    return Eigen::MatrixXd(D.transpose() * D);
  };
  auto leaf_sum = [&](int levels) {
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(k, k);
    std::function<void(const Vec3&, const Vec3&, const Vec3&, int)> rec =
        [&](const Vec3& a, const Vec3& b, const Vec3& c, int lv) {
          if (lv == 0) {
            const SphericalTriangle t{UnitVector3(a), UnitVector3(b), UnitVector3(c)};
            total += triangle_area(t) * density(Vec3(a + b + c).normalized());
            return;
          }
          const Vec3 ab = (a + b).normalized(), bc = (b + c).normalized(), ca = (c + a).normalized();
          rec(a, ab, ca, lv - 1);
          rec(ab, b, bc, lv - 1);
          rec(ca, bc, c, lv - 1);
          rec(ab, bc, ca, lv - 1);
        };
    rec(tri.vertex(0).vec(), tri.vertex(1).vec(), tri.vertex(2).vec(), levels);
    return total;
  };
  return (4.0 * leaf_sum(depth) - leaf_sum(depth - 1)) / 3.0;
}

/// dim ker of two-sided continuity conditions sampled on every interior edge:
/// value agreement for r >= 0, plus agreement of the derivative across the edge
/// for r >= 1. Dense SVD rank.
inline Eigen::Index spline_dimension(const TriMesh& mesh, int d, int r) {
  const BasisLayout layout(d, mesh.num_triangles());
  const int block = layout.block_size();
  std::vector<Eigen::RowVectorXd> rows;
  for (const MeshEdge& e : mesh.edges()) {
    if (!e.interior()) continue;
    const SphericalTriangle ta = mesh.triangle(e.tri0), tb = mesh.triangle(e.tri1);
    const Vec3 a = mesh.vertex(e.v0).vec(), b = mesh.vertex(e.v1).vec();
    const Vec3 n = a.cross(b).normalized();
    for (int s = 1; s <= d + 2; ++s) {
      const double t = static_cast<double>(s) / (d + 3);
      const Vec3 x = ((1 - t) * a + t * b).normalized();
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(layout.width());
      row.segment(layout.block_offset(e.tri0), block) = eval_basis(ta, d, x).transpose();
      row.segment(layout.block_offset(e.tri1), block) -= eval_basis(tb, d, x).transpose();
      rows.push_back(row);
      if (r >= 1) {
        Eigen::RowVectorXd drow = Eigen::RowVectorXd::Zero(layout.width());
        drow.segment(layout.block_offset(e.tri0), block) = n.transpose() * eval_basis_gradient(ta, d, x);
        drow.segment(layout.block_offset(e.tri1), block) -= n.transpose() * eval_basis_gradient(tb, d, x);
        rows.push_back(drow);
      }
    }
  }
  if (rows.empty()) return layout.width();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), layout.width());
  for (std::size_t i = 0; i < rows.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = rows[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv[i] > 1e-9 * sv[0];
  return layout.width() - rank;
}

}  // namespace tsss::oracle
