#include "tsss/basis.hpp"

#include <array>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "tsss/errors.hpp"

namespace tsss {

namespace {

std::array<std::vector<MultiIndex>, kMaxDegree + 1> build_tables() {
  std::array<std::vector<MultiIndex>, kMaxDegree + 1> tables;
  for (int d = 0; d <= kMaxDegree; ++d) {
    for (int i = d; i >= 0; --i) {
      for (int j = d - i; j >= 0; --j) tables[d].push_back({i, j, d - i - j});
    }
  }
  return tables;
}

const std::array<std::vector<MultiIndex>, kMaxDegree + 1>& tables() {
  static const auto t = build_tables();
  return t;
}

std::int64_t factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

const std::array<std::vector<double>, kMaxDegree + 1>& coefficient_tables() {
  static const auto t = [] {
    std::array<std::vector<double>, kMaxDegree + 1> out;
    for (int d = 0; d <= kMaxDegree; ++d) {
      for (const auto& m : tables()[d]) out[d].push_back(static_cast<double>(multinomial(d, m)));
    }
    return out;
  }();
  return t;
}

// powers[k][e] = b_k^e, e = 0..d.
using PowerTable = std::array<std::array<double, kMaxDegree + 1>, 3>;

PowerTable powers_of(const Vec3& b, int degree) {
  PowerTable pw{};
  for (int k = 0; k < 3; ++k) {
    pw[k][0] = 1.0;
    for (int e = 1; e <= degree; ++e) pw[k][e] = pw[k][e - 1] * b[k];
  }
  return pw;
}

inline double pw_at(const PowerTable& pw, int k, int e) { return e < 0 ? 0.0 : pw[k][e]; }

}  // namespace

void check_degree(int degree) {
  if (degree < 0 || degree > kMaxDegree) {
    throw ConfigError("spline degree " + std::to_string(degree) + " outside [0, " +
                      std::to_string(kMaxDegree) + "]");
  }
}

const std::vector<MultiIndex>& multi_indices(int degree) {
  check_degree(degree);
  return tables()[degree];
}

std::int64_t multinomial(int degree, const MultiIndex& m) {
  return factorial(degree) / (factorial(m.i) * factorial(m.j) * factorial(m.k));
}

BasisLayout::BasisLayout(int degree, std::size_t num_triangles)
    : degree_(degree), block_(basis_size(degree)), triangles_(num_triangles) {
  check_degree(degree);
}

Eigen::VectorXd eval_basis(const SphericalTriangle& tri, int degree, const Vec3& x) {
  const Vec3 b = tri.linear_coords(x);
  return eval_basis(degree, BarycentricCoords{b[0], b[1], b[2]});
}

Eigen::VectorXd eval_basis(int degree, const BarycentricCoords& bc) {
  check_degree(degree);
  const auto& idx = multi_indices(degree);
  const auto& coef = coefficient_tables()[degree];
  const Vec3 b(bc.b1, bc.b2, bc.b3);
  const PowerTable pw = powers_of(b, degree);
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t n = 0; n < idx.size(); ++n) {
    out[static_cast<Eigen::Index>(n)] = coef[n] * pw[0][idx[n].i] * pw[1][idx[n].j] * pw[2][idx[n].k];
  }
  return out;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> eval_basis_gradient(const SphericalTriangle& tri, int degree,
                                                             const Vec3& x) {
  const auto& idx = multi_indices(degree);
  const auto& coef = coefficient_tables()[degree];
  const Mat3& forms = tri.barycentric_forms();
  const PowerTable pw = powers_of(forms * x, degree);
  Eigen::Matrix<double, 3, Eigen::Dynamic> out(3, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t n = 0; n < idx.size(); ++n) {
    const int e[3] = {idx[n].i, idx[n].j, idx[n].k};
    Vec3 gb;
    for (int s = 0; s < 3; ++s) {
      double term = coef[n] * e[s] * pw_at(pw, s, e[s] - 1);
      for (int o = 0; o < 3; ++o) {
        if (o != s) term *= pw[o][e[o]];
      }
      gb[s] = term;
    }
    out.col(static_cast<Eigen::Index>(n)) = forms.transpose() * gb;
  }
  return out;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> second_derivatives_extended(const SphericalTriangle& tri,
                                                                     int degree, int p,
                                                                     const Vec3& x) {
  const auto& idx = multi_indices(degree);
  const auto& coef = coefficient_tables()[degree];
  const Mat3& L = tri.barycentric_forms();
  const PowerTable pw = powers_of(L * x, degree);

  // Radial factor r(x) = |x|^q, q = p - d.
  const double q = p - degree;
  const double rr = x.squaredNorm();
  const double r = std::pow(rr, 0.5 * q);
  const Vec3 dr = q * std::pow(rr, 0.5 * q - 1.0) * x;
  const Mat3 ddr = q * std::pow(rr, 0.5 * q - 1.0) * Mat3::Identity() +
                   q * (q - 2.0) * std::pow(rr, 0.5 * q - 2.0) * (x * x.transpose());

  static constexpr int kRows[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
  Eigen::Matrix<double, 6, Eigen::Dynamic> out(6, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t n = 0; n < idx.size(); ++n) {
    const int e[3] = {idx[n].i, idx[n].j, idx[n].k};
    // Value, gradient and Hessian of the monomial in barycentric space.
    const double g = coef[n] * pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]];
    Vec3 gb;
    Mat3 hb;
    for (int s = 0; s < 3; ++s) {
      for (int t = s; t < 3; ++t) {
        double term = coef[n];
        for (int o = 0; o < 3; ++o) {
          int drop = (o == s) + (o == t);
          double fall = 1.0;
          for (int f = 0; f < drop; ++f) fall *= e[o] - f;
          term *= fall * pw_at(pw, o, e[o] - drop);
        }
        hb(s, t) = hb(t, s) = term;
      }
      double term = coef[n] * e[s] * pw_at(pw, s, e[s] - 1);
      for (int o = 0; o < 3; ++o) {
        if (o != s) term *= pw[o][e[o]];
      }
      gb[s] = term;
    }
    const Vec3 gx = L.transpose() * gb;
    const Mat3 hx = L.transpose() * hb * L;
    for (int row = 0; row < 6; ++row) {
      const int a = kRows[row][0];
      const int b = kRows[row][1];
      out(row, static_cast<Eigen::Index>(n)) =
          r * hx(a, b) + dr[a] * gx[b] + dr[b] * gx[a] + ddr(a, b) * g;
    }
  }
  return out;
}

double eval_piece(const Eigen::VectorXd& gamma, const BasisLayout& layout, const TriMesh& mesh,
                  int triangle, const Vec3& x) {
  const Eigen::VectorXd basis = eval_basis(mesh.triangle(triangle), layout.degree(), x);
  return gamma.segment(layout.block_offset(triangle), layout.block_size()).dot(basis);
}

double eval_spline(const Eigen::VectorXd& gamma, const BasisLayout& layout, const TriMesh& mesh,
                   const UnitVector3& x) {
  const Location loc = mesh.locate(x);
  return eval_piece(gamma, layout, mesh, loc.triangle, x.vec());
}

std::vector<UnitVector3> domain_points(const SphericalTriangle& tri, int degree) {
  std::vector<UnitVector3> pts;
  for (const auto& m : multi_indices(degree)) {
    if (degree == 0) {
      pts.emplace_back(tri.vertex(0).vec() + tri.vertex(1).vec() + tri.vertex(2).vec());
      continue;
    }
    pts.emplace_back((m.i * tri.vertex(0).vec() + m.j * tri.vertex(1).vec() + m.k * tri.vertex(2).vec()) /
                     degree);
  }
  return pts;
}

Eigen::VectorXd interpolate_on_triangle(const SphericalTriangle& tri, int degree,
                                        const SphereFunction& f) {
  const auto pts = domain_points(tri, degree);
  const int nb = basis_size(degree);
  Eigen::MatrixXd A(nb, nb);
  Eigen::VectorXd rhs(nb);
  for (int r = 0; r < nb; ++r) {
    A.row(r) = eval_basis(tri, degree, pts[static_cast<std::size_t>(r)]).transpose();
    rhs[r] = f(pts[static_cast<std::size_t>(r)]);
  }
  return A.partialPivLu().solve(rhs);
}

Eigen::VectorXd interpolate_spline(const TriMesh& mesh, const BasisLayout& layout,
                                   const SphereFunction& f) {
  Eigen::VectorXd gamma(layout.width());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    gamma.segment(layout.block_offset(ti), layout.block_size()) =
        interpolate_on_triangle(mesh.triangle(ti), layout.degree(), f);
  }
  return gamma;
}

}  // namespace tsss
