#include "tsss/energy.hpp"

#include <numbers>

#include "tsss/errors.hpp"
#include "tsss/parallel.hpp"

namespace tsss {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one node");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 0.5 * w;
  }
}

QuadratureRule QuadratureRule::collapsed_gauss(int exactness) {
  if (exactness < 0) throw ConfigError("quadrature exactness must be nonnegative");
  // Degree e in (s, t) becomes degree e + 1 in u after the (1 - u) factor.
  const int n = std::max(1, (exactness + 3) / 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.exactness = exactness;
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double u = x[static_cast<std::size_t>(a)];
      const double v = x[static_cast<std::size_t>(b)];
      const double s = u;
      const double t = v * (1.0 - u);
      const double weight = 2.0 * w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)] * (1.0 - u);
      rule.points.push_back({1.0 - s - t, s, t});
      rule.weights.push_back(weight);
      total += weight;
    }
  }
  for (auto& wt : rule.weights) wt /= total;
  return rule;
}

PenaltyMatrix::PenaltyMatrix(int block_size, std::vector<Eigen::MatrixXd> blocks)
    : block_(block_size), blocks_(std::move(blocks)) {}

double PenaltyMatrix::quadratic_form(const Eigen::VectorXd& gamma) const {
  double e = 0.0;
  for (std::size_t t = 0; t < blocks_.size(); ++t) {
    const auto g = gamma.segment(static_cast<Eigen::Index>(t) * block_, block_);
    e += g.dot(blocks_[t] * g);
  }
  return e;
}

Eigen::VectorXd PenaltyMatrix::multiply(const Eigen::VectorXd& gamma) const {
  Eigen::VectorXd out(gamma.size());
  for (std::size_t t = 0; t < blocks_.size(); ++t) {
    const Eigen::Index off = static_cast<Eigen::Index>(t) * block_;
    out.segment(off, block_) = blocks_[t] * gamma.segment(off, block_);
  }
  return out;
}

Eigen::MatrixXd PenaltyMatrix::project(const Eigen::MatrixXd& Z) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Z.cols(), Z.cols());
  for (std::size_t t = 0; t < blocks_.size(); ++t) {
    const auto Zt = Z.middleRows(static_cast<Eigen::Index>(t) * block_, block_);
    const Eigen::MatrixXd PZ = blocks_[t] * Zt;
    out.noalias() += Zt.transpose() * PZ;
  }
  return 0.5 * (out + out.transpose());
}

Eigen::VectorXd PenaltyMatrix::project(const Eigen::MatrixXd& Z, const Eigen::VectorXd& gamma) const {
  return Z.transpose() * multiply(gamma);
}

Eigen::MatrixXd penalty_block(const SphericalTriangle& tri, int degree, int p,
                              const QuadratureRule& rule, const IntegrationOptions& opts,
                              IntegrationResult* info) {
  auto integrand = [&](const UnitVector3& x) -> Eigen::MatrixXd {
    const auto D = second_derivatives_extended(tri, degree, p, x.vec());
    return D.transpose() * D;
  };
  Eigen::MatrixXd block = integrate_triangle(integrand, tri, rule, opts, info);
  return 0.5 * (block + block.transpose());
}

PenaltyMatrix assemble_penalty(const TriMesh& mesh, int degree, const PenaltyOptions& opts) {
  check_degree(degree);
  const int p = opts.extension.value_or(extension_degree(degree));
  const QuadratureRule rule = QuadratureRule::for_degree(degree);
  std::vector<Eigen::MatrixXd> blocks(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), opts.threads, [&](std::size_t t) {
    blocks[t] = penalty_block(mesh.triangle(static_cast<int>(t)), degree, p, rule, opts.integration);
  });
  return PenaltyMatrix(basis_size(degree), std::move(blocks));
}

}  // namespace tsss
