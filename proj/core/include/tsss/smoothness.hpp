#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tsss/basis.hpp"
#include "tsss/mesh.hpp"

namespace tsss {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Cross-edge C^r conditions on the Bernstein-Bezier coefficients.
///
/// For an interior edge shared by tau (off-edge vertex u) and tau~ (off-edge
/// vertex w), and rho = 0..r, j + k = d - rho:
///
///   c~[w:rho, a:j, b:k] = sum_{nu+mu+kappa=rho} c[u:nu, a:j+mu, b:k+kappa] B^rho_{nu mu kappa}(w)
///
/// where a, b are the shared vertices and B^rho is evaluated in tau's
/// barycentric coordinates of w. Rows may be redundant. Throws ConfigError
/// unless 0 <= r < d.
SparseMatrix build_constraints(const TriMesh& mesh, int degree, int smoothness);

/// Number of raw rows build_constraints emits per interior edge.
constexpr int constraint_rows_per_edge(int degree, int smoothness) noexcept {
  int rows = 0;
  for (int rho = 0; rho <= smoothness; ++rho) rows += degree - rho + 1;
  return rows;
}

/// Orthonormal basis of ker(M).
///
/// Rows that equate two coefficients (entries +1 and -1) are merged first by
/// union-find, giving an orthonormal 0/(1/sqrt m) basis Z0 of their kernel;
/// the remaining rows are reduced on range(Z0) with a column-pivoted
/// Householder QR, pivots below rank_tol times the largest counting as zero.
Eigen::MatrixXd null_space(const SparseMatrix& M, double rank_tol = 1e-10);

struct ConstraintSystem {
  SparseMatrix M;
  Eigen::MatrixXd Z;  // width x effective_dim, orthonormal columns, M Z = 0

  Eigen::Index effective_dim() const noexcept { return Z.cols(); }
};

ConstraintSystem make_constraint_system(const TriMesh& mesh, int degree, int smoothness,
                                        double rank_tol = 1e-10);

}  // namespace tsss
