#include "tsss/smoothness.hpp"

#include <map>
#include <numeric>
#include <string>

#include <Eigen/QR>

#include "tsss/errors.hpp"

namespace tsss {

namespace {

int slot_of(const TriangleIndices& tri, int vertex) {
  for (int s = 0; s < 3; ++s) {
    if (tri[s] == vertex) return s;
  }
  return -1;
}

int position(int degree, const int (&exps)[3]) {
  return multi_index_position(degree, exps[0], exps[1], exps[2]);
}

struct DisjointSets {
  explicit DisjointSets(Eigen::Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  }
  Eigen::Index find(Eigen::Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
  }
  std::vector<Eigen::Index> parent;
};

}  // namespace

SparseMatrix build_constraints(const TriMesh& mesh, int degree, int smoothness) {
  check_degree(degree);
  if (degree < 1 || smoothness < 0 || smoothness >= degree) {
    throw ConfigError("smoothness r = " + std::to_string(smoothness) +
                      " requires 0 <= r < d with d = " + std::to_string(degree));
  }
  const BasisLayout layout(degree, mesh.num_triangles());
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::Index row = 0;

  for (const MeshEdge& edge : mesh.edges()) {
    if (!edge.interior()) continue;
    const int t1 = edge.tri0;
    const int t2 = edge.tri1;
    const TriangleIndices& tau = mesh.triangle_indices(t1);
    const TriangleIndices& other = mesh.triangle_indices(t2);
    const int s1a = slot_of(tau, edge.v0);
    const int s1b = slot_of(tau, edge.v1);
    const int s1u = 3 - s1a - s1b;
    const int s2a = slot_of(other, edge.v0);
    const int s2b = slot_of(other, edge.v1);
    const int s2w = 3 - s2a - s2b;

    // Off-edge vertex of the other triangle, in tau's coordinates.
    const SphericalTriangle tri1 = mesh.triangle(t1);
    const Vec3 beta = tri1.linear_coords(mesh.vertex(other[s2w]).vec());

    for (int rho = 0; rho <= smoothness; ++rho) {
      const auto& sub = multi_indices(rho);
      for (int j = degree - rho; j >= 0; --j) {
        const int k = degree - rho - j;
        int lhs[3];
        lhs[s2w] = rho;
        lhs[s2a] = j;
        lhs[s2b] = k;
        entries.emplace_back(row, layout.column(t2, position(degree, lhs)), 1.0);
        for (const MultiIndex& m : sub) {
          // m = (nu, mu, kappa) on (u, a, b).
          int rhs[3];
          rhs[s1u] = m.i;
          rhs[s1a] = j + m.j;
          rhs[s1b] = k + m.k;
          const double weight = static_cast<double>(multinomial(rho, m)) *
                                std::pow(beta[s1u], m.i) * std::pow(beta[s1a], m.j) *
                                std::pow(beta[s1b], m.k);
          entries.emplace_back(row, layout.column(t1, position(degree, rhs)), -weight);
        }
        ++row;
      }
    }
  }
  SparseMatrix M(row, layout.width());
  M.setFromTriplets(entries.begin(), entries.end());
  M.makeCompressed();
  return M;
}

Eigen::MatrixXd null_space(const SparseMatrix& M, double rank_tol) {
  const Eigen::Index width = M.cols();
  DisjointSets sets(width);
  std::vector<Eigen::Index> general_rows;
  for (Eigen::Index r = 0; r < M.outerSize(); ++r) {
    std::vector<std::pair<Eigen::Index, double>> nz;
    for (SparseMatrix::InnerIterator it(M, r); it; ++it) {
      if (it.value() != 0.0) nz.emplace_back(it.col(), it.value());
    }
    if (nz.empty()) continue;
    if (nz.size() == 2 && nz[0].second == -nz[1].second && std::abs(nz[0].second) == 1.0) {
      sets.unite(nz[0].first, nz[1].first);
    } else {
      general_rows.push_back(r);
    }
  }

  // Z0: one column per equality class, ordered by smallest member.
  std::map<Eigen::Index, std::vector<Eigen::Index>> classes;
  for (Eigen::Index c = 0; c < width; ++c) classes[sets.find(c)].push_back(c);
  const auto n_classes = static_cast<Eigen::Index>(classes.size());
  std::vector<Eigen::Triplet<double>> z0_entries;
  std::vector<Eigen::Index> class_of(static_cast<std::size_t>(width));
  Eigen::Index col = 0;
  for (const auto& [root, members] : classes) {
    const double w = 1.0 / std::sqrt(static_cast<double>(members.size()));
    for (Eigen::Index m : members) {
      z0_entries.emplace_back(m, col, w);
      class_of[static_cast<std::size_t>(m)] = col;
    }
    ++col;
  }
  Eigen::SparseMatrix<double> Z0(width, n_classes);
  Z0.setFromTriplets(z0_entries.begin(), z0_entries.end());

  if (general_rows.empty()) return Eigen::MatrixXd(Z0);

  // A = M_general Z0.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(general_rows.size()), n_classes);
  for (std::size_t g = 0; g < general_rows.size(); ++g) {
    for (SparseMatrix::InnerIterator it(M, general_rows[g]); it; ++it) {
      const Eigen::Index c = class_of[static_cast<std::size_t>(it.col())];
      const double w = 1.0 / std::sqrt(static_cast<double>(classes[sets.find(it.col())].size()));
      A(static_cast<Eigen::Index>(g), c) += it.value() * w;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
  qr.setThreshold(rank_tol);
  const Eigen::Index rank = qr.rank();
  const Eigen::Index nullity = n_classes - rank;
  if (nullity == 0) return Eigen::MatrixXd::Zero(width, 0);
  Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(n_classes, nullity);
  tail.bottomRows(nullity).setIdentity();
  const Eigen::MatrixXd K = qr.householderQ() * tail;
  return Z0 * K;
}

ConstraintSystem make_constraint_system(const TriMesh& mesh, int degree, int smoothness,
                                        double rank_tol) {
  ConstraintSystem sys;
  sys.M = build_constraints(mesh, degree, smoothness);
  sys.Z = null_space(sys.M, rank_tol);
  return sys;
}

}  // namespace tsss
