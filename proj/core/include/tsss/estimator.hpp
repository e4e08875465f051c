#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tsss/basis.hpp"
#include "tsss/energy.hpp"
#include "tsss/mesh.hpp"
#include "tsss/smoothness.hpp"

namespace tsss {

struct Dataset {
  std::vector<UnitVector3> locations;
  std::vector<double> responses;

  std::size_t size() const noexcept { return locations.size(); }
  /// Throws ConfigError on a length mismatch.
  void check() const;
  Eigen::Map<const Eigen::VectorXd> response_vector() const {
    return {responses.data(), static_cast<Eigen::Index>(responses.size())};
  }
};

struct SpaceOptions {
  double rank_tol = 1e-10;
  /// Penalty extension degree; defaults to d mod 2.
  std::optional<int> extension;
  IntegrationOptions integration;
  int threads = 1;
};

/// Everything about (mesh, d, r) that does not depend on data: constraint
/// null space Z, penalty P and its reduction Z' P Z.
class SplineSpace {
 public:
  SplineSpace(std::shared_ptr<const TriMesh> mesh, int degree, int smoothness,
              const SpaceOptions& opts = {});

  const TriMesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const noexcept { return mesh_; }
  int degree() const noexcept { return layout_.degree(); }
  int smoothness() const noexcept { return smoothness_; }
  const BasisLayout& layout() const noexcept { return layout_; }
  const ConstraintSystem& constraints() const noexcept { return constraints_; }
  const PenaltyMatrix& penalty() const noexcept { return penalty_; }
  const Eigen::MatrixXd& reduced_penalty() const noexcept { return reduced_penalty_; }
  const Eigen::MatrixXd& Z() const noexcept { return constraints_.Z; }
  Eigen::Index effective_dim() const noexcept { return constraints_.effective_dim(); }

  /// Rows B(x_i)' Z. Throws LocationError naming the first unlocatable index.
  Eigen::MatrixXd reduced_design(std::span<const UnitVector3> points) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  int smoothness_ = 0;
  BasisLayout layout_;
  ConstraintSystem constraints_;
  PenaltyMatrix penalty_;
  Eigen::MatrixXd reduced_penalty_;
};

/// Sparse n x width design; row i holds the basis values of X_i's triangle.
/// Throws FitError naming the first point outside the mesh.
SparseMatrix build_design(std::span<const UnitVector3> points, const TriMesh& mesh,
                          const BasisLayout& layout);

struct FitConfig {
  int degree = 3;
  int smoothness = 1;
  double lambda = 0.0;
  SpaceOptions space;
};

struct FitDiagnostics {
  double rss = 0.0;
  double energy = 0.0;
  Eigen::Index effective_dim = 0;
  double kkt_residual = 0.0;      // relative to |Z' B' Y|
  double constraint_residual = 0.0;  // max |M gamma|
  double jitter = 0.0;
};

class FittedModel {
 public:
  FittedModel() = default;
  FittedModel(std::shared_ptr<const TriMesh> mesh, int degree, int smoothness, double lambda,
              Eigen::VectorXd gamma, FitDiagnostics diagnostics = {});

  const TriMesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const TriMesh>& mesh_ptr() const noexcept { return mesh_; }
  const BasisLayout& layout() const noexcept { return layout_; }
  int degree() const noexcept { return layout_.degree(); }
  int smoothness() const noexcept { return smoothness_; }
  double lambda() const noexcept { return lambda_; }
  const Eigen::VectorXd& coefficients() const noexcept { return gamma_; }
  const FitDiagnostics& diagnostics() const noexcept { return diagnostics_; }

  /// Throws PredictionError outside the mesh domain.
  double operator()(const UnitVector3& x) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  BasisLayout layout_;
  int smoothness_ = 0;
  double lambda_ = 0.0;
  Eigen::VectorXd gamma_;
  FitDiagnostics diagnostics_;
};

/// Penalized least squares over ker(M), solved as
/// (G + lambda Z'PZ) theta = (BZ)' Y with G = (BZ)'(BZ).
FittedModel fit(const Dataset& data, const SplineSpace& space, double lambda);
FittedModel fit(const Dataset& data, std::shared_ptr<const TriMesh> mesh, const FitConfig& config);

struct PointError {
  std::size_t index = 0;
  std::string message;
};

struct PredictionResult {
  std::vector<double> values;  // NaN where the point failed
  std::vector<PointError> errors;

  bool ok() const noexcept { return errors.empty(); }
};

PredictionResult predict(const FittedModel& model, std::span<const UnitVector3> points);

/// Default lambda grid: `count` log-spaced values spanning [1e-6, 1e3] * n / N.
std::vector<double> default_lambda_grid(std::size_t n, std::size_t num_triangles, int count = 10);

struct CvOptions {
  std::vector<int> degrees{3};
  std::vector<double> lambdas;  // empty: default grid
  int smoothness = 1;
  int folds = 5;
  std::uint64_t seed = 0;
  SpaceOptions space;
  int threads = 1;
};

struct CvEntry {
  int degree = 0;
  double lambda = 0.0;
  double score = 0.0;  // sum of squared held-out errors
  bool feasible = true;
};

struct CvResult {
  int degree = 0;
  double lambda = 0.0;
  double score = 0.0;
  std::vector<CvEntry> table;  // ordered by degree, then lambda
  std::vector<int> fold_of;    // fold index of each observation
};

/// Seeded K-fold assignment: depends only on (seed, n).
std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed);

/// Spaces are built per degree, or taken from `spaces` when supplied (same order as
/// opts.degrees).
CvResult kfold_cv(const Dataset& data, std::shared_ptr<const TriMesh> mesh, const CvOptions& opts,
                  std::span<const SplineSpace* const> spaces = {});

struct BootstrapOptions {
  int replicates = 100;
  std::uint64_t seed = 0;
  /// Divide by B - 1 instead of B.
  bool unbiased = false;
  int threads = 1;
};

struct BootstrapResult {
  Eigen::VectorXd se;
  Eigen::VectorXd fitted;  // m-hat at the query points
  int replicates = 0;
  std::uint64_t seed = 0;
};

/// Two-point weight with mean 0, variance 1 and third moment 1.
double mammen_weight(double u) noexcept;

/// Wild bootstrap: residuals Y - m-hat(X) are multiplied by Mammen weights and
/// the model is refit with the same (mesh, d, r, lambda). Replicate b draws
/// from stream b + 1 of the seed.
BootstrapResult bootstrap_se(const Dataset& data, const SplineSpace& space, double lambda,
                             std::span<const UnitVector3> query, const BootstrapOptions& opts);

/// Mean squared difference. Throws EvaluationError on empty or mismatched input.
double mean_squared_error(std::span<const double> truth, std::span<const double> estimate);

}  // namespace tsss
