#include "tsss/estimator.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "tsss/errors.hpp"
#include "tsss/parallel.hpp"
#include "tsss/rng.hpp"

namespace tsss {

namespace {

struct Factor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

bool usable(const Eigen::LLT<Eigen::MatrixXd>& llt, double min_ratio) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  if (!diag.allFinite()) return false;
  const double lo = diag.minCoeff();
  const double hi = diag.maxCoeff();
  return lo > 0.0 && (lo * lo) >= min_ratio * (hi * hi);
}

Factor factorize(const Eigen::MatrixXd& G, const Eigen::MatrixXd& R, double lambda) {
  Eigen::MatrixXd A = G;
  if (lambda > 0.0) A.noalias() += lambda * R;
  Factor f;
  f.llt.compute(A);
  if (usable(f.llt, 1e-13)) return f;
  const double jitter = 1e-10 * A.trace() / static_cast<double>(A.rows());
  if (!(jitter > 0.0) || !std::isfinite(jitter)) {
    throw FitError("normal system is zero or non-finite; check data coverage");
  }
  A.diagonal().array() += jitter;
  f.llt.compute(A);
  f.jitter = jitter;
  if (!usable(f.llt, 0.0)) {
    throw FitError("normal system is rank deficient beyond jitter; use a coarser mesh or lambda > 0");
  }
  return f;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& BZ) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(BZ.cols(), BZ.cols());
  G.selfadjointView<Eigen::Lower>().rankUpdate(BZ.transpose());
  return G.selfadjointView<Eigen::Lower>();
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be finite and nonnegative, got " + std::to_string(lambda));
  }
}

Eigen::MatrixXd design_for_fit(const SplineSpace& space, std::span<const UnitVector3> points) {
  try {
    return space.reduced_design(points);
  } catch (const LocationError& e) {
    throw FitError(e.what());
  }
}

}  // namespace

void Dataset::check() const {
  if (locations.size() != responses.size()) {
    throw ConfigError("dataset has " + std::to_string(locations.size()) + " locations but " +
                      std::to_string(responses.size()) + " responses");
  }
}

SplineSpace::SplineSpace(std::shared_ptr<const TriMesh> mesh, int degree, int smoothness,
                         const SpaceOptions& opts)
    : mesh_(std::move(mesh)), smoothness_(smoothness) {
  if (!mesh_ || mesh_->num_triangles() == 0) throw ConfigError("spline space needs a nonempty mesh");
  check_degree(degree);
  layout_ = BasisLayout(degree, mesh_->num_triangles());
  constraints_ = make_constraint_system(*mesh_, degree, smoothness, opts.rank_tol);
  if (constraints_.effective_dim() < 1) throw ConfigError("spline space has dimension zero");
  PenaltyOptions popts;
  popts.extension = opts.extension;
  popts.integration = opts.integration;
  popts.threads = opts.threads;
  penalty_ = assemble_penalty(*mesh_, degree, popts);
  reduced_penalty_ = penalty_.project(constraints_.Z);
}

Eigen::MatrixXd SplineSpace::reduced_design(std::span<const UnitVector3> points) const {
  const Eigen::Index k = effective_dim();
  const int nb = layout_.block_size();
  const auto& Z = constraints_.Z;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), k);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto loc = mesh_->try_locate(points[i]);
    if (!loc) throw LocationError("point " + std::to_string(i) + " lies outside the mesh");
    const Eigen::VectorXd b = eval_basis(layout_.degree(), loc->coords);
    out.row(static_cast<Eigen::Index>(i)).noalias() =
        b.transpose() * Z.middleRows(layout_.block_offset(loc->triangle), nb);
  }
  return out;
}

SparseMatrix build_design(std::span<const UnitVector3> points, const TriMesh& mesh,
                          const BasisLayout& layout) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(points.size() * static_cast<std::size_t>(layout.block_size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto loc = mesh.try_locate(points[i]);
    if (!loc) throw FitError("point " + std::to_string(i) + " lies outside the mesh");
    const Eigen::VectorXd b = eval_basis(layout.degree(), loc->coords);
    for (int q = 0; q < layout.block_size(); ++q) {
      if (b[q] != 0.0) {
        entries.emplace_back(static_cast<int>(i), static_cast<int>(layout.column(loc->triangle, q)), b[q]);
      }
    }
  }
  SparseMatrix B(static_cast<Eigen::Index>(points.size()), layout.width());
  B.setFromTriplets(entries.begin(), entries.end());
  return B;
}

FittedModel::FittedModel(std::shared_ptr<const TriMesh> mesh, int degree, int smoothness,
                         double lambda, Eigen::VectorXd gamma, FitDiagnostics diagnostics)
    : mesh_(std::move(mesh)),
      smoothness_(smoothness),
      lambda_(lambda),
      gamma_(std::move(gamma)),
      diagnostics_(diagnostics) {
  if (!mesh_) throw ModelError("model has no mesh");
  layout_ = BasisLayout(degree, mesh_->num_triangles());
  if (gamma_.size() != layout_.width()) {
    throw ModelError("model has " + std::to_string(gamma_.size()) + " coefficients, expected " +
                     std::to_string(layout_.width()));
  }
  if (!gamma_.allFinite()) throw ModelError("model coefficients are not finite");
}

double FittedModel::operator()(const UnitVector3& x) const {
  const auto loc = mesh_->try_locate(x);
  if (!loc) throw PredictionError("point lies outside the mesh");
  const Eigen::VectorXd b = eval_basis(layout_.degree(), loc->coords);
  return gamma_.segment(layout_.block_offset(loc->triangle), layout_.block_size()).dot(b);
}

FittedModel fit(const Dataset& data, const SplineSpace& space, double lambda) {
  data.check();
  check_lambda(lambda);
  if (data.size() == 0) throw FitError("no observations");
  const Eigen::MatrixXd BZ = design_for_fit(space, data.locations);
  const auto Y = data.response_vector();
  const Eigen::MatrixXd G = gram(BZ);
  const Eigen::VectorXd rhs = BZ.transpose() * Y;
  const Factor f = factorize(G, space.reduced_penalty(), lambda);
  const Eigen::VectorXd theta = f.llt.solve(rhs);
  if (!theta.allFinite()) throw FitError("solution is not finite");

  FitDiagnostics diag;
  const Eigen::VectorXd resid = Y - BZ * theta;
  diag.rss = resid.squaredNorm();
  diag.effective_dim = space.effective_dim();
  diag.jitter = f.jitter;
  Eigen::VectorXd gamma = space.Z() * theta;
  diag.energy = space.penalty().quadratic_form(gamma);
  const Eigen::VectorXd kkt = BZ.transpose() * resid - lambda * (space.reduced_penalty() * theta);
  const double scale = rhs.norm();
  diag.kkt_residual = scale > 0.0 ? kkt.norm() / scale : kkt.norm();
  diag.constraint_residual =
      space.constraints().M.rows() > 0 ? (space.constraints().M * gamma).cwiseAbs().maxCoeff() : 0.0;
  if (scale > 0.0 && !(diag.kkt_residual < 1e-6)) {
    throw FitError("KKT residual " + std::to_string(diag.kkt_residual) +
                   " too large; use a coarser mesh or lambda > 0");
  }
  return FittedModel(space.mesh_ptr(), space.degree(), space.smoothness(), lambda, std::move(gamma),
                     diag);
}

FittedModel fit(const Dataset& data, std::shared_ptr<const TriMesh> mesh, const FitConfig& config) {
  check_lambda(config.lambda);
  const SplineSpace space(std::move(mesh), config.degree, config.smoothness, config.space);
  return fit(data, space, config.lambda);
}

PredictionResult predict(const FittedModel& model, std::span<const UnitVector3> points) {
  PredictionResult out;
  out.values.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      out.values[i] = model(points[i]);
    } catch (const PredictionError& e) {
      out.values[i] = std::nan("");
      out.errors.push_back({i, "point " + std::to_string(i) + ": " + e.what()});
    }
  }
  return out;
}

std::vector<double> default_lambda_grid(std::size_t n, std::size_t num_triangles, int count) {
  if (count < 1 || num_triangles == 0) throw ConfigError("lambda grid needs count >= 1 and a mesh");
  const double scale = static_cast<double>(n) / static_cast<double>(num_triangles);
  const double lo = std::log(1e-6);
  const double hi = std::log(1e3);
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    grid[static_cast<std::size_t>(i)] = scale * std::exp(lo + t * (hi - lo));
  }
  return grid;
}

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(folds) > n) {
    throw ConfigError("cannot split " + std::to_string(n) + " observations into " +
                      std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed, 0);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<int> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return fold_of;
}

CvResult kfold_cv(const Dataset& data, std::shared_ptr<const TriMesh> mesh, const CvOptions& opts,
                  std::span<const SplineSpace* const> spaces) {
  data.check();
  if (opts.degrees.empty()) throw ConfigError("cross-validation needs at least one degree");
  if (!spaces.empty() && spaces.size() != opts.degrees.size()) {
    throw ConfigError("one spline space per candidate degree is required");
  }
  const std::vector<double> lambdas =
      opts.lambdas.empty() ? default_lambda_grid(data.size(), mesh->num_triangles()) : opts.lambdas;
  for (double l : lambdas) check_lambda(l);
  const int K = opts.folds;
  CvResult result;
  result.fold_of = fold_assignment(data.size(), K, opts.seed);

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < data.size(); ++i) {
    members[static_cast<std::size_t>(result.fold_of[i])].push_back(static_cast<Eigen::Index>(i));
  }
  const auto Y = data.response_vector();

  for (std::size_t di = 0; di < opts.degrees.size(); ++di) {
    std::optional<SplineSpace> owned;
    const SplineSpace* space = spaces.empty() ? nullptr : spaces[di];
    if (!space) {
      owned.emplace(mesh, opts.degrees[di], opts.smoothness, opts.space);
      space = &*owned;
    }
    const Eigen::MatrixXd BZ = design_for_fit(*space, data.locations);
    std::vector<Eigen::MatrixXd> BZk(static_cast<std::size_t>(K));
    std::vector<Eigen::VectorXd> Yk(static_cast<std::size_t>(K));
    std::vector<Eigen::MatrixXd> Gk(static_cast<std::size_t>(K));
    std::vector<Eigen::VectorXd> bk(static_cast<std::size_t>(K));
    Eigen::MatrixXd G_full = Eigen::MatrixXd::Zero(BZ.cols(), BZ.cols());
    Eigen::VectorXd b_full = Eigen::VectorXd::Zero(BZ.cols());
    for (std::size_t k = 0; k < members.size(); ++k) {
      BZk[k] = BZ(members[k], Eigen::all);
      Yk[k] = Y(members[k]);
      Gk[k] = gram(BZk[k]);
      bk[k] = BZk[k].transpose() * Yk[k];
      G_full += Gk[k];
      b_full += bk[k];
    }

    const std::size_t tasks = lambdas.size() * static_cast<std::size_t>(K);
    std::vector<double> sse(tasks, 0.0);
    std::vector<char> ok(tasks, 1);
    parallel_for(tasks, opts.threads, [&](std::size_t task) {
      const std::size_t li = task / static_cast<std::size_t>(K);
      const std::size_t k = task % static_cast<std::size_t>(K);
      try {
        const Factor f = factorize(G_full - Gk[k], space->reduced_penalty(), lambdas[li]);
        const Eigen::VectorXd theta = f.llt.solve(b_full - bk[k]);
        if (!theta.allFinite()) throw FitError("non-finite fold solution");
        sse[task] = (Yk[k] - BZk[k] * theta).squaredNorm();
      } catch (const FitError&) {
        ok[task] = 0;
      }
    });
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      CvEntry entry{opts.degrees[di], lambdas[li], 0.0, true};
      for (int k = 0; k < K; ++k) {
        const std::size_t task = li * static_cast<std::size_t>(K) + static_cast<std::size_t>(k);
        entry.feasible = entry.feasible && ok[task];
        entry.score += sse[task];
      }
      if (!entry.feasible) entry.score = std::nan("");
      result.table.push_back(entry);
    }
  }

  std::vector<std::size_t> order(result.table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = result.table[a];
    const auto& y = result.table[b];
    return x.degree != y.degree ? x.degree < y.degree : x.lambda < y.lambda;
  });
  std::vector<CvEntry> sorted;
  sorted.reserve(order.size());
  for (auto i : order) sorted.push_back(result.table[i]);
  result.table = std::move(sorted);

  const CvEntry* best = nullptr;
  for (const auto& e : result.table) {
    if (e.feasible && (!best || e.score < best->score)) best = &e;
  }
  if (!best) throw FitError("every cross-validation candidate is infeasible");
  result.degree = best->degree;
  result.lambda = best->lambda;
  result.score = best->score;
  return result;
}

double mammen_weight(double u) noexcept {
  static const double s5 = std::sqrt(5.0);
  return u < (5.0 + s5) / 10.0 ? (1.0 - s5) / 2.0 : (1.0 + s5) / 2.0;
}

BootstrapResult bootstrap_se(const Dataset& data, const SplineSpace& space, double lambda,
                             std::span<const UnitVector3> query, const BootstrapOptions& opts) {
  if (opts.replicates < 2) throw ConfigError("bootstrap needs at least 2 replicates");
  data.check();
  check_lambda(lambda);
  if (data.size() == 0) throw FitError("no observations");
  const Eigen::MatrixXd BZ = design_for_fit(space, data.locations);
  Eigen::MatrixXd QZ;
  try {
    QZ = space.reduced_design(query);
  } catch (const LocationError& e) {
    throw PredictionError(std::string("bootstrap query ") + e.what());
  }
  const auto Y = data.response_vector();
  const Factor f = factorize(gram(BZ), space.reduced_penalty(), lambda);
  const Eigen::VectorXd theta = f.llt.solve(BZ.transpose() * Y);
  const Eigen::VectorXd fitted = BZ * theta;
  const Eigen::VectorXd resid = Y - fitted;

  const auto B = static_cast<std::size_t>(opts.replicates);
  Eigen::MatrixXd samples(QZ.rows(), static_cast<Eigen::Index>(B));
  parallel_for(B, opts.threads, [&](std::size_t b) {
    Rng rng(opts.seed, b + 1);
    Eigen::VectorXd ystar(fitted.size());
    for (Eigen::Index i = 0; i < fitted.size(); ++i) {
      ystar[i] = fitted[i] + mammen_weight(rng.uniform()) * resid[i];
    }
    const Eigen::VectorXd th = f.llt.solve(BZ.transpose() * ystar);
    samples.col(static_cast<Eigen::Index>(b)) = QZ * th;
  });

  BootstrapResult out;
  out.replicates = opts.replicates;
  out.seed = opts.seed;
  out.fitted = QZ * theta;
  const double divisor = opts.unbiased ? static_cast<double>(B - 1) : static_cast<double>(B);
  out.se.resize(QZ.rows());
  for (Eigen::Index q = 0; q < QZ.rows(); ++q) {
    const double mean = samples.row(q).mean();
    out.se[q] = std::sqrt((samples.row(q).array() - mean).square().sum() / divisor);
  }
  return out;
}

double mean_squared_error(std::span<const double> truth, std::span<const double> estimate) {
  if (truth.empty()) throw EvaluationError("mean squared error of an empty set");
  if (truth.size() != estimate.size()) {
    throw EvaluationError("mean squared error needs equal lengths, got " +
                          std::to_string(truth.size()) + " and " + std::to_string(estimate.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - estimate[i];
    s += d * d;
  }
  return s / static_cast<double>(truth.size());
}

}  // namespace tsss
