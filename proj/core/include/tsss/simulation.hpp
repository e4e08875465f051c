#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsss/estimator.hpp"
#include "tsss/geometry.hpp"
#include "tsss/mesh.hpp"
#include "tsss/rng.hpp"

namespace tsss {

enum class TestFunction { M1, M2, M3 };
enum class NoiseKind { Constant, Sigma1, Sigma2 };

std::string_view to_string(TestFunction f) noexcept;
std::string_view to_string(NoiseKind k) noexcept;
/// Parses "m1", "m2", "m3"; throws ConfigError otherwise.
TestFunction parse_test_function(std::string_view name);
/// Parses "constant", "sigma1", "sigma2".
NoiseKind parse_noise_kind(std::string_view name);

/// -2 + (x1^2 + exp(2 x2^3) + exp(2 x3^2) + 10 x1 x2 x3) / 2
double eval_m1(const UnitVector3& x);
/// 2.5 (x1 - 1)(x2 - 1) x3^2 - 3
double eval_m2(const UnitVector3& x);

/// Unrotated three-branch function; jumps across {x3 = 0, x1 >= -0.84}.
double eval_m3_base(const Vec3& x);
/// Colatitude kept, longitude shifted by theta / 6, then eval_m3_base.
/// Throws EvaluationError within 1e-9 of the jump set.
double eval_m3(const UnitVector3& x);
/// Geodesic distance from x to the jump set of eval_m3.
double m3_seam_distance(const UnitVector3& x);

double eval_mean(TestFunction f, const UnitVector3& x);

struct NoiseModel {
  NoiseKind kind = NoiseKind::Constant;
  double c = 0.5;  // sigma for Constant, scale c_sigma otherwise

  /// Throws ModelError if the result is not positive (zero allowed for Constant).
  double sigma(const UnitVector3& x) const;
};

double eval_sigma(NoiseKind kind, double c, const UnitVector3& x);

/// Sample variance of m over the grid divided by the grid mean of sigma^2.
double snr(TestFunction f, const NoiseModel& noise, std::span<const UnitVector3> grid);

enum class GridKind {
  /// side x side lattice over theta in [0, pi], phi in [0, 2 pi], endpoints
  /// included (so poles and the phi = 0 meridian repeat).
  LatLong,
  /// side x side cell-centre lattice; no poles, no repeats.
  LatLongOpen,
  Fibonacci,
};

std::string_view to_string(GridKind k) noexcept;
GridKind parse_grid_kind(std::string_view name);

using DomainPredicate = std::function<bool(const UnitVector3&)>;

/// Deterministic grid; latlong kinds use side = floor(sqrt(count)). Points
/// rejected by `accept` or not locatable in `patch` are dropped.
std::vector<UnitVector3> make_grid(GridKind kind, std::size_t count, const TriMesh* patch = nullptr,
                                   const DomainPredicate& accept = {});

/// At least `clearance` (geodesic) from the m3 jump set.
bool in_seam_domain(const UnitVector3& x, double clearance = 0.15);

/// Refined octahedron slit open along the m3 jump arc: equator vertices inside
/// the arc are doubled and the southern copies used below the equator, so no
/// triangle couples values across the jump.
TriMesh seam_patch(int refine_levels = 2);

/// Uniform points on the mesh domain (intersected with `accept`) by rejection.
std::vector<UnitVector3> sample_uniform(const TriMesh& domain, std::size_t n, Rng& rng,
                                        const DomainPredicate& accept = {});

enum class Placement { Grid, Uniform };

struct SimConfig {
  TestFunction function = TestFunction::M1;
  NoiseModel noise{NoiseKind::Sigma1, 0.5};
  std::size_t n = 400;
  Placement placement = Placement::Grid;
  GridKind training_grid = GridKind::LatLong;
  std::shared_ptr<const TriMesh> mesh;
  int smoothness = 1;
  /// Candidate degrees; a single entry with fixed_lambda set skips CV.
  std::vector<int> degrees{3};
  std::vector<double> lambdas;  // CV grid; empty: default grid
  std::optional<double> fixed_lambda;
  int folds = 5;
  int replicates = 100;
  std::uint64_t seed = 1;
  GridKind eval_grid = GridKind::LatLong;
  std::size_t eval_count = 10201;
  int threads = 1;
  /// Restricts training locations and the evaluation grid.
  DomainPredicate domain;
};

struct StudyReport {
  SimConfig config;
  std::vector<double> pmse;  // per successful replicate, replicate order
  std::vector<double> tmse;
  std::vector<double> constant_pmse;  // PMSE of the training mean
  std::vector<int> selected_degree;
  std::vector<double> selected_lambda;
  std::vector<int> replicate_index;
  std::map<int, int> degree_counts;
  std::map<int, Eigen::Index> effective_dims;
  int failures = 0;
  std::vector<std::string> failure_messages;
  std::size_t eval_points = 0;
  double snr = 0.0;
  double seconds = 0.0;

  double mean_pmse() const;
  double sd_pmse() const;
  double mean_tmse() const;
  double sd_tmse() const;
  double mean_constant_pmse() const;
};

StudyReport run_study(const SimConfig& config);

double sample_mean(std::span<const double> v);
/// Sample standard deviation with divisor n - 1 (0 for fewer than two values).
double sample_sd(std::span<const double> v);

}  // namespace tsss
