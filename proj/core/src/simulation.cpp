#include "tsss/simulation.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "tsss/errors.hpp"
#include "tsss/parallel.hpp"

namespace tsss {

namespace {

constexpr double kPi = std::numbers::pi;
// Half-width in shifted longitude of the jump arc: cos(phi') >= -0.84.
const double kSeamHalfWidth = std::acos(-0.84);
// On the equator theta = pi/2, so phi' = phi + pi/12.
constexpr double kSeamShift = kPi / 12.0;

UnitVector3 equator(double phi) { return UnitVector3(std::cos(phi), std::sin(phi), 0.0); }

}  // namespace

std::string_view to_string(TestFunction f) noexcept {
  switch (f) {
    case TestFunction::M1: return "m1";
    case TestFunction::M2: return "m2";
    case TestFunction::M3: return "m3";
  }
  return "?";
}

std::string_view to_string(NoiseKind k) noexcept {
  switch (k) {
    case NoiseKind::Constant: return "constant";
    case NoiseKind::Sigma1: return "sigma1";
    case NoiseKind::Sigma2: return "sigma2";
  }
  return "?";
}

std::string_view to_string(GridKind k) noexcept {
  switch (k) {
    case GridKind::LatLong: return "latlong";
    case GridKind::LatLongOpen: return "latlong-open";
    case GridKind::Fibonacci: return "fibonacci";
  }
  return "?";
}

TestFunction parse_test_function(std::string_view name) {
  if (name == "m1") return TestFunction::M1;
  if (name == "m2") return TestFunction::M2;
  if (name == "m3") return TestFunction::M3;
  throw ConfigError("unknown test function '" + std::string(name) + "'");
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "constant") return NoiseKind::Constant;
  if (name == "sigma1") return NoiseKind::Sigma1;
  if (name == "sigma2") return NoiseKind::Sigma2;
  throw ConfigError("unknown noise model '" + std::string(name) + "'");
}

GridKind parse_grid_kind(std::string_view name) {
  if (name == "latlong") return GridKind::LatLong;
  if (name == "latlong-open") return GridKind::LatLongOpen;
  if (name == "fibonacci") return GridKind::Fibonacci;
  throw ConfigError("unknown grid kind '" + std::string(name) + "'");
}

double eval_m1(const UnitVector3& x) {
  const double x1 = x.x1(), x2 = x.x2(), x3 = x.x3();
  return -2.0 + 0.5 * (x1 * x1 + std::exp(2.0 * x2 * x2 * x2) + std::exp(2.0 * x3 * x3) +
                       10.0 * x1 * x2 * x3);
}

double eval_m2(const UnitVector3& x) {
  return 2.5 * (x.x1() - 1.0) * (x.x2() - 1.0) * x.x3() * x.x3() - 3.0;
}

double eval_m3_base(const Vec3& x) {
  const double x1 = x[0], x3 = x[2];
  if (x1 >= -0.84) {
    const double v = 0.08 * kPi + 0.84 + x1;
    return x3 > 0.0 ? v : -v;
  }
  return -0.16 * std::atan(x3 / (0.84 + x1));
}

double m3_seam_distance(const UnitVector3& x) {
  const UnitVector3 mid = equator(-kSeamShift);
  const double d1 = distance_to_arc(x, equator(-kSeamHalfWidth - kSeamShift), mid);
  const double d2 = distance_to_arc(x, mid, equator(kSeamHalfWidth - kSeamShift));
  return std::min(d1, d2);
}

double eval_m3(const UnitVector3& x) {
  if (m3_seam_distance(x) < 1e-9) throw EvaluationError("m3 is discontinuous at this point");
  const double theta = x.colatitude();
  const double phi = std::atan2(x.x2(), x.x1()) + theta / 6.0;
  const double s = std::sin(theta);
  return eval_m3_base(Vec3(s * std::cos(phi), s * std::sin(phi), std::cos(theta)));
}

double eval_mean(TestFunction f, const UnitVector3& x) {
  switch (f) {
    case TestFunction::M1: return eval_m1(x);
    case TestFunction::M2: return eval_m2(x);
    case TestFunction::M3: return eval_m3(x);
  }
  throw ConfigError("unknown test function");
}

double eval_sigma(NoiseKind kind, double c, const UnitVector3& x) {
  const double x1 = x.x1(), x2 = x.x2(), x3 = x.x3();
  double s = c;
  switch (kind) {
    case NoiseKind::Constant: break;
    case NoiseKind::Sigma1: s = c * (1.0 - (x1 * x1 + x2 * x2 + 1.5 * x3 * x3) / 10.0); break;
    case NoiseKind::Sigma2:
      s = c * (1.0 - (1.5 * (x1 + 1.0) * (x1 + 1.0) + x2 * x2 + x3 * x3) / 30.0);
      break;
  }
  if (!(s > 0.0) && !(kind == NoiseKind::Constant && s == 0.0)) {
    throw ModelError("noise standard deviation is not positive");
  }
  return s;
}

double NoiseModel::sigma(const UnitVector3& x) const { return eval_sigma(kind, c, x); }

double snr(TestFunction f, const NoiseModel& noise, std::span<const UnitVector3> grid) {
  if (grid.empty()) throw EvaluationError("SNR needs a nonempty grid");
  std::vector<double> m(grid.size());
  double s2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    m[i] = eval_mean(f, grid[i]);
    const double s = noise.sigma(grid[i]);
    s2 += s * s;
  }
  const double var = grid.size() > 1 ? std::pow(sample_sd(m), 2) : 0.0;
  return var / (s2 / static_cast<double>(grid.size()));
}

std::vector<UnitVector3> make_grid(GridKind kind, std::size_t count, const TriMesh* patch,
                                   const DomainPredicate& accept) {
  if (count < 1) throw ConfigError("grid needs at least one point");
  std::vector<UnitVector3> pts;
  if (kind == GridKind::Fibonacci) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(i);
      pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  } else {
    const auto side = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(count)) + 1e-9));
    const bool closed = kind == GridKind::LatLong;
    auto coord = [&](std::size_t i, double span) {
      if (closed) return side == 1 ? 0.0 : span * static_cast<double>(i) / static_cast<double>(side - 1);
      return span * (static_cast<double>(i) + 0.5) / static_cast<double>(side);
    };
    for (std::size_t i = 0; i < side; ++i) {
      for (std::size_t j = 0; j < side; ++j) {
        pts.push_back(UnitVector3::from_spherical(coord(i, kPi), coord(j, 2.0 * kPi)));
      }
    }
  }
  if (accept) std::erase_if(pts, [&](const UnitVector3& p) { return !accept(p); });
  if (patch) {
    std::erase_if(pts, [&](const UnitVector3& p) { return !patch->try_locate(p); });
  }
  return pts;
}

bool in_seam_domain(const UnitVector3& x, double clearance) {
  return m3_seam_distance(x) >= clearance;
}

TriMesh seam_patch(int refine_levels) {
  const TriMesh full = refine(base_mesh(BaseMesh::Octahedron), refine_levels);
  std::vector<UnitVector3> verts = full.vertices();
  std::vector<TriangleIndices> tris = full.triangles();
  const std::size_t nv = verts.size();
  constexpr double kOn = 1e-12;
  constexpr double kProbe = 1e-3;
  std::vector<int> twin(nv, -1);
  for (std::size_t i = 0; i < nv; ++i) {
    const UnitVector3& p = verts[i];
    if (std::abs(p.x3()) > kOn || m3_seam_distance(p) > kOn) continue;
    const double phi = std::atan2(p.x2(), p.x1());
    if (m3_seam_distance(equator(phi + kProbe)) > kOn || m3_seam_distance(equator(phi - kProbe)) > kOn) {
      continue;
    }
    twin[i] = static_cast<int>(verts.size());
    verts.push_back(p);
  }
  for (auto& t : tris) {
    const double z = verts[t[0]].x3() + verts[t[1]].x3() + verts[t[2]].x3();
    if (z >= 0.0) continue;
    for (int& k : t) {
      if (twin[k] >= 0) k = twin[k];
    }
  }
  return TriMesh(std::move(verts), std::move(tris));
}

std::vector<UnitVector3> sample_uniform(const TriMesh& domain, std::size_t n, Rng& rng,
                                        const DomainPredicate& accept) {
  std::vector<UnitVector3> out;
  out.reserve(n);
  const std::size_t max_draws = 1000 * n + 1000;
  for (std::size_t draws = 0; out.size() < n; ++draws) {
    if (draws >= max_draws) throw PatchError("mesh domain is too small for rejection sampling");
    const Vec3 v(rng.normal(), rng.normal(), rng.normal());
    if (v.norm() < 1e-12) continue;
    const UnitVector3 p(v);
    if ((!accept || accept(p)) && domain.try_locate(p)) out.push_back(p);
  }
  return out;
}

double sample_mean(std::span<const double> v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double StudyReport::mean_pmse() const { return sample_mean(pmse); }
double StudyReport::sd_pmse() const { return sample_sd(pmse); }
double StudyReport::mean_tmse() const { return sample_mean(tmse); }
double StudyReport::sd_tmse() const { return sample_sd(tmse); }
double StudyReport::mean_constant_pmse() const { return sample_mean(constant_pmse); }

StudyReport run_study(const SimConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (!config.mesh) throw ConfigError("simulation needs a mesh");
  if (config.n < 1) throw ConfigError("simulation needs n >= 1");
  if (config.replicates < 1) throw ConfigError("simulation needs at least one replicate");
  if (config.degrees.empty()) throw ConfigError("simulation needs at least one degree");
  const bool use_cv = !(config.fixed_lambda && config.degrees.size() == 1);

  StudyReport report;
  report.config = config;
  const TriMesh& mesh = *config.mesh;
  const std::vector<UnitVector3> eval = make_grid(config.eval_grid, config.eval_count, &mesh, config.domain);
  if (eval.empty()) throw ConfigError("evaluation grid misses the mesh domain");
  report.eval_points = eval.size();
  std::vector<double> truth_eval(eval.size());
  for (std::size_t j = 0; j < eval.size(); ++j) truth_eval[j] = eval_mean(config.function, eval[j]);
  report.snr = snr(config.function, config.noise, eval);

  SpaceOptions sopts;
  sopts.threads = config.threads;
  std::vector<std::unique_ptr<SplineSpace>> spaces;
  std::vector<const SplineSpace*> space_ptrs;
  for (int d : config.degrees) {
    spaces.push_back(std::make_unique<SplineSpace>(config.mesh, d, config.smoothness, sopts));
    space_ptrs.push_back(spaces.back().get());
    report.effective_dims[d] = spaces.back()->effective_dim();
  }
  std::vector<UnitVector3> grid_train;
  if (config.placement == Placement::Grid) {
    grid_train = make_grid(config.training_grid, config.n, &mesh, config.domain);
    if (grid_train.empty()) throw ConfigError("training grid misses the mesh domain");
  }

  struct Outcome {
    bool ok = false;
    double pmse = 0.0, tmse = 0.0, const_pmse = 0.0, lambda = 0.0;
    int degree = 0;
    std::string error;
  };
  const auto R = static_cast<std::size_t>(config.replicates);
  std::vector<Outcome> outcomes(R);
  parallel_for(R, config.threads, [&](std::size_t r) {
    Outcome& out = outcomes[r];
    try {
      Rng rng(config.seed, r);
      Dataset data;
      data.locations = config.placement == Placement::Grid ? grid_train
                                                           : sample_uniform(mesh, config.n, rng, config.domain);
      std::vector<double> truth(data.size());
      data.responses.resize(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        truth[i] = eval_mean(config.function, data.locations[i]);
        data.responses[i] = truth[i] + config.noise.sigma(data.locations[i]) * rng.normal();
      }
      std::size_t di = 0;
      double lambda = config.fixed_lambda.value_or(0.0);
      if (use_cv) {
        CvOptions cv;
        cv.degrees = config.degrees;
        cv.lambdas = config.lambdas;
        cv.smoothness = config.smoothness;
        cv.folds = config.folds;
        cv.seed = rng.next_u64();
        const CvResult res = kfold_cv(data, config.mesh, cv, space_ptrs);
        while (config.degrees[di] != res.degree) ++di;
        lambda = res.lambda;
      }
      const FittedModel model = fit(data, *space_ptrs[di], lambda);
      std::vector<double> est_eval(eval.size());
      for (std::size_t j = 0; j < eval.size(); ++j) est_eval[j] = model(eval[j]);
      std::vector<double> est_train(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) est_train[i] = model(data.locations[i]);
      const double ybar = sample_mean(data.responses);
      const std::vector<double> constant(eval.size(), ybar);
      out.pmse = mean_squared_error(truth_eval, est_eval);
      out.tmse = mean_squared_error(truth, est_train);
      out.const_pmse = mean_squared_error(truth_eval, constant);
      out.degree = config.degrees[di];
      out.lambda = lambda;
      out.ok = true;
    } catch (const Error& e) {
      out.error = std::string(to_string(e.code())) + ": " + e.what();
    }
  });

  for (std::size_t r = 0; r < R; ++r) {
    const Outcome& o = outcomes[r];
    if (!o.ok) {
      ++report.failures;
      report.failure_messages.push_back("replicate " + std::to_string(r) + ": " + o.error);
      continue;
    }
    report.replicate_index.push_back(static_cast<int>(r));
    report.pmse.push_back(o.pmse);
    report.tmse.push_back(o.tmse);
    report.constant_pmse.push_back(o.const_pmse);
    report.selected_degree.push_back(o.degree);
    report.selected_lambda.push_back(o.lambda);
    ++report.degree_counts[o.degree];
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace tsss
