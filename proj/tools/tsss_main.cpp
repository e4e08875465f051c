#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsss/errors.hpp"
#include "tsss/estimator.hpp"
#include "tsss/io.hpp"
#include "tsss/mesh.hpp"
#include "tsss/parallel.hpp"
#include "tsss/simulation.hpp"

namespace {

using namespace tsss;

constexpr const char* kCoordinates =
    "Points CSV files have a header naming either x,y,z or theta,phi columns, plus an optional value "
    "column. theta is colatitude in [0, pi], phi is longitude in [0, 2 pi), and "
    "x = (sin theta cos phi, sin theta sin phi, cos theta).";

struct ThreadOpt {
  int threads = default_threads();
};

void add_threads(CLI::App* cmd, ThreadOpt& t) {
  cmd->add_option("--threads", t.threads, "Worker threads (default: TSSS_THREADS or 1)")
      ->check(CLI::PositiveNumber);
}

std::shared_ptr<const TriMesh> load_mesh(const std::string& path) {
  return std::make_shared<const TriMesh>(read_mesh(path));
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text << '\n';
  } else {
    write_text(out, text + "\n");
  }
}

template <class F>
void with_stream(const std::string& out, F&& f) {
  if (out.empty() || out == "-") {
    f(std::cout);
    return;
  }
  std::ofstream os(out);
  if (!os) throw IoError("cannot write " + out);
  f(os);
}

std::vector<UnitVector3> require_inside(const TriMesh& mesh, const std::vector<UnitVector3>& pts,
                                        std::string_view what) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!mesh.try_locate(pts[i])) {
      throw LocationError(std::string(what) + " row " + std::to_string(i + 1) + " lies outside the mesh");
    }
  }
  return pts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized spherical spline smoothing on triangulations.\n" + std::string(kCoordinates)};
  app.require_subcommand(1);

  // triangulate
  struct {
    std::string base = "octahedron";
    int refine = 0;
    std::string patch;
    int min_per_tri = 1;
    bool seam = false;
    std::string out;
  } tri;
  auto* c_tri = app.add_subcommand("triangulate", "Build a base mesh, refine it, optionally cut a patch");
  c_tri->add_option("--base", tri.base, "Base solid")->check(CLI::IsMember({"octahedron", "icosahedron"}));
  c_tri->add_option("--refine", tri.refine, "Midpoint refinement levels")->check(CLI::NonNegativeNumber);
  c_tri->add_option("--patch", tri.patch, "Keep only triangles holding points from this CSV");
  c_tri->add_option("--min-per-tri", tri.min_per_tri, "Points a triangle needs to be kept")
      ->check(CLI::PositiveNumber);
  c_tri->add_flag("--seam-slit", tri.seam,
                  "Refined octahedron slit along the m3 jump arc (ignores --base and --patch)");
  c_tri->add_option("--out", tri.out, "Output mesh JSON")->required();

  // fit
  struct {
    std::string data, mesh, out;
    int degree = 3, smoothness = 1;
    double lambda = 0.0;
  } fitc;
  ThreadOpt fit_t;
  auto* c_fit = app.add_subcommand("fit", "Fit a penalized spline to data");
  c_fit->add_option("--data", fitc.data, "Points CSV with a value column")->required();
  c_fit->add_option("--mesh", fitc.mesh, "Mesh JSON")->required();
  c_fit->add_option("--degree", fitc.degree, "Spline degree d");
  c_fit->add_option("--smoothness", fitc.smoothness, "Continuity order r");
  c_fit->add_option("--lambda", fitc.lambda, "Roughness penalty weight")->check(CLI::NonNegativeNumber);
  c_fit->add_option("--out", fitc.out, "Output model JSON")->required();
  add_threads(c_fit, fit_t);

  // predict
  struct {
    std::string model, points, out;
    bool allow_outside = false;
  } pred;
  auto* c_pred = app.add_subcommand("predict", "Evaluate a fitted model; writes x,y,z,prediction");
  c_pred->add_option("--model", pred.model, "Model JSON")->required();
  c_pred->add_option("--points", pred.points, "Points CSV")->required();
  c_pred->add_option("--out", pred.out, "Output CSV (default stdout)");
  c_pred->add_flag("--allow-outside", pred.allow_outside, "Write nan for points outside the mesh");

  // cv
  struct {
    std::string data, mesh, out;
    std::vector<int> degrees{3};
    std::vector<double> lambdas;
    int smoothness = 1, folds = 5;
    std::uint64_t seed = 0;
  } cv;
  ThreadOpt cv_t;
  auto* c_cv = app.add_subcommand("cv", "K-fold cross-validation over degrees and lambdas");
  c_cv->add_option("--data", cv.data, "Points CSV with a value column")->required();
  c_cv->add_option("--mesh", cv.mesh, "Mesh JSON")->required();
  c_cv->add_option("--degrees", cv.degrees, "Candidate degrees")->delimiter(',');
  c_cv->add_option("--lambdas", cv.lambdas, "Candidate lambdas (default: log grid scaled by n/N)")
      ->delimiter(',');
  c_cv->add_option("--smoothness", cv.smoothness, "Continuity order r");
  c_cv->add_option("--folds", cv.folds, "Number of folds")->check(CLI::Range(2, 1000000));
  c_cv->add_option("--seed", cv.seed, "Fold assignment seed");
  c_cv->add_option("--out", cv.out, "Output JSON (default stdout)");
  add_threads(c_cv, cv_t);

  // bootstrap
  struct {
    std::string data, mesh, query, out;
    int degree = 3, smoothness = 1, reps = 100;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    bool unbiased = false;
  } bs;
  ThreadOpt bs_t;
  auto* c_bs = app.add_subcommand("bootstrap", "Wild-bootstrap standard errors; writes x,y,z,fitted,se");
  c_bs->add_option("--data", bs.data, "Points CSV with a value column")->required();
  c_bs->add_option("--mesh", bs.mesh, "Mesh JSON")->required();
  c_bs->add_option("--query", bs.query, "Points CSV where SEs are wanted")->required();
  c_bs->add_option("--degree", bs.degree, "Spline degree d");
  c_bs->add_option("--smoothness", bs.smoothness, "Continuity order r");
  c_bs->add_option("--lambda", bs.lambda, "Roughness penalty weight")->check(CLI::NonNegativeNumber);
  c_bs->add_option("--reps", bs.reps, "Bootstrap replicates")->check(CLI::Range(2, 100000000));
  c_bs->add_option("--seed", bs.seed, "Weight seed");
  c_bs->add_flag("--unbiased", bs.unbiased, "Divide by B - 1");
  c_bs->add_option("--out", bs.out, "Output CSV (default stdout)");
  add_threads(c_bs, bs_t);

  // simulate
  struct {
    std::string function = "m1", noise = "sigma1", placement = "grid", grid = "latlong", eval = "latlong";
    std::string base = "octahedron", mesh, domain = "auto", out;
    double c_sigma = 0.5;
    std::size_t n = 400, eval_count = 10201;
    int reps = 100, refine = 1, smoothness = 1, folds = 5;
    std::vector<int> degrees{3};
    std::vector<double> lambdas;
    std::optional<double> lambda;
    std::uint64_t seed = 1;
  } sim;
  ThreadOpt sim_t;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo study with a built-in test function");
  c_sim->add_option("--function", sim.function, "Mean function")->check(CLI::IsMember({"m1", "m2", "m3"}));
  c_sim->add_option("--noise", sim.noise, "Noise model")
      ->check(CLI::IsMember({"constant", "sigma1", "sigma2"}));
  c_sim->add_option("--c-sigma", sim.c_sigma, "Noise scale")->check(CLI::PositiveNumber);
  c_sim->add_option("--n", sim.n, "Observations per replicate");
  c_sim->add_option("--reps", sim.reps, "Replicates")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sim.seed, "Master seed");
  c_sim->add_option("--placement", sim.placement, "Training design")->check(CLI::IsMember({"grid", "uniform"}));
  c_sim->add_option("--training-grid", sim.grid, "Grid kind for --placement grid")
      ->check(CLI::IsMember({"latlong", "latlong-open", "fibonacci"}));
  c_sim->add_option("--eval-grid", sim.eval, "Evaluation grid kind")
      ->check(CLI::IsMember({"latlong", "latlong-open", "fibonacci"}));
  c_sim->add_option("--eval-count", sim.eval_count, "Evaluation grid size");
  c_sim->add_option("--mesh", sim.mesh, "Mesh JSON (default: built from --base/--refine)");
  c_sim->add_option("--base", sim.base, "Base solid")->check(CLI::IsMember({"octahedron", "icosahedron"}));
  c_sim->add_option("--refine", sim.refine, "Refinement levels")->check(CLI::NonNegativeNumber);
  c_sim->add_option("--domain", sim.domain,
                    "sphere, or seam (0.15 clearance from the m3 jump, slit mesh); auto picks seam for m3")
      ->check(CLI::IsMember({"auto", "sphere", "seam"}));
  c_sim->add_option("--degrees", sim.degrees, "Candidate degrees")->delimiter(',');
  c_sim->add_option("--lambdas", sim.lambdas, "CV lambda grid")->delimiter(',');
  c_sim->add_option("--lambda", sim.lambda, "Fixed lambda (skips CV with one degree)");
  c_sim->add_option("--smoothness", sim.smoothness, "Continuity order r");
  c_sim->add_option("--folds", sim.folds, "CV folds")->check(CLI::Range(2, 1000000));
  c_sim->add_option("--out", sim.out, "Output report JSON (default stdout)");
  add_threads(c_sim, sim_t);

  // grid
  struct {
    std::string kind = "latlong", mesh, model, out;
    std::size_t count = 10201;
  } grid;
  auto* c_grid = app.add_subcommand("grid", "Export a plot-ready grid, optionally with model predictions");
  c_grid->add_option("--kind", grid.kind, "Grid kind")
      ->check(CLI::IsMember({"latlong", "latlong-open", "fibonacci"}));
  c_grid->add_option("--count", grid.count, "Approximate number of points")->check(CLI::PositiveNumber);
  c_grid->add_option("--mesh", grid.mesh, "Drop points outside this mesh");
  c_grid->add_option("--model", grid.model, "Add a prediction column (points outside the model mesh dropped)");
  c_grid->add_option("--out", grid.out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error code=CONFIG: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*c_tri) {
      TriMesh mesh;
      if (tri.seam) {
        mesh = seam_patch(tri.refine);
      } else {
        mesh = refine(base_mesh(tri.base == "icosahedron" ? BaseMesh::Icosahedron : BaseMesh::Octahedron),
                      tri.refine);
        if (!tri.patch.empty()) {
          const PointsTable pts = read_points(tri.patch);
          mesh = patch_extract(mesh, pts.locations, tri.min_per_tri);
        }
      }
      const ValidationReport rep = validate(mesh);
      if (!rep.valid()) {
        const Violation& v = rep.violations.front();
        throw GeometryError("mesh fails validation (" + std::string(to_string(v.kind)) + "): " + v.message);
      }
      write_mesh(tri.out, mesh);
      std::cerr << "triangles=" << mesh.num_triangles() << " vertices=" << mesh.num_vertices()
                << " boundary_edges=" << rep.boundary_edges << " boundary_loops=" << rep.boundary_loops.size()
                << " euler=" << rep.euler_characteristic << '\n';
    } else if (*c_fit) {
      const auto mesh = load_mesh(fitc.mesh);
      const Dataset data = read_points(fitc.data).dataset();
      FitConfig cfg;
      cfg.degree = fitc.degree;
      cfg.smoothness = fitc.smoothness;
      cfg.lambda = fitc.lambda;
      cfg.space.threads = fit_t.threads;
      const FittedModel model = fit(data, mesh, cfg);
      write_model(fitc.out, model);
      const FitDiagnostics& d = model.diagnostics();
      std::cerr << "effective_dim=" << d.effective_dim << " rss=" << format_double(d.rss)
                << " energy=" << format_double(d.energy) << '\n';
    } else if (*c_pred) {
      const FittedModel model = read_model(pred.model);
      const PointsTable pts = read_points(pred.points);
      const PredictionResult res = predict(model, pts.locations);
      if (!res.ok() && !pred.allow_outside) {
        const PointError& e = res.errors.front();
        throw PredictionError("row " + std::to_string(e.index + 1) + ": " + e.message);
      }
      const std::vector<std::string> names{"prediction"};
      const std::vector<std::span<const double>> cols{res.values};
      with_stream(pred.out, [&](std::ostream& os) { write_points_csv(os, pts.locations, names, cols); });
    } else if (*c_cv) {
      const auto mesh = load_mesh(cv.mesh);
      const Dataset data = read_points(cv.data).dataset();
      CvOptions opts;
      opts.degrees = cv.degrees;
      opts.lambdas = cv.lambdas;
      opts.smoothness = cv.smoothness;
      opts.folds = cv.folds;
      opts.seed = cv.seed;
      opts.threads = cv_t.threads;
      opts.space.threads = cv_t.threads;
      emit(cv.out, cv_result_to_json(kfold_cv(data, mesh, opts)));
    } else if (*c_bs) {
      const auto mesh = load_mesh(bs.mesh);
      const Dataset data = read_points(bs.data).dataset();
      const std::vector<UnitVector3> query = require_inside(*mesh, read_points(bs.query).locations, "query");
      SpaceOptions sopts;
      sopts.threads = bs_t.threads;
      const SplineSpace space(mesh, bs.degree, bs.smoothness, sopts);
      BootstrapOptions opts;
      opts.replicates = bs.reps;
      opts.seed = bs.seed;
      opts.unbiased = bs.unbiased;
      opts.threads = bs_t.threads;
      const BootstrapResult res = bootstrap_se(data, space, bs.lambda, query, opts);
      const std::vector<std::string> names{"fitted", "se"};
      const std::vector<std::span<const double>> cols{
          std::span<const double>(res.fitted.data(), static_cast<std::size_t>(res.fitted.size())),
          std::span<const double>(res.se.data(), static_cast<std::size_t>(res.se.size()))};
      with_stream(bs.out, [&](std::ostream& os) { write_points_csv(os, query, names, cols); });
    } else if (*c_sim) {
      SimConfig cfg;
      cfg.function = parse_test_function(sim.function);
      cfg.noise = NoiseModel{parse_noise_kind(sim.noise), sim.c_sigma};
      cfg.n = sim.n;
      cfg.placement = sim.placement == "uniform" ? Placement::Uniform : Placement::Grid;
      cfg.training_grid = parse_grid_kind(sim.grid);
      cfg.eval_grid = parse_grid_kind(sim.eval);
      cfg.eval_count = sim.eval_count;
      cfg.smoothness = sim.smoothness;
      cfg.degrees = sim.degrees;
      cfg.lambdas = sim.lambdas;
      cfg.fixed_lambda = sim.lambda;
      cfg.folds = sim.folds;
      cfg.replicates = sim.reps;
      cfg.seed = sim.seed;
      cfg.threads = sim_t.threads;
      const bool seam = sim.domain == "seam" || (sim.domain == "auto" && cfg.function == TestFunction::M3);
      if (!sim.mesh.empty()) {
        cfg.mesh = load_mesh(sim.mesh);
      } else if (seam) {
        cfg.mesh = std::make_shared<const TriMesh>(seam_patch(sim.refine));
      } else {
        cfg.mesh = std::make_shared<const TriMesh>(refine(
            base_mesh(sim.base == "icosahedron" ? BaseMesh::Icosahedron : BaseMesh::Octahedron), sim.refine));
      }
      if (seam) cfg.domain = [](const UnitVector3& x) { return in_seam_domain(x); };
      emit(sim.out, study_report_to_json(run_study(cfg)));
    } else if (*c_grid) {
      std::unique_ptr<TriMesh> mesh;
      if (!grid.mesh.empty()) mesh = std::make_unique<TriMesh>(read_mesh(grid.mesh));
      std::vector<UnitVector3> pts = make_grid(parse_grid_kind(grid.kind), grid.count, mesh.get());
      std::vector<std::string> names;
      std::vector<double> values;
      if (!grid.model.empty()) {
        const FittedModel model = read_model(grid.model);
        std::erase_if(pts, [&](const UnitVector3& p) { return !model.mesh().try_locate(p); });
        values = predict(model, pts).values;
        names.push_back("prediction");
      }
      std::vector<std::span<const double>> cols;
      if (!names.empty()) cols.emplace_back(values);
      with_stream(grid.out, [&](std::ostream& os) { write_points_csv(os, pts, names, cols); });
    }
  } catch (const Error& e) {
    std::cerr << "error code=" << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error code=INTERNAL: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
