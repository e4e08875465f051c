#include "tsss/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tsss/errors.hpp"

namespace tsss {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

template <class T>
T get_field(const json& j, const char* key, std::string_view what) {
  if (!j.is_object() || !j.contains(key)) {
    throw IoError(std::string(what) + " is missing \"" + key + "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(std::string(what) + " field \"" + key + "\" has the wrong type: " + e.what());
  }
}

json mesh_json(const TriMesh& mesh, bool with_metadata) {
  json verts = json::array();
  for (const UnitVector3& v : mesh.vertices()) verts.push_back({v.x1(), v.x2(), v.x3()});
  json tris = json::array();
  for (const TriangleIndices& t : mesh.triangles()) tris.push_back({t[0], t[1], t[2]});
  json out{{"vertices", std::move(verts)}, {"triangles", std::move(tris)}};
  if (with_metadata) {
    const ValidationReport rep = validate(mesh);
    json meta{{"num_vertices", mesh.num_vertices()},
              {"num_triangles", mesh.num_triangles()},
              {"num_edges", rep.num_edges},
              {"interior_edges", rep.interior_edges},
              {"boundary_edges", rep.boundary_edges},
              {"euler_characteristic", rep.euler_characteristic},
              {"closed", mesh.is_closed()},
              {"boundary_loops", rep.boundary_loops},
              {"warnings", rep.warnings}};
    if (mesh.num_triangles() > 0) {
      const MeshStats st = mesh_stats(mesh);
      meta["mesh_size"] = st.mesh_size;
      meta["min_inradius"] = st.min_inradius;
      meta["shape_param"] = st.shape_param;
    }
    out["metadata"] = std::move(meta);
  }
  return out;
}

TriMesh mesh_from(const json& j) {
  const auto raw_v = get_field<std::vector<std::vector<double>>>(j, "vertices", "mesh");
  const auto raw_t = get_field<std::vector<std::vector<int>>>(j, "triangles", "mesh");
  std::vector<UnitVector3> verts;
  verts.reserve(raw_v.size());
  for (std::size_t i = 0; i < raw_v.size(); ++i) {
    if (raw_v[i].size() != 3) throw IoError("mesh vertex " + std::to_string(i) + " needs 3 coordinates");
    verts.emplace_back(raw_v[i][0], raw_v[i][1], raw_v[i][2]);
  }
  std::vector<TriangleIndices> tris;
  tris.reserve(raw_t.size());
  for (std::size_t i = 0; i < raw_t.size(); ++i) {
    if (raw_t[i].size() != 3) throw IoError("mesh triangle " + std::to_string(i) + " needs 3 indices");
    tris.push_back({raw_t[i][0], raw_t[i][1], raw_t[i][2]});
  }
  TriMesh mesh(std::move(verts), std::move(tris));
  const ValidationReport rep = validate(mesh);
  if (!rep.valid()) {
    const Violation& v = rep.violations.front();
    throw GeometryError("mesh fails validation (" + std::string(to_string(v.kind)) + "): " + v.message);
  }
  return mesh;
}

json diagnostics_json(const FitDiagnostics& d) {
  return {{"rss", d.rss},
          {"energy", d.energy},
          {"effective_dim", d.effective_dim},
          {"kkt_residual", d.kkt_residual},
          {"constraint_residual", d.constraint_residual},
          {"jitter", d.jitter}};
}

FitDiagnostics diagnostics_from(const json& j) {
  FitDiagnostics d;
  if (!j.is_object()) return d;
  d.rss = j.value("rss", 0.0);
  d.energy = j.value("energy", 0.0);
  d.effective_dim = j.value("effective_dim", Eigen::Index{0});
  d.kkt_residual = j.value("kkt_residual", 0.0);
  d.constraint_residual = j.value("constraint_residual", 0.0);
  d.jitter = j.value("jitter", 0.0);
  return d;
}

std::string lower_trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(lower_trim(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(lower_trim(cur));
  return out;
}

double parse_number(const std::string& s, std::size_t row, std::string_view source) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw IoError(std::string(source) + ": row " + std::to_string(row) + ": cannot parse number '" + s + "'");
  }
  return v;
}

json double_array(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string mesh_to_json(const TriMesh& mesh, bool with_metadata) {
  return mesh_json(mesh, with_metadata).dump(1);
}

TriMesh mesh_from_json(std::string_view text) { return mesh_from(parse_json(text, "mesh")); }

void write_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
  write_text(path, mesh_to_json(mesh) + "\n");
}

TriMesh read_mesh(const std::filesystem::path& path) { return mesh_from_json(read_text(path)); }

std::string model_to_json(const FittedModel& model) {
  const Eigen::VectorXd& g = model.coefficients();
  json out{{"mesh", mesh_json(model.mesh(), false)},
           {"degree", model.degree()},
           {"smoothness", model.smoothness()},
           {"lambda", model.lambda()},
           {"coefficients", std::vector<double>(g.data(), g.data() + g.size())},
           {"diagnostics", diagnostics_json(model.diagnostics())}};
  return out.dump(1);
}

FittedModel model_from_json(std::string_view text, const std::filesystem::path& base_dir) {
  const json j = parse_json(text, "model");
  if (!j.is_object() || !j.contains("mesh")) throw IoError("model is missing \"mesh\"");
  std::shared_ptr<const TriMesh> mesh;
  const json& m = j.at("mesh");
  if (m.is_string()) {
    std::filesystem::path p = m.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    mesh = std::make_shared<const TriMesh>(read_mesh(p));
  } else {
    mesh = std::make_shared<const TriMesh>(mesh_from(m));
  }
  const int degree = get_field<int>(j, "degree", "model");
  const int smoothness = get_field<int>(j, "smoothness", "model");
  const double lambda = get_field<double>(j, "lambda", "model");
  const auto coef = get_field<std::vector<double>>(j, "coefficients", "model");
  check_degree(degree);
  const BasisLayout layout(degree, mesh->num_triangles());
  if (static_cast<Eigen::Index>(coef.size()) != layout.width()) {
    throw ModelError("model has " + std::to_string(coef.size()) + " coefficients, expected " +
                     std::to_string(layout.width()));
  }
  Eigen::VectorXd gamma = Eigen::Map<const Eigen::VectorXd>(coef.data(), layout.width());
  const FitDiagnostics diag = j.contains("diagnostics") ? diagnostics_from(j.at("diagnostics")) : FitDiagnostics{};
  return FittedModel(std::move(mesh), degree, smoothness, lambda, std::move(gamma), diag);
}

void write_model(const std::filesystem::path& path, const FittedModel& model) {
  write_text(path, model_to_json(model) + "\n");
}

FittedModel read_model(const std::filesystem::path& path) {
  return model_from_json(read_text(path), path.parent_path());
}

Dataset PointsTable::dataset() const {
  if (!values) throw IoError("points file has no value column");
  return Dataset{locations, *values};
}

PointsTable parse_points(std::istream& in, std::string_view source) {
  const std::string src(source);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (lower_trim(line).empty()) continue;
    header = split_csv(line);
    break;
  }
  if (header.empty()) throw IoError(src + ": empty points file");
  auto column = [&](std::string_view name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int cx = column("x"), cy = column("y"), cz = column("z");
  const int ct = column("theta"), cp = column("phi");
  const int cv = column("value");
  const bool cartesian = cx >= 0 && cy >= 0 && cz >= 0;
  if (!cartesian && !(ct >= 0 && cp >= 0)) {
    throw IoError(src + ": header needs x,y,z or theta,phi columns");
  }
  PointsTable table;
  if (cv >= 0) table.values.emplace();
  constexpr double kUnitTol = 1e-6;
  constexpr double kAngleSlack = 1e-12;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (lower_trim(line).empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw IoError(src + ": row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                    " fields, found " + std::to_string(cells.size()));
    }
    auto num = [&](int c) { return parse_number(cells[static_cast<std::size_t>(c)], row, src); };
    if (cartesian) {
      const Vec3 v(num(cx), num(cy), num(cz));
      if (std::abs(v.norm() - 1.0) > kUnitTol) {
        throw IoError(src + ": row " + std::to_string(row) + ": point has norm " + format_double(v.norm()) +
                      ", not within 1e-6 of 1");
      }
      table.locations.emplace_back(v);
    } else {
      const double theta = num(ct), phi = num(cp);
      if (theta < -kAngleSlack || theta > std::numbers::pi + kAngleSlack) {
        throw IoError(src + ": row " + std::to_string(row) + ": theta outside [0, pi]");
      }
      if (phi < -kAngleSlack || phi > 2.0 * std::numbers::pi + kAngleSlack) {
        throw IoError(src + ": row " + std::to_string(row) + ": phi outside [0, 2 pi)");
      }
      table.locations.push_back(UnitVector3::from_spherical(theta, phi));
    }
    if (table.values) table.values->push_back(num(cv));
  }
  return table;
}

PointsTable read_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_points(in, path.string());
}

void write_points_csv(std::ostream& out, std::span<const UnitVector3> points,
                      std::span<const std::string> column_names,
                      std::span<const std::span<const double>> columns) {
  if (column_names.size() != columns.size()) throw ConfigError("column names and columns differ in count");
  for (const auto& c : columns) {
    if (c.size() != points.size()) throw ConfigError("column length differs from the point count");
  }
  out << "x,y,z";
  for (const auto& n : column_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << format_double(points[i].x1()) << ',' << format_double(points[i].x2()) << ','
        << format_double(points[i].x3());
    for (const auto& c : columns) out << ',' << format_double(c[i]);
    out << '\n';
  }
}

std::string cv_result_to_json(const CvResult& result) {
  json table = json::array();
  for (const CvEntry& e : result.table) {
    table.push_back({{"degree", e.degree},
                     {"lambda", e.lambda},
                     {"score", e.feasible ? json(e.score) : json(nullptr)},
                     {"feasible", e.feasible}});
  }
  json out{{"degree", result.degree},
           {"lambda", result.lambda},
           {"score", result.score},
           {"table", std::move(table)},
           {"fold_of", result.fold_of}};
  return out.dump(1);
}

std::string study_report_to_json(const StudyReport& report) {
  const SimConfig& c = report.config;
  json config{{"function", to_string(c.function)},
              {"noise", to_string(c.noise.kind)},
              {"c_sigma", c.noise.c},
              {"n", c.n},
              {"placement", c.placement == Placement::Grid ? "grid" : "uniform"},
              {"training_grid", to_string(c.training_grid)},
              {"mesh_triangles", c.mesh ? c.mesh->num_triangles() : 0},
              {"smoothness", c.smoothness},
              {"degrees", c.degrees},
              {"lambdas", c.lambdas},
              {"fixed_lambda", c.fixed_lambda ? json(*c.fixed_lambda) : json(nullptr)},
              {"folds", c.folds},
              {"replicates", c.replicates},
              {"seed", c.seed},
              {"eval_grid", to_string(c.eval_grid)},
              {"eval_count", c.eval_count},
              {"restricted_domain", static_cast<bool>(c.domain)},
              {"threads", c.threads}};
  json counts = json::object();
  for (const auto& [d, k] : report.degree_counts) counts[std::to_string(d)] = k;
  json dims = json::object();
  for (const auto& [d, k] : report.effective_dims) dims[std::to_string(d)] = k;
  json out{{"config", std::move(config)},
           {"replicate_index", report.replicate_index},
           {"pmse", double_array(report.pmse)},
           {"tmse", double_array(report.tmse)},
           {"constant_pmse", double_array(report.constant_pmse)},
           {"selected_degree", report.selected_degree},
           {"selected_lambda", double_array(report.selected_lambda)},
           {"aggregates",
            {{"mean_pmse", report.mean_pmse()},
             {"sd_pmse", report.sd_pmse()},
             {"mean_tmse", report.mean_tmse()},
             {"sd_tmse", report.sd_tmse()},
             {"mean_constant_pmse", report.mean_constant_pmse()},
             {"degree_counts", std::move(counts)},
             {"effective_dims", std::move(dims)},
             {"failures", report.failures},
             {"eval_points", report.eval_points},
             {"snr", report.snr}}},
           {"failure_messages", report.failure_messages},
           {"seconds", report.seconds}};
  return out.dump(1);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace tsss
