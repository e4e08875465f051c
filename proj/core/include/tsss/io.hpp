#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsss/estimator.hpp"
#include "tsss/mesh.hpp"
#include "tsss/simulation.hpp"

namespace tsss {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// {"vertices": [[x1,x2,x3],...], "triangles": [[i,j,k],...], "metadata": {...}}.
/// Reading re-normalizes vertices and throws GeometryError if validate fails.
std::string mesh_to_json(const TriMesh& mesh, bool with_metadata = true);
TriMesh mesh_from_json(std::string_view text);
void write_mesh(const std::filesystem::path& path, const TriMesh& mesh);
TriMesh read_mesh(const std::filesystem::path& path);

/// Model files carry the mesh inline; on read, "mesh" may also be a path
/// (relative paths resolve against the model file's directory).
std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(std::string_view text, const std::filesystem::path& base_dir = {});
void write_model(const std::filesystem::path& path, const FittedModel& model);
FittedModel read_model(const std::filesystem::path& path);

/// Header-named CSV: x,y,z[,value] or theta,phi[,value] (colatitude, longitude).
struct PointsTable {
  std::vector<UnitVector3> locations;
  std::optional<std::vector<double>> values;

  /// Throws IoError when the value column is missing.
  Dataset dataset() const;
};

/// Throws IoError naming the 1-based data row for malformed or non-unit rows.
PointsTable parse_points(std::istream& in, std::string_view source = "<input>");
PointsTable read_points(const std::filesystem::path& path);

void write_points_csv(std::ostream& out, std::span<const UnitVector3> points,
                      std::span<const std::string> column_names,
                      std::span<const std::span<const double>> columns);

std::string cv_result_to_json(const CvResult& result);
std::string study_report_to_json(const StudyReport& report);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace tsss
