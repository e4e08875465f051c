#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsss/geometry.hpp"

namespace tsss {

using TriangleIndices = std::array<int, 3>;

/// Undirected mesh edge with its incident triangles; tri1 < 0 on the boundary.
struct MeshEdge {
  int v0 = -1;  // v0 < v1
  int v1 = -1;
  int tri0 = -1;
  int tri1 = -1;
  int extra = 0;  // incident triangles beyond two (non-manifold)

  bool interior() const noexcept { return tri1 >= 0; }
};

struct Location {
  int triangle = -1;
  BarycentricCoords coords;
};

class LocateIndex;

/// Spherical triangulation: unit vertices and oriented index triples with
/// derived edge adjacency. Immutable once built; queries are thread-safe.
class TriMesh {
 public:
  /// Point location switches from a linear scan to the cap index at this size.
  static constexpr std::size_t kIndexThreshold = 512;
  static constexpr double kLocateTolerance = 1e-12;

  TriMesh() = default;
  /// Builds adjacency. Indices must be in range (GeometryError otherwise);
  /// geometric validity is checked by validate().
  TriMesh(std::vector<UnitVector3> vertices, std::vector<TriangleIndices> triangles);

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_triangles() const noexcept { return triangles_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const std::vector<UnitVector3>& vertices() const noexcept { return vertices_; }
  const std::vector<TriangleIndices>& triangles() const noexcept { return triangles_; }
  const std::vector<MeshEdge>& edges() const noexcept { return edges_; }
  const UnitVector3& vertex(int v) const { return vertices_.at(static_cast<std::size_t>(v)); }
  const TriangleIndices& triangle_indices(int t) const {
    return triangles_.at(static_cast<std::size_t>(t));
  }

  /// Throws GeometryError if the triangle is degenerate or flipped.
  SphericalTriangle triangle(int t) const;

  /// Edge index of local edge e of triangle t (edge e is opposite corner e).
  int triangle_edge(int t, int e) const { return tri_edges_.at(static_cast<std::size_t>(t))[e]; }
  /// Triangle across local edge e, or -1.
  int neighbor(int t, int e) const;

  std::size_t num_boundary_edges() const noexcept;
  bool is_closed() const noexcept { return !triangles_.empty() && num_boundary_edges() == 0; }
  double total_area() const;

  /// Lowest-index triangle whose barycentric coordinates are all >= -1e-12.
  std::optional<Location> try_locate(const UnitVector3& p) const;
  /// Throws LocationError if p is outside the mesh domain.
  Location locate(const UnitVector3& p) const;
  /// Linear scan, always; used to cross-check the index.
  std::optional<Location> locate_brute_force(const UnitVector3& p) const;
  bool has_spatial_index() const noexcept { return index_ != nullptr; }

 private:
  std::vector<UnitVector3> vertices_;
  std::vector<TriangleIndices> triangles_;
  std::vector<MeshEdge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<SphericalTriangle> cache_;  // empty unless every triangle is valid
  std::shared_ptr<const LocateIndex> index_;
};

enum class BaseMesh { Octahedron, Icosahedron };

TriMesh base_mesh(BaseMesh kind);

/// Splits every triangle into four at the geodesic edge midpoints, `levels`
/// times. Shared midpoints are created once.
TriMesh refine(const TriMesh& mesh, int levels);

/// Keeps triangles holding at least `min_points_per_triangle` of `points`, then
/// removes triangles joined to the rest only through a vertex. Throws
/// PatchError if nothing remains.
TriMesh patch_extract(const TriMesh& mesh, std::span<const UnitVector3> points,
                      int min_points_per_triangle = 1);

/// Sub-mesh made of the listed triangles (vertices compacted, order kept).
TriMesh submesh(const TriMesh& mesh, std::span<const int> triangle_ids);

struct MeshStats {
  double mesh_size = 0.0;       // |Delta|, the longest edge
  double min_inradius = 0.0;    // rho_Delta
  double shape_param = 0.0;     // |Delta| / rho_Delta
  double max_triangle_ratio = 0.0;  // max over triangles of |tau| / rho_tau
  double min_triangle_ratio = 0.0;
  std::size_t triangle_count = 0;
};

MeshStats mesh_stats(const TriMesh& mesh);

enum class ViolationKind {
  IndexRange,
  RepeatedIndex,
  Degenerate,
  Hemisphere,
  Orientation,
  EdgeSharing,
  NonManifoldEdge,
  DuplicateVertex,
  OpenBoundary,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Coincident boundary vertices, as produced by cutting a mesh along a slit.
  std::vector<std::string> warnings;
  std::size_t num_edges = 0;
  std::size_t interior_edges = 0;
  std::size_t boundary_edges = 0;
  /// Closed boundary loops as vertex cycles.
  std::vector<std::vector<int>> boundary_loops;
  long euler_characteristic = 0;

  bool valid() const noexcept { return violations.empty(); }
  bool has(ViolationKind kind) const noexcept;
};

ValidationReport validate(const TriMesh& mesh);

}  // namespace tsss
