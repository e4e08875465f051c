#include "tsss/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include <Eigen/Geometry>

#include "tsss/errors.hpp"

namespace tsss {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

}  // namespace

// Latitude/longitude buckets; each bucket lists every triangle whose bounding
// cap can reach it, in ascending order, so a scan of the bucket returns the
// same lowest-index hit as a scan of the whole mesh.
class LocateIndex {
 public:
  explicit LocateIndex(const std::vector<SphericalTriangle>& tris) {
    n_theta_ = std::max(4, static_cast<int>(std::ceil(std::sqrt(tris.size() / 2.0))));
    n_phi_ = 2 * n_theta_;
    cells_.resize(static_cast<std::size_t>(n_theta_ * n_phi_));
    std::vector<SphericalCap> tri_caps;
    tri_caps.reserve(tris.size());
    for (const auto& t : tris) tri_caps.push_back(bounding_cap(t));
    const double dtheta = std::numbers::pi / n_theta_;
    const double dphi = 2.0 * std::numbers::pi / n_phi_;
    for (int i = 0; i < n_theta_; ++i) {
      for (int j = 0; j < n_phi_; ++j) {
        const double t0 = i * dtheta;
        const double p0 = j * dphi;
        const UnitVector3 center = UnitVector3::from_spherical(t0 + 0.5 * dtheta, p0 + 0.5 * dphi);
        double radius = 0.0;
        constexpr int kSamples = 9;
        for (int s = 0; s <= kSamples; ++s) {
          const double f = static_cast<double>(s) / kSamples;
          for (const auto& q : {UnitVector3::from_spherical(t0, p0 + f * dphi),
                                UnitVector3::from_spherical(t0 + dtheta, p0 + f * dphi),
                                UnitVector3::from_spherical(t0 + f * dtheta, p0),
                                UnitVector3::from_spherical(t0 + f * dtheta, p0 + dphi)}) {
            radius = std::max(radius, geodesic_distance(center, q));
          }
        }
        radius = radius * 1.01 + 1e-9;
        auto& cell = cells_[static_cast<std::size_t>(i * n_phi_ + j)];
        for (std::size_t t = 0; t < tri_caps.size(); ++t) {
          if (geodesic_distance(center, tri_caps[t].center) <=
              radius + tri_caps[t].radius + 1e-9) {
            cell.push_back(static_cast<int>(t));
          }
        }
      }
    }
  }

  const std::vector<int>& candidates(const UnitVector3& p) const {
    const double theta = p.colatitude();
    const double phi = p.longitude();
    const int i = std::clamp(static_cast<int>(theta / std::numbers::pi * n_theta_), 0, n_theta_ - 1);
    const int j =
        std::clamp(static_cast<int>(phi / (2.0 * std::numbers::pi) * n_phi_), 0, n_phi_ - 1);
    return cells_[static_cast<std::size_t>(i * n_phi_ + j)];
  }

 private:
  int n_theta_ = 0;
  int n_phi_ = 0;
  std::vector<std::vector<int>> cells_;
};

TriMesh::TriMesh(std::vector<UnitVector3> vertices, std::vector<TriangleIndices> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int c : triangles_[t]) {
      if (c < 0 || c >= nv) {
        throw GeometryError("triangle " + std::to_string(t) + " references vertex " +
                            std::to_string(c) + " outside [0, " + std::to_string(nv) + ")");
      }
    }
  }
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(triangles_.size() * 2);
  tri_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const int a = triangles_[t][(e + 1) % 3];
      const int b = triangles_[t][(e + 2) % 3];
      const auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b), static_cast<int>(t), -1, 0});
      } else {
        auto& edge = edges_[static_cast<std::size_t>(it->second)];
        if (edge.tri1 < 0) {
          edge.tri1 = static_cast<int>(t);
        } else {
          ++edge.extra;
        }
      }
      tri_edges_[t][e] = it->second;
    }
  }
  try {
    cache_.reserve(triangles_.size());
    for (const auto& tri : triangles_) {
      cache_.emplace_back(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    }
  } catch (const GeometryError&) {
    cache_.clear();
  }
  if (!cache_.empty() && cache_.size() >= kIndexThreshold) {
    index_ = std::make_shared<const LocateIndex>(cache_);
  }
}

SphericalTriangle TriMesh::triangle(int t) const {
  if (!cache_.empty()) return cache_.at(static_cast<std::size_t>(t));
  const auto& tri = triangle_indices(t);
  return SphericalTriangle(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

int TriMesh::neighbor(int t, int e) const {
  const MeshEdge& edge = edges_[static_cast<std::size_t>(triangle_edge(t, e))];
  if (!edge.interior()) return -1;
  return edge.tri0 == t ? edge.tri1 : edge.tri0;
}

std::size_t TriMesh::num_boundary_edges() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const MeshEdge& e) { return !e.interior(); }));
}

double TriMesh::total_area() const {
  double area = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) area += triangle_area(triangle(static_cast<int>(t)));
  return area;
}

std::optional<Location> TriMesh::locate_brute_force(const UnitVector3& p) const {
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const BarycentricCoords b = spherical_barycentric(triangle(static_cast<int>(t)), p);
    if (b.min() >= -kLocateTolerance) return Location{static_cast<int>(t), b};
  }
  return std::nullopt;
}

std::optional<Location> TriMesh::try_locate(const UnitVector3& p) const {
  if (!index_) return locate_brute_force(p);
  for (int t : index_->candidates(p)) {
    const BarycentricCoords b = spherical_barycentric(cache_[static_cast<std::size_t>(t)], p);
    if (b.min() >= -kLocateTolerance) return Location{t, b};
  }
  return std::nullopt;
}

Location TriMesh::locate(const UnitVector3& p) const {
  if (auto loc = try_locate(p)) return *loc;
  throw LocationError("point (" + std::to_string(p.x1()) + ", " + std::to_string(p.x2()) + ", " +
                      std::to_string(p.x3()) + ") lies outside the mesh domain");
}

TriMesh base_mesh(BaseMesh kind) {
  if (kind == BaseMesh::Octahedron) {
    // 0:+e1 1:-e1 2:+e2 3:-e2 4:+e3 5:-e3; face 0 is the first octant.
    std::vector<UnitVector3> v{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    std::vector<TriangleIndices> f{{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                   {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    return TriMesh(std::move(v), std::move(f));
  }
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<UnitVector3> v;
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      v.emplace_back(0.0, s1, s2 * phi);
      v.emplace_back(s1, s2 * phi, 0.0);
      v.emplace_back(s2 * phi, 0.0, s1);
    }
  }
  // Neighbours are the pairs at the largest non-unit dot product.
  const double edge_dot = 1.0 / std::sqrt(5.0);
  auto adjacent = [&](std::size_t a, std::size_t b) {
    return std::abs(v[a].vec().dot(v[b].vec()) - edge_dot) < 1e-9;
  };
  std::vector<TriangleIndices> f;
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      if (!adjacent(a, b)) continue;
      for (std::size_t c = b + 1; c < v.size(); ++c) {
        if (!adjacent(a, c) || !adjacent(b, c)) continue;
        TriangleIndices t{static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
        if (v[a].vec().dot(v[b].vec().cross(v[c].vec())) < 0.0) std::swap(t[1], t[2]);
        f.push_back(t);
      }
    }
  }
  return TriMesh(std::move(v), std::move(f));
}

TriMesh refine(const TriMesh& mesh, int levels) {
  if (levels < 0) throw ConfigError("refinement levels must be nonnegative");
  TriMesh current = mesh;
  for (int level = 0; level < levels; ++level) {
    std::vector<UnitVector3> verts = current.vertices();
    const int base = static_cast<int>(verts.size());
    for (const MeshEdge& e : current.edges()) {
      verts.push_back(geodesic_midpoint(current.vertex(e.v0), current.vertex(e.v1)));
    }
    std::vector<TriangleIndices> tris;
    tris.reserve(current.num_triangles() * 4);
    for (std::size_t t = 0; t < current.num_triangles(); ++t) {
      const auto& [a, b, c] = current.triangle_indices(static_cast<int>(t));
      const int ti = static_cast<int>(t);
      // Local edge e is opposite corner e.
      const int m_bc = base + current.triangle_edge(ti, 0);
      const int m_ca = base + current.triangle_edge(ti, 1);
      const int m_ab = base + current.triangle_edge(ti, 2);
      tris.push_back({a, m_ab, m_ca});
      tris.push_back({m_ab, b, m_bc});
      tris.push_back({m_ca, m_bc, c});
      tris.push_back({m_ab, m_bc, m_ca});
    }
    current = TriMesh(std::move(verts), std::move(tris));
  }
  return current;
}

TriMesh submesh(const TriMesh& mesh, std::span<const int> triangle_ids) {
  std::vector<int> remap(mesh.num_vertices(), -1);
  for (int t : triangle_ids) {
    for (int c : mesh.triangle_indices(t)) remap[static_cast<std::size_t>(c)] = 0;
  }
  std::vector<UnitVector3> verts;
  for (std::size_t v = 0; v < remap.size(); ++v) {
    if (remap[v] == 0) {
      remap[v] = static_cast<int>(verts.size());
      verts.push_back(mesh.vertex(static_cast<int>(v)));
    }
  }
  std::vector<TriangleIndices> tris;
  tris.reserve(triangle_ids.size());
  for (int t : triangle_ids) {
    const auto& tri = mesh.triangle_indices(t);
    tris.push_back({remap[static_cast<std::size_t>(tri[0])], remap[static_cast<std::size_t>(tri[1])],
                    remap[static_cast<std::size_t>(tri[2])]});
  }
  return TriMesh(std::move(verts), std::move(tris));
}

namespace {

// Edge-connected components of the kept triangles.
std::vector<int> kept_components(const TriMesh& mesh, const std::vector<char>& kept,
                                 std::vector<int>& sizes) {
  const std::size_t n = mesh.num_triangles();
  std::vector<int> comp(n, -1);
  sizes.clear();
  std::vector<int> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!kept[seed] || comp[seed] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    sizes.push_back(0);
    stack.push_back(static_cast<int>(seed));
    comp[seed] = id;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      ++sizes[static_cast<std::size_t>(id)];
      for (int e = 0; e < 3; ++e) {
        const int nb = mesh.neighbor(t, e);
        if (nb >= 0 && kept[static_cast<std::size_t>(nb)] && comp[static_cast<std::size_t>(nb)] < 0) {
          comp[static_cast<std::size_t>(nb)] = id;
          stack.push_back(nb);
        }
      }
    }
  }
  return comp;
}

// One pass of vertex-fan cleanup; returns true if any triangle was dropped.
bool drop_vertex_only_links(const TriMesh& mesh, std::vector<char>& kept) {
  std::vector<int> comp_sizes;
  const std::vector<int> comp = kept_components(mesh, kept, comp_sizes);
  std::vector<std::vector<int>> incident(mesh.num_vertices());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!kept[t]) continue;
    for (int c : mesh.triangle_indices(static_cast<int>(t))) {
      incident[static_cast<std::size_t>(c)].push_back(static_cast<int>(t));
    }
  }
  bool changed = false;
  for (std::size_t v = 0; v < incident.size(); ++v) {
    const auto& around = incident[v];
    if (around.size() < 2) continue;
    // Fans: triangles around v linked through edges that contain v.
    std::vector<int> fan(around.size(), -1);
    int n_fans = 0;
    for (std::size_t s = 0; s < around.size(); ++s) {
      if (fan[s] >= 0) continue;
      std::vector<std::size_t> stack{s};
      fan[s] = n_fans;
      while (!stack.empty()) {
        const int t = around[stack.back()];
        stack.pop_back();
        for (int e = 0; e < 3; ++e) {
          const MeshEdge& edge = mesh.edges()[static_cast<std::size_t>(mesh.triangle_edge(t, e))];
          if (edge.v0 != static_cast<int>(v) && edge.v1 != static_cast<int>(v)) continue;
          const int nb = mesh.neighbor(t, e);
          if (nb < 0) continue;
          for (std::size_t q = 0; q < around.size(); ++q) {
            if (around[q] == nb && fan[q] < 0) {
              fan[q] = n_fans;
              stack.push_back(q);
            }
          }
        }
      }
      ++n_fans;
    }
    if (n_fans < 2) continue;
    // Primary fan: largest component, then largest fan, then lowest triangle.
    std::vector<int> fan_size(static_cast<std::size_t>(n_fans), 0);
    std::vector<int> fan_comp(static_cast<std::size_t>(n_fans), 0);
    std::vector<int> fan_min(static_cast<std::size_t>(n_fans), INT32_MAX);
    for (std::size_t q = 0; q < around.size(); ++q) {
      const auto f = static_cast<std::size_t>(fan[q]);
      ++fan_size[f];
      fan_comp[f] = comp_sizes[static_cast<std::size_t>(comp[static_cast<std::size_t>(around[q])])];
      fan_min[f] = std::min(fan_min[f], around[q]);
    }
    int best = 0;
    for (int f = 1; f < n_fans; ++f) {
      const auto a = static_cast<std::size_t>(f);
      const auto b = static_cast<std::size_t>(best);
      if (std::tie(fan_comp[a], fan_size[a]) > std::tie(fan_comp[b], fan_size[b]) ||
          (fan_comp[a] == fan_comp[b] && fan_size[a] == fan_size[b] && fan_min[a] < fan_min[b])) {
        best = f;
      }
    }
    for (std::size_t q = 0; q < around.size(); ++q) {
      if (fan[q] != best) {
        kept[static_cast<std::size_t>(around[q])] = 0;
        changed = true;
      }
    }
    if (changed) return true;
  }
  return changed;
}

}  // namespace

TriMesh patch_extract(const TriMesh& mesh, std::span<const UnitVector3> points,
                      int min_points_per_triangle) {
  if (points.empty()) throw PatchError("patch extraction needs at least one point");
  if (min_points_per_triangle < 1) throw ConfigError("min_points_per_triangle must be >= 1");
  std::vector<int> counts(mesh.num_triangles(), 0);
  for (const auto& p : points) {
    if (auto loc = mesh.try_locate(p)) ++counts[static_cast<std::size_t>(loc->triangle)];
  }
  std::vector<char> kept(mesh.num_triangles(), 0);
  for (std::size_t t = 0; t < counts.size(); ++t) kept[t] = counts[t] >= min_points_per_triangle;
  while (drop_vertex_only_links(mesh, kept)) {
  }
  std::vector<int> ids;
  for (std::size_t t = 0; t < kept.size(); ++t) {
    if (kept[t]) ids.push_back(static_cast<int>(t));
  }
  if (ids.empty()) {
    throw PatchError("no triangle holds at least " + std::to_string(min_points_per_triangle) +
                     " points");
  }
  return submesh(mesh, ids);
}

MeshStats mesh_stats(const TriMesh& mesh) {
  MeshStats s;
  s.triangle_count = mesh.num_triangles();
  s.min_inradius = std::numeric_limits<double>::infinity();
  s.min_triangle_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const SphericalTriangle tri = mesh.triangle(static_cast<int>(t));
    const double edge = longest_edge(tri);
    const double rho = incenter_inradius(tri).radius;
    s.mesh_size = std::max(s.mesh_size, edge);
    s.min_inradius = std::min(s.min_inradius, rho);
    s.max_triangle_ratio = std::max(s.max_triangle_ratio, edge / rho);
    s.min_triangle_ratio = std::min(s.min_triangle_ratio, edge / rho);
  }
  s.shape_param = s.mesh_size / s.min_inradius;
  return s;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::IndexRange: return "index_range";
    case ViolationKind::RepeatedIndex: return "repeated_index";
    case ViolationKind::Degenerate: return "degenerate";
    case ViolationKind::Hemisphere: return "hemisphere";
    case ViolationKind::Orientation: return "orientation";
    case ViolationKind::EdgeSharing: return "edge_sharing";
    case ViolationKind::NonManifoldEdge: return "non_manifold_edge";
    case ViolationKind::DuplicateVertex: return "duplicate_vertex";
    case ViolationKind::OpenBoundary: return "open_boundary";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const noexcept {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate(const TriMesh& mesh) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string msg) {
    report.violations.push_back({kind, std::move(msg)});
  };
  const auto& verts = mesh.vertices();
  const auto& tris = mesh.triangles();

  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& [a, b, c] = tris[t];
    const std::string name = "triangle " + std::to_string(t);
    if (a == b || b == c || a == c) {
      add(ViolationKind::RepeatedIndex, name + " repeats a vertex index");
      continue;
    }
    const double det = verts[a].vec().dot(verts[b].vec().cross(verts[c].vec()));
    if (det / 6.0 < -SphericalTriangle::kMinVolume) {
      add(ViolationKind::Orientation, name + " is clockwise (flipped)");
    } else if (det / 6.0 <= SphericalTriangle::kMinVolume) {
      add(ViolationKind::Degenerate, name + " is degenerate");
    }
    for (int k = 0; k < 3; ++k) {
      if (verts[tris[t][k]].vec().dot(verts[tris[t][(k + 1) % 3]].vec()) <= -1.0 + 1e-12) {
        add(ViolationKind::Hemisphere, name + " is not inside an open hemisphere");
        break;
      }
    }
  }

  // Directed half-edge bookkeeping: an interior edge must be traversed once
  // in each direction.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : tris) {
    for (int e = 0; e < 3; ++e) ++directed[{tri[e], tri[(e + 1) % 3]}];
  }
  for (const MeshEdge& e : mesh.edges()) {
    ++report.num_edges;
    if (e.extra > 0) {
      add(ViolationKind::NonManifoldEdge, "edge (" + std::to_string(e.v0) + ", " +
                                              std::to_string(e.v1) + ") has more than two triangles");
    }
    if (e.interior()) {
      ++report.interior_edges;
      const int fwd = directed[{e.v0, e.v1}];
      const int bwd = directed[{e.v1, e.v0}];
      if (e.extra == 0 && (fwd != 1 || bwd != 1)) {
        add(ViolationKind::Orientation, "edge (" + std::to_string(e.v0) + ", " + std::to_string(e.v1) +
                                            ") is traversed in the same direction by both triangles");
      }
    } else {
      ++report.boundary_edges;
    }
  }

  // Duplicate vertices.
  std::vector<int> order(verts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return verts[i].x1() < verts[j].x1(); });
  std::vector<char> on_boundary(verts.size(), 0);
  for (const MeshEdge& e : mesh.edges()) {
    if (!e.interior()) on_boundary[e.v0] = on_boundary[e.v1] = 1;
  }
  constexpr double kDuplicate = 1e-10;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (verts[order[j]].x1() - verts[order[i]].x1() > kDuplicate) break;
      if ((verts[order[i]].vec() - verts[order[j]].vec()).norm() < kDuplicate) {
        std::string msg = "vertices " + std::to_string(order[i]) + " and " +
                          std::to_string(order[j]) + " coincide";
        if (on_boundary[order[i]] && on_boundary[order[j]]) {
          report.warnings.push_back(msg + " on the boundary (slit)");
        } else {
          add(ViolationKind::DuplicateVertex, std::move(msg));
        }
      }
    }
  }

  // T-junctions: a vertex strictly inside an unmatched edge.
  std::vector<char> used(verts.size(), 0);
  for (const auto& tri : tris) {
    for (int c : tri) used[static_cast<std::size_t>(c)] = 1;
  }
  for (const MeshEdge& e : mesh.edges()) {
    if (e.interior()) continue;
    const UnitVector3& a = verts[e.v0];
    const UnitVector3& b = verts[e.v1];
    for (std::size_t v = 0; v < verts.size(); ++v) {
      if (!used[v] || static_cast<int>(v) == e.v0 || static_cast<int>(v) == e.v1) continue;
      if (distance_to_arc(verts[v], a, b) < 1e-10 && geodesic_distance(verts[v], a) > 1e-10 &&
          geodesic_distance(verts[v], b) > 1e-10) {
        add(ViolationKind::EdgeSharing, "vertex " + std::to_string(v) + " lies inside edge (" +
                                            std::to_string(e.v0) + ", " + std::to_string(e.v1) + ")");
      }
    }
  }

  // Boundary loops from directed boundary half-edges.
  std::multimap<int, int> next;
  for (const auto& [key, count] : directed) {
    if (count == 1 && directed.find({key.second, key.first}) == directed.end()) {
      next.emplace(key.first, key.second);
    }
  }
  std::size_t open_chains = 0;
  while (!next.empty()) {
    auto it = next.begin();
    const int start = it->first;
    std::vector<int> loop{start};
    int cur = it->second;
    next.erase(it);
    bool closed = cur == start;
    while (!closed) {
      loop.push_back(cur);
      auto nx = next.find(cur);
      if (nx == next.end()) break;
      cur = nx->second;
      next.erase(nx);
      closed = cur == start;
    }
    if (closed) {
      report.boundary_loops.push_back(std::move(loop));
    } else {
      ++open_chains;
    }
  }
  if (open_chains > 0) {
    add(ViolationKind::OpenBoundary, std::to_string(open_chains) + " boundary chain(s) do not close");
  }

  const auto nv = static_cast<long>(std::count(used.begin(), used.end(), 1));
  report.euler_characteristic =
      nv - static_cast<long>(mesh.num_edges()) + static_cast<long>(mesh.num_triangles());
  return report;
}

}  // namespace tsss
