#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../common/support.hpp"
#include "tsss/errors.hpp"
#include "tsss/mesh.hpp"
#include "tsss/simulation.hpp"

namespace tsss {
namespace {

using std::numbers::pi;

std::optional<int> scan_locate(const TriMesh& mesh, const UnitVector3& p) {
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (contains(mesh.triangle(static_cast<int>(t)), p)) return static_cast<int>(t);
  }
  return std::nullopt;
}

TEST(BaseMesh, Counts) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  EXPECT_EQ(oct.num_triangles(), 8u);
  EXPECT_EQ(oct.num_vertices(), 6u);
  const TriMesh ico = base_mesh(BaseMesh::Icosahedron);
  EXPECT_EQ(ico.num_triangles(), 20u);
  EXPECT_EQ(ico.num_vertices(), 12u);
  EXPECT_NEAR(oct.total_area(), 4 * pi, 1e-10);
  EXPECT_NEAR(ico.total_area(), 4 * pi, 1e-10);
}

TEST(BaseMesh, OctahedronValidates) {
  const ValidationReport rep = validate(base_mesh(BaseMesh::Octahedron));
  EXPECT_TRUE(rep.valid());
  EXPECT_EQ(rep.num_edges, 12u);
  EXPECT_EQ(rep.interior_edges, 12u);
  EXPECT_EQ(rep.boundary_edges, 0u);
  EXPECT_EQ(rep.euler_characteristic, 2);
}

TEST(Refine, Counts) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  const TriMesh r1 = refine(oct, 1);
  EXPECT_EQ(r1.num_triangles(), 32u);
  EXPECT_EQ(r1.num_vertices(), 18u);
  const TriMesh r2 = refine(oct, 2);
  EXPECT_EQ(r2.num_triangles(), 128u);
  EXPECT_EQ(r2.num_vertices(), 66u);
  const TriMesh r0 = refine(oct, 0);
  EXPECT_EQ(r0.vertices(), oct.vertices());
  EXPECT_EQ(r0.triangles(), oct.triangles());
}

TEST(Refine, PreservesAreaAndTopology) {
  for (BaseMesh kind : {BaseMesh::Octahedron, BaseMesh::Icosahedron}) {
    const TriMesh base = base_mesh(kind);
    for (int k = 0; k <= 4; ++k) {
      const TriMesh m = refine(base, k);
      EXPECT_NEAR(m.total_area(), base.total_area(), 1e-9);
      const ValidationReport rep = validate(m);
      EXPECT_TRUE(rep.valid()) << k;
      EXPECT_EQ(rep.euler_characteristic, 2);
      EXPECT_TRUE(m.is_closed());
    }
  }
}

TEST(Refine, MidpointsAreGeodesic) {
  const TriMesh base = base_mesh(BaseMesh::Icosahedron);
  const TriMesh m = refine(base, 1);
  for (const MeshEdge& e : base.edges()) {
    const Vec3 mid = (base.vertex(e.v0).vec() + base.vertex(e.v1).vec()).normalized();
    double best = 1;
    for (const auto& v : m.vertices()) best = std::min(best, (v.vec() - mid).norm());
    EXPECT_LT(best, 1e-15);
  }
}

TEST(PatchExtract, OneOctant) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  const std::vector<UnitVector3> pts{UnitVector3(1, 1, 1), UnitVector3(2, 1, 1), UnitVector3(1, 2, 3)};
  const TriMesh p = patch_extract(oct, pts, 1);
  EXPECT_EQ(p.num_triangles(), 1u);
  EXPECT_TRUE(validate(p).valid());
}

TEST(PatchExtract, DenseCoverKeepsAll) {
  const auto mesh = test::octahedron(1);
  Rng rng(1);
  const auto pts = test::random_points(5000, rng);
  const TriMesh p = patch_extract(*mesh, pts, 1);
  EXPECT_EQ(p.num_triangles(), mesh->num_triangles());
  EXPECT_TRUE(p.is_closed());
}

TEST(PatchExtract, NorthernHemisphere) {
  const auto mesh = test::octahedron(1);
  Rng rng(2);
  std::vector<UnitVector3> pts;
  while (pts.size() < 3000) {
    const UnitVector3 p = test::random_unit(rng);
    if (p.x3() > 1e-6) pts.push_back(p);
  }
  int oracle = 0;
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
    bool north = true;
    for (int v : mesh->triangle_indices(static_cast<int>(t))) north &= mesh->vertex(v).x3() >= 0;
    oracle += north;
  }
  const TriMesh p = patch_extract(*mesh, pts, 1);
  EXPECT_EQ(static_cast<int>(p.num_triangles()), oracle);
  EXPECT_EQ(p.num_triangles(), 16u);
  const ValidationReport rep = validate(p);
  EXPECT_TRUE(rep.valid());
  ASSERT_EQ(rep.boundary_loops.size(), 1u);
  EXPECT_EQ(rep.boundary_loops[0].size(), 8u);
  for (int v : rep.boundary_loops[0]) EXPECT_NEAR(p.vertex(v).x3(), 0.0, 1e-15);
}

TEST(PatchExtract, DropsVertexOnlyAttachment) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  // Opposite upper octants share only the north pole.
  const std::vector<UnitVector3> pts{UnitVector3(1, 1, 1), UnitVector3(-1, -1, 1)};
  const TriMesh p = patch_extract(oct, pts, 1);
  EXPECT_EQ(p.num_triangles(), 1u);
  EXPECT_TRUE(validate(p).valid());
}

TEST(PatchExtract, ThresholdAndEmpty) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  const std::vector<UnitVector3> pts{UnitVector3(1, 1, 1)};
  EXPECT_THROW(patch_extract(oct, pts, 2), PatchError);
  EXPECT_THROW(patch_extract(oct, std::vector<UnitVector3>{}, 1), PatchError);
}

TEST(PatchExtract, RandomPatchesValidate) {
  const auto mesh = test::icosahedron(2);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const UnitVector3 c = test::random_unit(rng);
    std::vector<UnitVector3> pts;
    while (pts.size() < 400) {
      const UnitVector3 p = test::random_unit(rng);
      if (p.vec().dot(c.vec()) > 0.2) pts.push_back(p);
    }
    const TriMesh p = patch_extract(*mesh, pts, 1 + trial % 3);
    EXPECT_TRUE(validate(p).valid());
  }
}

TEST(Locate, OctahedronCases) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  const UnitVector3 c(1, 1, 1);
  const Location loc = oct.locate(c);
  EXPECT_EQ(loc.triangle, scan_locate(oct, c).value());
  std::array<int, 3> idx = oct.triangle_indices(loc.triangle);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(loc.coords[k], 1 / std::sqrt(3.0), 1e-15);
    const Vec3& v = oct.vertex(idx[k]).vec();
    EXPECT_EQ(v.minCoeff(), 0.0);
  }
  const UnitVector3 e1(1, 0, 0);
  const Location at = oct.locate(e1);
  int expected = -1;
  for (std::size_t t = 0; t < oct.num_triangles() && expected < 0; ++t) {
    for (int v : oct.triangle_indices(static_cast<int>(t))) {
      if (oct.vertex(v) == e1) expected = static_cast<int>(t);
    }
  }
  EXPECT_EQ(at.triangle, expected);
  for (int k = 0; k < 3; ++k) {
    const bool here = oct.vertex(oct.triangle_indices(at.triangle)[k]) == e1;
    EXPECT_EQ(at.coords[k], here ? 1.0 : 0.0);
  }
}

TEST(Locate, OutsidePatchThrows) {
  const auto mesh = test::octahedron(1);
  Rng rng(4);
  std::vector<UnitVector3> pts;
  while (pts.size() < 2000) {
    const UnitVector3 p = test::random_unit(rng);
    if (p.x3() > -0.3) pts.push_back(p);
  }
  const TriMesh patch = patch_extract(*mesh, pts, 1);
  const UnitVector3 south(0, 0, -1);
  EXPECT_FALSE(patch.try_locate(south));
  EXPECT_THROW(patch.locate(south), LocationError);
}

TEST(Locate, IndexAgreesWithScan) {
  const auto mesh = test::octahedron(4);
  ASSERT_GT(mesh->num_triangles(), TriMesh::kIndexThreshold);
  EXPECT_TRUE(mesh->has_spatial_index());
  Rng rng(5);
  auto pts = test::random_points(3000, rng);
  for (const auto& v : mesh->vertices()) pts.push_back(v);
  for (const MeshEdge& e : mesh->edges()) pts.push_back(geodesic_midpoint(mesh->vertex(e.v0), mesh->vertex(e.v1)));
  for (const auto& p : pts) {
    const auto a = mesh->try_locate(p);
    const auto b = mesh->locate_brute_force(p);
    ASSERT_TRUE(a && b);
    EXPECT_EQ(a->triangle, b->triangle);
    EXPECT_EQ(a->triangle, scan_locate(*mesh, p).value());
  }
}

TEST(Locate, RightInverseOfContainment) {
  const auto mesh = test::icosahedron(2);
  Rng rng(6);
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
    const SphericalTriangle tri = mesh->triangle(static_cast<int>(t));
    for (int s = 0; s < 5; ++s) {
      const UnitVector3 p = test::random_inside(tri, rng, 0.0);
      const Location loc = mesh->locate(p);
      const SphericalTriangle got = mesh->triangle(loc.triangle);
      Vec3 rec = Vec3::Zero();
      for (int k = 0; k < 3; ++k) rec += loc.coords[k] * got.vertex(k).vec();
      EXPECT_LT((rec - p.vec()).norm(), 1e-12);
      if (loc.triangle != static_cast<int>(t)) {
        bool adjacent = false;
        for (int e = 0; e < 3; ++e) adjacent |= mesh->neighbor(static_cast<int>(t), e) == loc.triangle;
        EXPECT_TRUE(adjacent);
      }
    }
  }
}

TEST(MeshStats, Octahedron) {
  const MeshStats s = mesh_stats(base_mesh(BaseMesh::Octahedron));
  EXPECT_NEAR(s.mesh_size, pi / 2, 1e-14);
  EXPECT_NEAR(s.min_inradius, std::asin(1 / std::sqrt(3.0)), 1e-12);
  EXPECT_EQ(s.triangle_count, 8u);
}

TEST(MeshStats, RefinedAndPerTriangleRatio) {
  const auto r1 = test::octahedron(1);
  EXPECT_LT(mesh_stats(*r1).mesh_size, pi / 2);
  for (const auto& mesh : {test::octahedron(3), test::icosahedron(2)}) {
    const MeshStats s = mesh_stats(*mesh);
    EXPECT_GE(s.min_triangle_ratio, 2.0);
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
      const SphericalTriangle tri = mesh->triangle(static_cast<int>(t));
      EXPECT_GE(longest_edge(tri) / incenter_inradius(tri).radius, 2.0);
    }
  }
}

TEST(Validate, FlippedTriangle) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  auto tris = oct.triangles();
  std::swap(tris[3][1], tris[3][2]);
  const TriMesh bad(oct.vertices(), tris);
  const ValidationReport rep = validate(bad);
  EXPECT_TRUE(rep.has(ViolationKind::Orientation));
}

TEST(Validate, TJunction) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  auto verts = oct.vertices();
  auto tris = oct.triangles();
  // Split triangle 0 at the midpoint of its first edge without touching the neighbour.
  const TriangleIndices t0 = tris[0];
  const int m = static_cast<int>(verts.size());
  verts.push_back(geodesic_midpoint(verts[t0[0]], verts[t0[1]]));
  tris[0] = {t0[0], m, t0[2]};
  tris.push_back({m, t0[1], t0[2]});
  const ValidationReport rep = validate(TriMesh(verts, tris));
  EXPECT_TRUE(rep.has(ViolationKind::EdgeSharing));
  EXPECT_FALSE(rep.valid());
}

TEST(Validate, InteriorDuplicateVertex) {
  const TriMesh oct = base_mesh(BaseMesh::Octahedron);
  auto verts = oct.vertices();
  auto tris = oct.triangles();
  verts.push_back(verts[tris[0][0]]);
  const ValidationReport rep = validate(TriMesh(verts, tris));
  EXPECT_TRUE(rep.has(ViolationKind::DuplicateVertex));
  EXPECT_FALSE(rep.valid());
}

TEST(Validate, SlitIsWarningOnly) {
  const TriMesh slit = seam_patch(1);
  const ValidationReport rep = validate(slit);
  EXPECT_TRUE(rep.valid());
  EXPECT_FALSE(rep.warnings.empty());
  EXPECT_EQ(rep.boundary_loops.size(), 1u);
  EXPECT_EQ(rep.euler_characteristic, 1);
}

}  // namespace
}  // namespace tsss
