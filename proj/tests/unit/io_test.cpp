#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "../common/support.hpp"
#include "tsss/errors.hpp"
#include "tsss/io.hpp"

namespace tsss {
namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "tsss_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(FormatDouble, RoundTrips) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, 20 * rng.uniform() - 10);
    const std::string s = format_double(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(MeshJson, RoundTripIsExact) {
  for (const auto& mesh : {test::octahedron(2), test::icosahedron(1)}) {
    const TriMesh back = mesh_from_json(mesh_to_json(*mesh));
    EXPECT_EQ(back.vertices(), mesh->vertices());
    EXPECT_EQ(back.triangles(), mesh->triangles());
  }
  const TriMesh slit = seam_patch(1);
  const TriMesh back = mesh_from_json(mesh_to_json(slit));
  EXPECT_EQ(back.vertices(), slit.vertices());
}

TEST(MeshJson, RejectsInvalid) {
  EXPECT_THROW(mesh_from_json(R"({"vertices": [[1,0,0],[0,1,0],[0,0,1]], "triangles": [[0,2,1]]})"),
               GeometryError);
  EXPECT_THROW(mesh_from_json("not json"), Error);
}

TEST(ModelJson, RoundTripPredictsIdentically) {
  const auto mesh = test::octahedron(1);
  const SplineSpace space(mesh, 3, 1);
  Rng rng(2);
  Dataset data;
  data.locations = test::random_points(300, rng);
  for (const auto& x : data.locations) data.responses.push_back(x.x1() * x.x2() + rng.normal() * 0.1);
  const FittedModel model = fit(data, space, 0.01);
  const auto path = scratch("model.json");
  write_model(path, model);
  const FittedModel back = read_model(path);
  EXPECT_EQ(back.coefficients(), model.coefficients());
  EXPECT_EQ(back.degree(), 3);
  EXPECT_EQ(back.smoothness(), 1);
  EXPECT_EQ(back.lambda(), 0.01);
  for (const auto& x : test::random_points(100, rng)) EXPECT_EQ(back(x), model(x));
}

TEST(ModelJson, MeshByRelativePathAndCountCheck) {
  const auto mesh = test::octahedron(0);
  write_mesh(scratch("oct.json"), *mesh);
  const auto dir = scratch("oct.json").parent_path();
  std::string coef = "1";
  for (int i = 1; i < 24; ++i) coef += "," + std::to_string(i + 1);
  const FittedModel m = model_from_json(
      R"({"mesh": "oct.json", "degree": 1, "smoothness": 0, "lambda": 0, "coefficients": [)" + coef + "]}", dir);
  Eigen::VectorXd g(24);
  for (int i = 0; i < 24; ++i) g[i] = i + 1;
  const FittedModel direct(mesh, 1, 0, 0.0, g);
  const UnitVector3 x(1, 2, 3);
  EXPECT_EQ(m(x), direct(x));
  EXPECT_THROW(model_from_json(
                   R"({"mesh": "oct.json", "degree": 1, "smoothness": 0, "lambda": 0, "coefficients": [1, 2]})", dir),
               ModelError);
}

TEST(Points, CartesianAndSpherical) {
  std::istringstream cart(" X , y,Z,Value\n0,0,1,2.5\n1,0,0,-1\n");
  const PointsTable a = parse_points(cart);
  ASSERT_EQ(a.locations.size(), 2u);
  ASSERT_TRUE(a.values.has_value());
  EXPECT_EQ((*a.values)[0], 2.5);
  EXPECT_EQ(a.dataset().responses[1], -1.0);

  std::istringstream sph("theta,phi\n0,0\n1.5707963267948966,3.141592653589793\n");
  const PointsTable b = parse_points(sph);
  EXPECT_FALSE(b.values.has_value());
  EXPECT_THROW(b.dataset(), IoError);
  EXPECT_LT((b.locations[0].vec() - Vec3(0, 0, 1)).norm(), 1e-15);
  EXPECT_LT((b.locations[1].vec() - Vec3(-1, 0, 0)).norm(), 1e-15);
}

TEST(Points, SphericalConversionIdentity) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const UnitVector3 x = test::random_unit(rng);
    const UnitVector3 y = UnitVector3::from_spherical(x.colatitude(), x.longitude());
    EXPECT_LT((x.vec() - y.vec()).norm(), 1e-10);
  }
}

TEST(Points, RowErrorsNameTheRow) {
  auto expect_row = [](const std::string& csv, const std::string& row) {
    std::istringstream in(csv);
    try {
      parse_points(in);
      FAIL() << csv;
    } catch (const IoError& e) {
      EXPECT_NE(std::string(e.what()).find("row " + row), std::string::npos) << e.what();
    }
  };
  expect_row("x,y,z\n0,0,1\n0,0,2\n", "2");
  expect_row("x,y,z\nfoo,0,1\n", "1");
  expect_row("x,y,z\n0,0\n", "1");
  expect_row("theta,phi\n0,0\n4,0\n", "2");
  std::istringstream no_header("a,b\n1,2\n");
  EXPECT_THROW(parse_points(no_header), IoError);
}

TEST(Points, WriteThenRead) {
  Rng rng(4);
  const auto pts = test::random_points(50, rng);
  std::vector<double> vals(pts.size());
  for (auto& v : vals) v = rng.normal();
  const std::vector<std::string> names{"value"};
  const std::vector<std::span<const double>> cols{vals};
  std::stringstream ss;
  write_points_csv(ss, pts, names, cols);
  const PointsTable back = parse_points(ss);
  ASSERT_EQ(back.locations.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back.locations[i], pts[i]);
    EXPECT_EQ((*back.values)[i], vals[i]);
  }
}

}  // namespace
}  // namespace tsss
