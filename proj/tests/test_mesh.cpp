#include "helpers.hpp"
#include "pfto/vtk.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

using namespace pfto;

namespace {

// Every interior edge must be shared by exactly two triangles with opposite
// orientation; otherwise there is a hanging node or an overlap.
bool conforming(const Mesh& m) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : m.triangles())
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  for (const auto& [e, n] : directed) {
    if (n != 1) return false;
    bool has_twin = directed.count({e.second, e.first}) > 0;
    bool on_boundary = false;
    for (const auto& b : m.boundary())
      if (b.v[0] == e.first && b.v[1] == e.second) on_boundary = true;
    if (has_twin == on_boundary) return false;
  }
  return true;
}

double area_sum(const Mesh& m) {
  double s = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) s += m.area(t);
  return s;
}

Vector sample(const Mesh& m, double (*f)(Vec2)) {
  Vector v(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) v[i] = f(m.vertex(i));
  return v;
}

}  // namespace

TEST_CASE("rectangle mesh counts") {
  Mesh unit = build_rect_mesh(0, 1, 0, 1, 1.0);
  CHECK(unit.num_vertices() == 4);
  CHECK(unit.num_triangles() == 2);

  Mesh beam = build_rect_mesh(-1, 1, 0, 1, 1.0 / 64);
  const int nx = 128, ny = 64;
  CHECK(beam.num_vertices() == (nx + 1) * (ny + 1));
  CHECK(beam.num_triangles() == 2 * nx * ny);
  CHECK(area_sum(beam) == doctest::Approx(2.0).epsilon(1e-12));
  for (int t = 0; t < beam.num_triangles(); ++t) REQUIRE(beam.area(t) > 0.0);
  CHECK(conforming(beam));

  CHECK_THROWS_AS(build_rect_mesh(0, 1, 0, 1, 3.0), InvalidInput);
  CHECK_THROWS_AS(build_rect_mesh(1, 0, 0, 1, 0.1), InvalidInput);
  CHECK_THROWS_AS(build_rect_mesh(0, 1, 0, 1, 0.0), InvalidInput);
}

TEST_CASE("grid coordinates are exact multiples of the pitch") {
  Mesh m = build_rect_mesh(-1, 1, 0, 1, 0.25);
  std::set<double> xs, ys;
  for (auto v : m.vertices()) {
    xs.insert(v.x);
    ys.insert(v.y);
  }
  CHECK(xs.size() == 9);
  CHECK(ys.size() == 5);
  CHECK(*xs.begin() == -1.0);
  CHECK(*ys.rbegin() == 1.0);
}

TEST_CASE("cantilever boundary tags") {
  Mesh m = testing::cantilever_mesh(1.0 / 16);
  for (const auto& e : m.boundary()) {
    Vec2 a = m.vertex(e.v[0]), b = m.vertex(e.v[1]);
    Vec2 mid = 0.5 * (a + b);
    if (mid.x == -1.0)
      CHECK(e.tag == BoundaryTag::Dirichlet);
    else if (mid.x >= 0.75 && mid.y == 0.0)
      CHECK(e.tag == BoundaryTag::Neumann);
    else
      CHECK(e.tag == BoundaryTag::Free);
  }
  CHECK(m.count_edges(BoundaryTag::Dirichlet) == 16);
  CHECK(m.count_edges(BoundaryTag::Neumann) == 4);

  auto all = [](Vec2) { return true; };
  Mesh d = tag_boundary(build_rect_mesh(0, 1, 0, 1, 0.5), all, all);
  CHECK(d.count_edges(BoundaryTag::Dirichlet) == static_cast<int>(d.boundary().size()));

  auto none = [](Vec2) { return false; };
  CHECK_THROWS_AS(tag_boundary(build_rect_mesh(0, 1, 0, 1, 0.5), none, all), InvalidInput);
}

TEST_CASE("band refinement around a straight interface") {
  Mesh base = build_rect_mesh(-1, 1, 0, 1, 1.0 / 8);
  const double eps = 0.06, pts = 8;
  Vector phi = sample(base, [](Vec2 p) {
    double s = p.x / 0.06;
    return std::abs(s) >= 0.5 * std::numbers::pi ? (s > 0 ? 1.0 : -1.0) : std::sin(s);
  });
  RefinedMesh r = refine_interface_band(base, phi, eps, pts);
  const double target = std::numbers::pi * eps / pts;
  CHECK(r.mesh.num_vertices() > base.num_vertices());
  CHECK(conforming(r.mesh));
  CHECK(area_sum(r.mesh) == doctest::Approx(2.0).epsilon(1e-12));
  // geometric check: elements carrying interface are fine; far-away ones were left alone
  for (int t = 0; t < r.mesh.num_triangles(); ++t) {
    const auto& tri = r.mesh.triangle(t);
    double mx = 0.0;
    double xmin = 1e9, xmax = -1e9;
    for (int v : tri) {
      mx = std::max(mx, std::abs(r.phi[v]));
      xmin = std::min(xmin, r.mesh.vertex(v).x);
      xmax = std::max(xmax, r.mesh.vertex(v).x);
    }
    if (mx < 1.0 - kTolPure) CHECK(r.mesh.diameter(t) <= target * (1 + 1e-9));
    if (xmin > 0.5 || xmax < -0.5) CHECK(r.mesh.diameter(t) == doctest::Approx(std::sqrt(2.0) / 8));
  }
  CHECK(band_resolved(r.mesh, r.phi, eps, pts));

  SUBCASE("idempotent") {
    RefinedMesh again = refine_interface_band(r.mesh, r.phi, eps, pts);
    CHECK(again.mesh.num_vertices() == r.mesh.num_vertices());
    CHECK(again.mesh.num_triangles() == r.mesh.num_triangles());
    CHECK((again.phi - r.phi).norm() == 0.0);
  }
  SUBCASE("pure phase is left alone") {
    RefinedMesh same = refine_interface_band(base, Vector::Ones(base.num_vertices()), eps, pts);
    CHECK(same.mesh.num_vertices() == base.num_vertices());
  }
}

TEST_CASE("linear fields survive refinement and transfer exactly") {
  Mesh base = build_rect_mesh(-1, 1, 0, 1, 0.25);
  auto lin = [](Vec2 p) { return 0.3 * p.x - 0.7 * p.y + 0.1; };
  Vector phi(base.num_vertices());
  for (int i = 0; i < base.num_vertices(); ++i) phi[i] = lin(base.vertex(i));
  RefinedMesh r = refine_interface_band(base, phi, 0.05, 4);
  REQUIRE(r.mesh.num_vertices() > base.num_vertices());
  for (int i = 0; i < r.mesh.num_vertices(); ++i) CHECK(r.phi[i] == doctest::Approx(lin(r.mesh.vertex(i))).epsilon(1e-12));
  Vector back = transfer_field(r.mesh, r.phi, base);
  CHECK((back - phi).cwiseAbs().maxCoeff() < 1e-12);
  Mesh other = build_rect_mesh(-1, 1, 0, 1, 0.3);
  Vector there = transfer_field(base, phi, other);
  for (int i = 0; i < other.num_vertices(); ++i) CHECK(there[i] == doctest::Approx(lin(other.vertex(i))).epsilon(1e-12));
}

TEST_CASE("vtk export header") {
  Mesh m = build_rect_mesh(0, 1, 0, 1, 0.5);
  auto path = std::filesystem::temp_directory_path() / "pfto_test_mesh.vtk";
  Vector phi = Vector::Zero(m.num_vertices());
  Vector u = Vector::Ones(2 * m.num_vertices());
  write_vtk(path, m, {{"phi", phi}}, {{"u", u}});
  std::ifstream in(path);
  std::string l1, l2, l3, l4;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  std::getline(in, l4);
  CHECK(l1 == "# vtk DataFile Version 3.0");
  CHECK(l3 == "ASCII");
  CHECK(l4 == "DATASET UNSTRUCTURED_GRID");
  std::stringstream rest;
  rest << in.rdbuf();
  CHECK(rest.str().find("CELL_TYPES 8\n5\n") != std::string::npos);
  CHECK(rest.str().find("POINT_DATA 9") != std::string::npos);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(write_vtk(path, m, {{"phi", Vector::Zero(3)}}), InvalidInput);
}
