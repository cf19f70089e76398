#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "shapegrad/config.hpp"
#include "shapegrad/deform.hpp"
#include "shapegrad/mesh.hpp"
#include "shapegrad/velocity.hpp"
#include "support/test_support.hpp"

using namespace shapegrad;
using namespace shapegrad::testsupport;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("generators: counts, measures, unit outward normals") {
  const auto interval = SimplicialMesh::interval(0.0, 1.0, 8);
  CHECK(interval.num_vertices() == 9);
  CHECK(interval.total_volume() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(interval.num_boundary_facets() == 2);

  const auto square = SimplicialMesh::square(6);
  CHECK(square.num_simplices() == 72);
  CHECK(square.total_volume() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(square.boundary_measure() == doctest::Approx(4.0).epsilon(1e-12));

  const auto disk = SimplicialMesh::disk(1.0, 8);
  CHECK(disk.num_simplices() == 6 * 8 * 8);
  CHECK(disk.num_vertices() == 1 + 3 * 8 * 9);
  // inscribed-polygon area: the hex-pattern boundary is a regular 48-gon
  const double polygon_area = 0.5 * 48 * std::sin(2 * pi / 48);
  CHECK(disk.total_volume() == doctest::Approx(polygon_area).epsilon(1e-6));

  for (const auto& mesh : {interval, square, disk}) {
    for (const auto& f : mesh.boundary_facets()) {
      CHECK(norm(f.normal) == doctest::Approx(1.0).epsilon(1e-12));
      // outward: positive pairing with midpoint minus adjacent centroid
      CHECK(dot(f.normal, f.midpoint - mesh.centroid(f.adjacent_element)) > 0.0);
    }
    for (int t = 0; t < mesh.num_simplices(); ++t) CHECK(mesh.volume(t) > 0.0);
  }
}

TEST_CASE("divergence theorem for affine fields") {
  for (const auto& mesh : {SimplicialMesh::square(7), SimplicialMesh::disk(1.0, 6)}) {
    const Mat2 a{0.3, -0.7, 1.1, 0.4};
    const Vec2 b{0.2, -0.5};
    double boundary_flux = 0.0;
    for (const auto& q : mesh.boundary_quadrature()) {
      boundary_flux += q.weight * dot(matvec(a, q.point) + b, q.normal);
    }
    CHECK(boundary_flux == doctest::Approx(trace(a) * mesh.total_volume()).epsilon(1e-10));
  }
}

TEST_CASE("boundary quadrature examples") {
  const auto interval = SimplicialMesh::interval(0.0, 1.0, 4);
  const auto q1 = interval.boundary_quadrature();
  REQUIRE(q1.size() == 2);
  double wsum = 0.0, nsum = 0.0;
  for (const auto& q : q1) {
    wsum += q.weight;
    nsum += q.normal.x;
    CHECK(std::abs(q.normal.x) == 1.0);
  }
  CHECK(wsum == 2.0);  // point measures
  CHECK(nsum == 0.0);

  // disk(1, n) boundary is a regular 6n-gon; 64-gon comparison via n-free check
  const auto disk = SimplicialMesh::disk(1.0, 11);  // 66-gon, close to a 64-gon
  double per = 0.0;
  for (const auto& q : disk.boundary_quadrature()) per += q.weight;
  const int sides = 6 * 11;
  CHECK(per == doctest::Approx(2 * sides * std::sin(pi / sides)).epsilon(1e-12));
  CHECK(std::abs(per - 2 * pi) / (2 * pi) < 0.002);

  const auto square = SimplicialMesh::square(5);
  double persq = 0.0;
  for (const auto& q : square.boundary_quadrature()) persq += q.weight;
  CHECK(persq == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("deform: identity, scaling, jacobians") {
  const auto mesh = SimplicialMesh::interval(0.0, 2.0, 10);
  const auto v = VelocityField::dilation(mesh);

  const auto rec0 = deform(mesh, v, 0.0);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    CHECK(rec0.deformed_mesh.vertex(i).x == mesh.vertex(i).x);
  }

  const auto rec = deform(mesh, v, 0.5);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    CHECK(rec.deformed_mesh.vertex(i).x == doctest::Approx(1.5 * mesh.vertex(i).x));
  }
  for (double beta : rec.element_jacobian_det) CHECK(beta == doctest::Approx(1.5));

  // DPsi = I + eps DV exactly
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const Mat2 expected = identity2() + 0.5 * v.element_gradient(t);
    CHECK(rec.element_jacobian[t].a == doctest::Approx(expected.a));
  }
}

TEST_CASE("(beta - 1)/eps approaches div V at rate eps") {
  auto rng = seeded_rng(3u);
  const auto mesh = SimplicialMesh::square(6);
  std::vector<Vec2> nodal(mesh.num_vertices());
  for (auto& w : nodal) w = {uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3)};
  const VelocityField v(mesh, nodal);
  double cmax = 0.0;  // max element |det DV|; beta = 1 + eps div V + eps^2 det DV in 2D
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    cmax = std::max(cmax, std::abs(det(v.element_gradient(t))));
  }
  for (double eps : {1e-2, 1e-3}) {
    const auto rec = deform(mesh, v, eps);
    double worst = 0.0;
    for (int t = 0; t < mesh.num_simplices(); ++t) {
      const double ratio = (rec.element_jacobian_det[t] - 1.0) / eps;
      worst = std::max(worst, std::abs(ratio - trace(v.element_gradient(t))));
    }
    CHECK(worst <= eps * cmax + 1e-12);
  }
}

TEST_CASE("deform rejects maps beyond the bi-Lipschitz range and degenerate elements") {
  const auto mesh = SimplicialMesh::interval(0.0, 1.0, 4);
  const auto v = VelocityField::dilation(mesh);  // Lip = 1
  CHECK_THROWS_AS(deform(mesh, v, 1.0), std::invalid_argument);

  // shrink one interior vertex onto its neighbor: local degeneration
  std::vector<Vec2> nodal(mesh.num_vertices());
  nodal[1] = {0.3, 0.0};  // vertex at 0.25 moves past vertex at 0.5 for eps close to 1
  const VelocityField w(mesh, nodal);
  CHECK_THROWS(deform(mesh, w, 0.9));
}

TEST_CASE("deformation composition with nodal velocity data") {
  // Nodal velocities ride with the vertices, so two-step deformation equals
  // one-step for any field...
  const auto mesh = SimplicialMesh::disk(1.0, 4);
  auto rng = seeded_rng(5u);
  std::vector<Vec2> nodal(mesh.num_vertices());
  for (auto& w : nodal) w = {uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2)};
  const VelocityField v(mesh, nodal);
  const auto two_step_a = deform(mesh, v, 0.05);
  const VelocityField v_carried(two_step_a.deformed_mesh, nodal);
  const auto two_step = deform(two_step_a.deformed_mesh, v_carried, 0.03);
  const auto one_step = deform(mesh, v, 0.08);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    CHECK(two_step.deformed_mesh.vertex(i).x ==
          doctest::Approx(one_step.deformed_mesh.vertex(i).x).epsilon(1e-14));
  }
  // ...but resampling a spatial family on the deformed mesh does not compose.
  const auto d1 = deform(mesh, VelocityField::dilation(mesh), 0.05);
  const auto d2 = deform(d1.deformed_mesh, VelocityField::dilation(d1.deformed_mesh), 0.03);
  const auto d12 = deform(mesh, VelocityField::dilation(mesh), 0.08);
  CHECK(std::abs(d2.deformed_mesh.vertex(1).x - d12.deformed_mesh.vertex(1).x) > 1e-6);
}

TEST_CASE("deformed mesh volume equals sum of beta |T|") {
  const auto mesh = SimplicialMesh::disk(1.0, 5);
  auto rng = seeded_rng(9u);
  std::vector<Vec2> nodal(mesh.num_vertices());
  for (auto& w : nodal) w = {uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2)};
  const VelocityField v(mesh, nodal);
  const auto rec = deform(mesh, v, 0.1);
  double beta_vol = 0.0;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    beta_vol += rec.element_jacobian_det[t] * mesh.volume(t);
  }
  CHECK(rec.deformed_mesh.total_volume() == doctest::Approx(beta_vol).epsilon(1e-13));
}

TEST_CASE("compactly_supported") {
  const auto mesh = SimplicialMesh::disk(1.0, 6);
  CHECK(compactly_supported(VelocityField::zero(mesh), mesh));
  CHECK(!compactly_supported(VelocityField::dilation(mesh), mesh));

  const auto deep = deep_interior_vertices(mesh);
  REQUIRE(!deep.empty());
  CHECK(compactly_supported(VelocityField::bump(mesh, deep.front(), {1.0, 0.0}), mesh));
  // a bump on a one-ring neighbor of the boundary is not compactly supported
  int near_boundary = -1;
  for (int i = 0; i < mesh.num_vertices() && near_boundary < 0; ++i) {
    if (mesh.vertex_on_boundary(i)) continue;
    for (int j : mesh.vertex_neighbors(i)) {
      if (mesh.vertex_on_boundary(j)) {
        near_boundary = i;
        break;
      }
    }
  }
  REQUIRE(near_boundary >= 0);
  CHECK(!compactly_supported(VelocityField::bump(mesh, near_boundary, {1.0, 0.0}), mesh));
}

TEST_CASE("lipschitz constant of named families") {
  const auto mesh = SimplicialMesh::square(4);
  CHECK(VelocityField::dilation(mesh).lipschitz_constant() == doctest::Approx(1.0));
  CHECK(VelocityField::translation(mesh, {2.0, 1.0}).lipschitz_constant() ==
        doctest::Approx(0.0));
  const Mat2 a{0.0, 0.5, 0.0, 0.0};
  CHECK(VelocityField::affine(mesh, a, {0, 0}).lipschitz_constant() == doctest::Approx(0.5));
}

TEST_CASE("mesh file round trip and consistency check") {
  const auto mesh = SimplicialMesh::disk(1.0, 3);
  const std::string path = "geom_roundtrip.mesh";
  mesh.write_file(path);
  const auto mesh2 = SimplicialMesh::read_file(path);
  CHECK(mesh2.num_vertices() == mesh.num_vertices());
  CHECK(mesh2.num_simplices() == mesh.num_simplices());
  CHECK(mesh2.num_boundary_facets() == mesh.num_boundary_facets());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    CHECK(mesh2.vertex(i).x == mesh.vertex(i).x);
    CHECK(mesh2.vertex(i).y == mesh.vertex(i).y);
  }
  CHECK(mesh2.total_volume() == mesh.total_volume());
  std::remove(path.c_str());

  CHECK_THROWS(SimplicialMesh::read_file("does_not_exist.mesh"));
}

TEST_CASE("velocity spec parsing") {
  const auto mesh = SimplicialMesh::square(3);
  const auto v = build_velocity_from_spec(mesh, "dilation");
  CHECK(v.at_vertex(5).x == mesh.vertex(5).x);
  const auto w = build_velocity_from_spec(mesh, nlohmann::json::parse(R"({"affine":
      {"A": [[0.0, 1.0], [0.0, 0.0]], "b": [0.5, 0.0]}})"));
  CHECK(w.at_vertex(5).x == doctest::Approx(mesh.vertex(5).y + 0.5));
  CHECK_THROWS(build_velocity_from_spec(mesh, "spiral"));
}
