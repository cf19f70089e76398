#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "shapegrad/exact1d.hpp"
#include "shapegrad/solver.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"

using namespace shapegrad;
using namespace shapegrad::testsupport;

TEST_CASE("closed-form values") {
  CHECK(exact1d::m_exact(0.5) == -0.5);
  CHECK(exact1d::m_exact(1.0) == -1.0);
  CHECK(exact1d::m_exact(2.0) == -2.0);
  CHECK(exact1d::m_exact(3.0) == -2.0);
  CHECK_THROWS_AS(exact1d::m_exact(0.0), std::invalid_argument);
  CHECK_THROWS_AS(exact1d::m_exact(-1.0), std::invalid_argument);

  CHECK(exact1d::jprime_exact(1.0, 0.0) == 1.0);
  CHECK(exact1d::jprime_exact(0.0, 1.0) == 0.0);
  CHECK(exact1d::jprime_exact(0.7, 0.7) == 0.0);

  CHECK(exact1d::dual_exact(0.0) == -1.0);
  CHECK(exact1d::dual_exact(2.0) == -3.0);
  CHECK_THROWS_AS(exact1d::dual_exact(2.5), std::invalid_argument);
  // slope is -1, inside the [-1, 0] constraint of the dual derivation
  const double slope = (exact1d::dual_exact(1.5) - exact1d::dual_exact(0.5)) / 1.0;
  CHECK(slope == -1.0);
}

TEST_CASE("relaxed energy of canonical competitors") {
  const auto mesh1 = SimplicialMesh::interval(0.0, 1.0, 64);
  const auto z = P1Function::zeros(mesh1, ProblemCase::RelaxedDirichlet);
  CHECK(exact1d::relaxed_energy(z) == doctest::Approx(1.0).epsilon(1e-13));

  const auto mesh2 = SimplicialMesh::interval(0.0, 2.0, 64);
  auto one = P1Function::zeros(mesh2, ProblemCase::RelaxedDirichlet);
  std::fill(one.dof.begin(), one.dof.end(), 1.0);
  CHECK(exact1d::relaxed_energy(one) == doctest::Approx(2.0).epsilon(1e-13));

  for (double lambda : {0.0, 0.5, 1.0}) {
    const auto fam = exact1d::relaxed_solution_family(mesh2, {lambda});
    CHECK(exact1d::relaxed_energy(fam.front()) == doctest::Approx(2.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS(exact1d::relaxed_solution_family(mesh2, {1.5}), std::invalid_argument);
  CHECK_THROWS_AS(exact1d::relaxed_solution_family(mesh2, {-0.1}), std::invalid_argument);
}

TEST_CASE("family members are constants and grids produce one function each") {
  const auto mesh = SimplicialMesh::interval(0.0, 2.0, 32);
  const auto fam = exact1d::relaxed_solution_family(mesh, {0.0, 0.5, 1.0});
  REQUIRE(fam.size() == 3);
  for (double u : fam[0].dof) CHECK(u == 0.0);
  for (double u : fam[2].dof) CHECK(u == 1.0);
}

TEST_CASE("discrete relaxed minimization converges to m_exact at rate O(h)") {
  for (double a : {1.0, 2.0, 3.0}) {
    double err_prev = 1e300;
    for (int n : {50, 100, 200}) {
      const auto mesh = SimplicialMesh::interval(0.0, a, n);
      const auto sol = solve_primal(mesh, exact1d::example_f(), exact1d::example_g(),
                                    ProblemCase::RelaxedDirichlet);
      const double err = std::abs(-sol.energy - exact1d::m_exact(a));
      CHECK(err <= 2.0 * a / n);
      CHECK(err <= err_prev + 1e-9);
      err_prev = err;
    }
  }
}

TEST_CASE("binary-chain oracle equals the closed form for flat minimizers") {
  for (double a : {0.5, 1.0, 1.7, 2.0, 2.4, 3.0}) {
    const auto mesh = SimplicialMesh::interval(0.0, a, 160);
    CHECK(relaxed_chain_min(mesh) == doctest::Approx(-exact1d::m_exact(a)).epsilon(1e-12));
  }
}

TEST_CASE("nonlinearity witness of the one-sided derivative") {
  auto rng = seeded_rng(91u);
  for (int k = 0; k < 50; ++k) {
    const double v0 = uniform(rng, -2, 2);
    double v2 = uniform(rng, -2, 2);
    if (v0 == v2) v2 += 0.5;
    CHECK(exact1d::jprime_exact(v0, v2) + exact1d::jprime_exact(-v0, -v2) > 0.0);
  }
  CHECK(exact1d::jprime_exact(0.3, 0.3) + exact1d::jprime_exact(-0.3, -0.3) == 0.0);
  // the paper's one-sided slopes of m at a = 2: left -1, right 0
  const double dm_left = (exact1d::m_exact(2.0) - exact1d::m_exact(2.0 - 1e-9)) / 1e-9;
  const double dm_right = (exact1d::m_exact(2.0 + 1e-9) - exact1d::m_exact(2.0)) / 1e-9;
  CHECK(dm_left == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK(dm_right == doctest::Approx(0.0));
}
