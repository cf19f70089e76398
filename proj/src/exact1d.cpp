#include "shapegrad/exact1d.hpp"

#include <algorithm>
#include <stdexcept>

namespace shapegrad {
namespace exact1d {

double m_exact(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("m_exact: a must be > 0");
  return -std::min(2.0, a);
}

double jprime_exact(double v0, double v2) { return std::max(v0 - v2, 0.0); }

double dual_exact(double x) {
  if (x < 0.0 || x > 2.0) throw std::invalid_argument("dual_exact: x outside [0, 2]");
  return -x - 1.0;
}

double relaxed_energy(const P1Function& u) {
  const SimplicialMesh& mesh = *u.mesh;
  return objective_energy(mesh, example_f(), example_g(), u, ProblemCase::RelaxedDirichlet);
}

std::vector<P1Function> relaxed_solution_family(const SimplicialMesh& mesh,
                                                const std::vector<double>& lambdas) {
  if (mesh.dim() != 1) throw std::invalid_argument("relaxed_solution_family: 1D mesh required");
  std::vector<P1Function> family;
  family.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (lambda < 0.0 || lambda > 1.0) {
      throw std::invalid_argument("relaxed_solution_family: lambda outside [0, 1]");
    }
    P1Function u = P1Function::zeros(mesh, ProblemCase::RelaxedDirichlet);
    std::fill(u.dof.begin(), u.dof.end(), lambda);
    family.push_back(std::move(u));
  }
  return family;
}

ConvexIntegrand example_f() { return ConvexIntegrand::abs_norm(1); }

ScalarIntegrand example_g() { return ScalarIntegrand::hinge_one_minus(); }

}  // namespace exact1d
}  // namespace shapegrad
