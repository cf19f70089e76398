#pragma once

#include <vector>

#include "shapegrad/fem.hpp"
#include "shapegrad/mesh.hpp"

namespace shapegrad {
namespace exact1d {

// Closed-form values of the 1D relaxed problem on (0, a):
//   minimize  int_0^a [ |u'| + (1 - u)_+ ]  +  |u(0)| + |u(a)|.

// m(a) = -min(2, a); the value of the associated shape functional.
double m_exact(double a);

// Right shape derivative at a = 2 in direction V: (V(0) - V(2))_+.
// One-sided and not linear in V.
double jprime_exact(double v0, double v2);

// The dual solution as printed for a = 2: sigma(x) = -x - 1 on [0, 2]. Its
// slope -1 lies in [-1, 0]; note it exceeds the |sigma| <= 1 box away from 0
// (the value sigma(2) - sigma(0) = -2 is what the derivation uses).
double dual_exact(double x);

// Relaxed energy of a P1 function on a 1D mesh (boundary penalty included).
double relaxed_energy(const P1Function& u);

// The constant candidates u_lambda = lambda, lambda in [0, 1]; all optimal at
// a = 2 with relaxed energy 2.
std::vector<P1Function> relaxed_solution_family(const SimplicialMesh& mesh,
                                                const std::vector<double>& lambdas);

// The integrands of the example.
ConvexIntegrand example_f();   // |.| in 1D
ScalarIntegrand example_g();   // (1 - u)_+

}  // namespace exact1d
}  // namespace shapegrad
