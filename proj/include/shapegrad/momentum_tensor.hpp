#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shapegrad/fem.hpp"
#include "shapegrad/solver.hpp"
#include "shapegrad/velocity.hpp"

namespace shapegrad {

// Per-element energy-momentum tensor
//   A_T = grad u_T (x) sigma_T - [f(grad u_T) + gbar_T] I
// with gbar_T the vertex-lumped element average of g(u), matching the
// quadrature of the primal energy.
struct MomentumTensorField {
  const SimplicialMesh* mesh = nullptr;
  std::vector<Mat2> value;
};

MomentumTensorField tensor_A(const P1Function& u, const P0VectorField& sigma,
                             const ConvexIntegrand& f, const ScalarIntegrand& g);

// sum_T |T| A_T : DV_T. Exact quadrature: both factors are element-constant.
double volume_form(const MomentumTensorField& a, const VelocityField& v);

struct MinMaxResult {
  double value = 0.0;    // sup over u-candidates of inf over sigma-candidates
  double sup_inf = 0.0;
  double inf_sup = 0.0;  // always >= sup_inf
  int u_index = -1;
  int sigma_index = -1;
};

// Evaluates the pairing matrix volume_form(A(u_i, sigma_j), V) over finite
// candidate lists and returns the sup-inf value with the attaining pair.
MinMaxResult minmax_form(const std::vector<PrimalSolution>& u_candidates,
                         const std::vector<DualField>& sigma_candidates,
                         const ConvexIntegrand& f, const ScalarIntegrand& g,
                         const VelocityField& v);

// Wrap explicit fields as candidates for minmax_form.
PrimalSolution as_primal_candidate(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                                   const ScalarIntegrand& g, ProblemCase c, P1Function u);
DualField as_dual_candidate(const ScalarIntegrand& g, const P1Function& u, ProblemCase c,
                            P0VectorField sigma);

// Boundary trace form
//   case D: sum_facets w * f*(sigma)|_facet * (V.n)
//   case N: sum_facets w * [f(grad u)|_facet + g(u(midpoint))] * (V.n)
// The facet value of the element-constant density is obtained by linear
// extrapolation in the inward-normal offset over the adjacent element and its
// edge neighbors (the discrete inward-limit trace); a lone element falls back
// to its own value.
double boundary_form(const P1Function& u, const P0VectorField& sigma,
                     const ConvexIntegrand& f, const ScalarIntegrand& g,
                     const VelocityField& v, ProblemCase c);

struct DerivativeReport {
  double J_primal = 0.0;  // -E(u): lower bound for the discrete J
  double J_dual = 0.0;    // dual energy of the reconstructed sigma: upper bound
  std::optional<double> volume_form_value;
  std::optional<double> boundary_form_value;
  std::optional<double> minmax_value;
  std::optional<double> fd_extrapolated;
  double tol_rel = 0.02;
  double tol_floor = 1e-8;
  std::string problem_case = "D";
};

}  // namespace shapegrad
