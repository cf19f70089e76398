#pragma once

#include <vector>

#include "shapegrad/cases.hpp"
#include "shapegrad/extended_real.hpp"
#include "shapegrad/integrand.hpp"
#include "shapegrad/linalg.hpp"
#include "shapegrad/mesh.hpp"

namespace shapegrad {

// Scalar P1 finite element function. In the Dirichlet case masked dofs are
// held at exactly zero.
struct P1Function {
  const SimplicialMesh* mesh = nullptr;
  std::vector<double> dof;
  std::vector<char> dirichlet_mask;

  static P1Function zeros(const SimplicialMesh& m, ProblemCase c);
  void apply_mask();
  double value_at(int element, const Vec2& x) const;
};

// Element-constant vector field (gradients and dual fields).
struct P0VectorField {
  const SimplicialMesh* mesh = nullptr;
  std::vector<Vec2> value;

  static P0VectorField zeros(const SimplicialMesh& m);
};

// Nodal values d_i of the lumped weak divergence, with the set of nodes where
// the defining identity is imposed (interior nodes in case D; all nodes in
// cases N/relaxed, where boundary rows absorb the flux and encode the weak
// normal condition).
struct DiscreteDivergence {
  const SimplicialMesh* mesh = nullptr;
  std::vector<double> value;
  std::vector<char> active;
};

std::vector<char> dirichlet_mask_for(const SimplicialMesh& mesh, ProblemCase c);

// Exact per-element gradient of a P1 function.
P0VectorField gradient(const P1Function& u);

// Interpolate a callable u(x) at the vertices.
P1Function interpolate(const SimplicialMesh& mesh, ProblemCase c,
                       const std::function<double(const Vec2&)>& fn);

// sum_T |T| f(grad u|_T) + sum_T |T|/(d+1) sum_{v in T} g(u_v).
// Exact for the f-term (P0 gradients); vertex-lumped quadrature for g.
double primal_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                     const ScalarIntegrand& g, const P1Function& u);

// sum over boundary vertices of |u_b| (the relaxed-case penalty).
double relaxed_boundary_penalty(const SimplicialMesh& mesh, const P1Function& u);

// primal_energy plus the boundary penalty in the relaxed case. This is the
// objective the solver minimizes.
double objective_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                        const ScalarIntegrand& g, const P1Function& u, ProblemCase c);

// Nodal d_i with m_i d_i = -sum_T |T| sigma_T . grad phi_i on the active set.
DiscreteDivergence weak_divergence(const P0VectorField& sigma, ProblemCase c);

struct DualEnergyParts {
  ExtendedReal fstar_part;
  ExtendedReal gstar_part;
  ExtendedReal boundary_part;    // relaxed case only, else 0
  double max_domain_snap = 0.0;  // largest distance snapped onto dom g*
  ExtendedReal total() const { return fstar_part + gstar_part + boundary_part; }
};

// sum_T |T| f*(sigma_T) + sum_i m_i g*(d_i) over the active nodes, +inf when
// any conjugate is +inf. Arguments of indicator-type conjugates are snapped
// onto their domain within snap_tol (the snapped distance is reported);
// exact-arithmetic membership is not attainable in floating point.
DualEnergyParts dual_energy_parts(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                                  const ScalarIntegrand& g, const P0VectorField& sigma,
                                  ProblemCase c, double snap_tol = 1e-8);

ExtendedReal dual_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                         const ScalarIntegrand& g, const P0VectorField& sigma,
                         ProblemCase c, double snap_tol = 1e-8);

// min over |t| <= 1 of m g*((xi - t)/m): conjugate of a relaxed boundary term
// m g(.) + |.|, with xi the nodal flux m d. Used by the relaxed dual energy
// and its transported variant.
ExtendedReal relaxed_boundary_conjugate(const ScalarIntegrand& g, double xi, double m,
                                        double snap_tol);

}  // namespace shapegrad
