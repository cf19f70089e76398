#pragma once

#include <vector>

#include "shapegrad/cases.hpp"
#include "shapegrad/fem.hpp"
#include "shapegrad/integrand.hpp"
#include "shapegrad/mesh.hpp"

namespace shapegrad {

struct SolverOptions {
  double tol = 1e-10;      // CG relative residual (quadratic problems)
  double gap_tol = 1e-6;   // duality gap per unit volume (first-order solver)
  long max_iter = 200000;  // first-order iteration budget
  std::vector<double> mu_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double dom_snap_tol = 1e-8;       // conjugate-domain membership tolerance
  bool check_multiplicity = false;  // re-solve from perturbed start, compare
};

enum class SolveStatus { Converged, BudgetExhausted };

struct PrimalSolution {
  P1Function u;
  double energy = 0.0;  // objective recomputed at u (relaxed penalty included)
  long iterations = 0;
  double grad_norm_or_gap = 0.0;
  double smoothing_mu_final = 0.0;
  SolveStatus status = SolveStatus::Converged;
  std::vector<double> stage_energies;  // nonincreasing across mu stages
  bool suspected_multiplicity = false;
};

struct DualField {
  P0VectorField sigma;
  DiscreteDivergence div_h;
  double membership_residual = 0.0;   // max element Fenchel gap of (grad u, sigma)
  double divergence_residual = 0.0;   // max nodal distance of d_i to its target set
  long iterations = 0;
};

// Minimize the discrete energy from u = 0. Quadratic configurations go
// through preconditioned CG; everything else through accelerated proximal
// gradient with Moreau smoothing of f and mu-continuation, terminating when
// the reconstructed duality gap per unit volume drops below gap_tol.
PrimalSolution solve_primal(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                            const ScalarIntegrand& g, ProblemCase c,
                            const SolverOptions& opts = {});

// Element-wise selection of sigma within the subdifferential sets of f at
// grad u (the plastic-regime sets are kept as full balls), chosen by
// projected gradient to minimize the weighted distance of the lumped weak
// divergence to the nodal sets dg(u_i). Residuals are reported, not assumed.
DualField reconstruct_dual(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                           const ScalarIntegrand& g, const PrimalSolution& primal,
                           ProblemCase c, const SolverOptions& opts = {});

// objective_energy(u) + dual_energy(sigma); >= 0 up to the domain-snap slack,
// 0 exactly at discrete optimal pairs. +inf when sigma is infeasible.
double duality_gap(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                   const ScalarIntegrand& g, const P1Function& u, const P0VectorField& sigma,
                   ProblemCase c, double snap_tol = 1e-8);

}  // namespace shapegrad
