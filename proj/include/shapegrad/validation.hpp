#pragma once

#include <string>
#include <vector>

#include "shapegrad/deform.hpp"
#include "shapegrad/momentum_tensor.hpp"
#include "shapegrad/solver.hpp"

namespace shapegrad {

struct QuotientTable {
  std::vector<double> epsilons;  // descending
  std::vector<double> q_values;
  double extrapolated = 0.0;     // Richardson from the two smallest epsilons
  double observed_order = 0.0;   // slope of |q - extrapolated| vs eps (log-log)
  bool noise_flagged = false;    // deviations below solver noise or non-monotone
};

// One-sided quotient (J(Omega_eps) - J(Omega)) / eps with J = -min energy,
// both problems solved with identical options so solver bias cancels to
// first order.
double fd_quotient(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                   const ScalarIntegrand& g, ProblemCase c, const VelocityField& v,
                   double eps, const SolverOptions& opts = {});

QuotientTable fd_sweep(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                       const ScalarIntegrand& g, ProblemCase c, const VelocityField& v,
                       const std::vector<double>& eps_schedule, const SolverOptions& opts = {});

// Richardson value from a short schedule (>= 1 entry; two smallest are used,
// a single entry is returned as is).
double fd_richardson(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                     const ScalarIntegrand& g, ProblemCase c, const VelocityField& v,
                     std::vector<double> eps_schedule, const SolverOptions& opts = {});

struct ConservationReport {
  double max_residual = 0.0;
  double mean_residual = 0.0;
  int probe_count = 0;
  std::string normalization = "volume_form divided by ||DV||_L2 per probe";
  std::vector<double> residuals;
};

// Residuals |volume_form(A, W)| / ||DW||_L2 over probe fields. Default probes
// are all hat fields e_k phi_i whose support clears the boundary one-ring
// (compactly supported in the discrete sense).
ConservationReport conservation_residual(const MomentumTensorField& a,
                                         const SimplicialMesh& mesh,
                                         const std::vector<VelocityField>* probes = nullptr);

// sum_T |T| beta_T [ f(DPsi^{-T} grad u|_T) + lumped g(u) ]: the energy of the
// pushforward of u onto the deformed mesh, evaluated on the original mesh.
// Matches primal_energy on the deformed mesh exactly (per-element affine
// change of variables is exact for P1/P0 data).
double transported_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                          const ScalarIntegrand& g, const P1Function& u,
                          const VelocityField& v, double eps);

// Mirror for the dual energy with the Piola transform
// sigma -> beta^{-1} DPsi sigma; nodal fluxes are invariant, masses transform
// by beta.
ExtendedReal transported_dual_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                                     const ScalarIntegrand& g, const P0VectorField& sigma,
                                     const VelocityField& v, double eps, ProblemCase c,
                                     double snap_tol = 1e-8);

// Piola pushforward of an element field onto the deformed mesh.
P0VectorField piola_pushforward(const DeformationRecord& rec, const P0VectorField& sigma);

struct CrossCheckResult {
  bool pass = true;
  std::string worst_pair;
  double worst_diff = 0.0;
  double worst_tol = 0.0;
  std::vector<std::string> lines;
};

// Pairwise agreement of every present value in the report, each pair checked
// against tol_rel * max(|a|, |b|, tol_floor).
CrossCheckResult cross_check(const DerivativeReport& report);

std::string quotient_table_csv(const QuotientTable& table);

}  // namespace shapegrad
