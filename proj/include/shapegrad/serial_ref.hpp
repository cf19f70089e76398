#pragma once

#include "shapegrad/fem.hpp"
#include "shapegrad/momentum_tensor.hpp"

namespace shapegrad::serial {

// Plain single-loop reference implementations of the parallel kernels, kept
// for correctness tests and the benchmark target.

P0VectorField gradient(const P1Function& u);

double primal_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                     const ScalarIntegrand& g, const P1Function& u);

DiscreteDivergence weak_divergence(const P0VectorField& sigma, ProblemCase c);

double volume_form(const MomentumTensorField& a, const VelocityField& v);

double conservation_max_residual(const MomentumTensorField& a, const SimplicialMesh& mesh);

}  // namespace shapegrad::serial
