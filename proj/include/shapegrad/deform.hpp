#pragma once

#include <vector>

#include "shapegrad/mesh.hpp"
#include "shapegrad/velocity.hpp"

namespace shapegrad {

// Deformation x -> x + eps V(x) of a mesh, with the per-element Jacobian
// DPsi = I + eps DV and its determinant beta. Connectivity is unchanged.
struct DeformationRecord {
  double epsilon = 0.0;
  SimplicialMesh deformed_mesh;
  std::vector<Mat2> element_jacobian;
  std::vector<double> element_jacobian_det;  // beta per element
};

// Requires eps * Lip(V) < 1 (bi-Lipschitz range); throws naming the first
// element whose deformed measure is nonpositive.
DeformationRecord deform(const SimplicialMesh& mesh, const VelocityField& v, double eps);

}  // namespace shapegrad
