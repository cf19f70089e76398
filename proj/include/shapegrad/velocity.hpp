#pragma once

#include <vector>

#include "shapegrad/linalg.hpp"
#include "shapegrad/mesh.hpp"

namespace shapegrad {

// Piecewise-linear (P1) vector field on a mesh. DV is exactly constant per
// element, so pairings against P0 tensors are exact quadratures.
class VelocityField {
 public:
  VelocityField(const SimplicialMesh& mesh, std::vector<Vec2> nodal);

  static VelocityField zero(const SimplicialMesh& mesh);
  static VelocityField dilation(const SimplicialMesh& mesh);               // V(x) = x
  static VelocityField translation(const SimplicialMesh& mesh, Vec2 dir);  // V(x) = dir
  // Hat field dir * phi_i supported on the one-ring of vertex i.
  static VelocityField bump(const SimplicialMesh& mesh, int vertex, Vec2 dir);
  static VelocityField affine(const SimplicialMesh& mesh, const Mat2& A, Vec2 b);

  const SimplicialMesh& mesh() const { return *mesh_; }
  const std::vector<Vec2>& nodal_values() const { return nodal_; }
  const Vec2& at_vertex(int i) const { return nodal_[i]; }

  Vec2 at_point(int element, const Vec2& x) const;  // P1 interpolation
  Vec2 at_facet_midpoint(const BoundaryFacet& f) const;

  Mat2 element_gradient(int t) const;  // DV on element t

  // max over elements of the operator norm of DV.
  double lipschitz_constant() const;

  // L2 norm of DV.
  double gradient_l2_norm() const;

 private:
  const SimplicialMesh* mesh_;
  std::vector<Vec2> nodal_;
};

// True iff the nodal values vanish on every boundary vertex and on all their
// one-ring neighbors (so every element touching the boundary carries V = 0).
bool compactly_supported(const VelocityField& v, const SimplicialMesh& mesh);

}  // namespace shapegrad
