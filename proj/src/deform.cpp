#include "shapegrad/deform.hpp"

#include <stdexcept>
#include <string>

namespace shapegrad {

DeformationRecord deform(const SimplicialMesh& mesh, const VelocityField& v, double eps) {
  if (eps < 0.0) throw std::invalid_argument("deform: eps must be >= 0");
  if (eps > 0.0) {
    const double lip = v.lipschitz_constant();
    if (eps * lip >= 1.0) {
      throw std::invalid_argument("deform: eps * Lip(V) = " + std::to_string(eps * lip) +
                                  " >= 1, map may fail to be bi-Lipschitz");
    }
  }

  std::vector<Vec2> verts(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    verts[i] = mesh.vertex(i) + eps * v.at_vertex(i);
  }

  std::vector<Mat2> jac(mesh.num_simplices());
  std::vector<double> beta(mesh.num_simplices());
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    Mat2 j = identity2() + eps * v.element_gradient(t);
    if (mesh.dim() == 1) {
      j.d = 1.0;  // 1D maps act on x only
      j.b = j.c = 0.0;
    }
    jac[t] = j;
    beta[t] = det(j);
    if (!(beta[t] > 0.0)) {
      throw std::runtime_error("deform: element " + std::to_string(t) +
                               " degenerates (det = " + std::to_string(beta[t]) + ")");
    }
  }

  SimplicialMesh deformed(mesh.dim(), std::move(verts),
                          std::vector<std::array<int, 3>>(mesh.simplices()));
  return DeformationRecord{eps, std::move(deformed), std::move(jac), std::move(beta)};
}

}  // namespace shapegrad
