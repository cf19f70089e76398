#include "shapegrad/velocity.hpp"

#include <stdexcept>

#include "shapegrad/parallel.hpp"

namespace shapegrad {

VelocityField::VelocityField(const SimplicialMesh& mesh, std::vector<Vec2> nodal)
    : mesh_(&mesh), nodal_(std::move(nodal)) {
  if (static_cast<int>(nodal_.size()) != mesh.num_vertices()) {
    throw std::invalid_argument("velocity field size does not match mesh");
  }
}

VelocityField VelocityField::zero(const SimplicialMesh& mesh) {
  return VelocityField(mesh, std::vector<Vec2>(mesh.num_vertices()));
}

VelocityField VelocityField::dilation(const SimplicialMesh& mesh) {
  return VelocityField(mesh, mesh.vertices());
}

VelocityField VelocityField::translation(const SimplicialMesh& mesh, Vec2 dir) {
  return VelocityField(mesh, std::vector<Vec2>(mesh.num_vertices(), dir));
}

VelocityField VelocityField::bump(const SimplicialMesh& mesh, int vertex, Vec2 dir) {
  if (vertex < 0 || vertex >= mesh.num_vertices()) {
    throw std::invalid_argument("bump vertex out of range");
  }
  std::vector<Vec2> nodal(mesh.num_vertices());
  nodal[vertex] = dir;
  return VelocityField(mesh, std::move(nodal));
}

VelocityField VelocityField::affine(const SimplicialMesh& mesh, const Mat2& A, Vec2 b) {
  std::vector<Vec2> nodal(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) nodal[i] = matvec(A, mesh.vertex(i)) + b;
  return VelocityField(mesh, std::move(nodal));
}

Vec2 VelocityField::at_point(int element, const Vec2& x) const {
  const auto& s = mesh_->simplex(element);
  // Barycentric interpolation via the cached hat gradients: the P1 basis on
  // the element is phi_k(x) = phi_k(c) + grad_phi_k . (x - c).
  const int vps = mesh_->vertices_per_simplex();
  Vec2 value{0.0, 0.0};
  const Vec2 c = mesh_->centroid(element);
  for (int k = 0; k < vps; ++k) {
    const double phi = 1.0 / vps + dot(mesh_->grad_phi(element, k), x - c);
    value += phi * nodal_[s[k]];
  }
  return value;
}

Vec2 VelocityField::at_facet_midpoint(const BoundaryFacet& f) const {
  if (f.v[1] < 0) return nodal_[f.v[0]];
  return 0.5 * (nodal_[f.v[0]] + nodal_[f.v[1]]);
}

Mat2 VelocityField::element_gradient(int t) const {
  const auto& s = mesh_->simplex(t);
  Mat2 g;
  for (int k = 0; k < mesh_->vertices_per_simplex(); ++k) {
    g += outer(nodal_[s[k]], mesh_->grad_phi(t, k));
  }
  return g;
}

double VelocityField::lipschitz_constant() const {
  double lip = 0.0;
  for (int t = 0; t < mesh_->num_simplices(); ++t) {
    lip = std::max(lip, spectral_norm(element_gradient(t)));
  }
  return lip;
}

double VelocityField::gradient_l2_norm() const {
  const double s = par::block_sum(mesh_->num_simplices(), [&](std::size_t t) {
    return mesh_->volume(static_cast<int>(t)) * frob2(element_gradient(static_cast<int>(t)));
  });
  return std::sqrt(s);
}

bool compactly_supported(const VelocityField& v, const SimplicialMesh& mesh) {
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (!mesh.vertex_on_boundary(i)) continue;
    if (norm2(v.at_vertex(i)) != 0.0) return false;
    for (int j : mesh.vertex_neighbors(i)) {
      if (norm2(v.at_vertex(j)) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace shapegrad
