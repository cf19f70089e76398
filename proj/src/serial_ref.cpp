#include "shapegrad/serial_ref.hpp"

#include <algorithm>
#include <cmath>

namespace shapegrad::serial {

P0VectorField gradient(const P1Function& u) {
  const SimplicialMesh& mesh = *u.mesh;
  P0VectorField g = P0VectorField::zeros(mesh);
  const int vps = mesh.vertices_per_simplex();
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const auto& s = mesh.simplex(t);
    Vec2 gz{0.0, 0.0};
    for (int k = 0; k < vps; ++k) gz += u.dof[s[k]] * mesh.grad_phi(t, k);
    g.value[t] = gz;
  }
  return g;
}

double primal_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                     const ScalarIntegrand& g, const P1Function& u) {
  const P0VectorField grad_u = serial::gradient(u);
  const int vps = mesh.vertices_per_simplex();
  double e = 0.0;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const auto& s = mesh.simplex(t);
    double gavg = 0.0;
    for (int k = 0; k < vps; ++k) gavg += g.eval(u.dof[s[k]]);
    gavg /= vps;
    e += mesh.volume(t) * (f.eval(grad_u.value[t]) + gavg);
  }
  return e;
}

DiscreteDivergence weak_divergence(const P0VectorField& sigma, ProblemCase c) {
  const SimplicialMesh& mesh = *sigma.mesh;
  DiscreteDivergence d;
  d.mesh = &mesh;
  d.value.assign(mesh.num_vertices(), 0.0);
  d.active.assign(mesh.num_vertices(), 0);
  const int vps = mesh.vertices_per_simplex();
  std::vector<double> flux(mesh.num_vertices(), 0.0);
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const auto& s = mesh.simplex(t);
    for (int k = 0; k < vps; ++k) {
      flux[s[k]] += mesh.volume(t) * dot(sigma.value[t], mesh.grad_phi(t, k));
    }
  }
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (c == ProblemCase::Dirichlet && mesh.vertex_on_boundary(i)) continue;
    d.value[i] = -flux[i] / mesh.lumped_mass(i);
    d.active[i] = 1;
  }
  return d;
}

double volume_form(const MomentumTensorField& a, const VelocityField& v) {
  const SimplicialMesh& mesh = *a.mesh;
  double s = 0.0;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    s += mesh.volume(t) * ddot(a.value[t], v.element_gradient(t));
  }
  return s;
}

double conservation_max_residual(const MomentumTensorField& a, const SimplicialMesh& mesh) {
  const int vps = mesh.vertices_per_simplex();
  double mx = 0.0;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (mesh.vertex_on_boundary(i)) continue;
    bool clear = true;
    for (int j : mesh.vertex_neighbors(i)) {
      if (mesh.vertex_on_boundary(j)) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    for (int dir = 0; dir < mesh.dim(); ++dir) {
      const Vec2 e = dir == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
      double vf = 0.0, dv2 = 0.0;
      for (int t : mesh.vertex_elements(i)) {
        const auto& s = mesh.simplex(t);
        for (int l = 0; l < vps; ++l) {
          if (s[l] == i) {
            const Vec2 gp = mesh.grad_phi(t, l);
            vf += mesh.volume(t) * ddot(a.value[t], outer(e, gp));
            dv2 += mesh.volume(t) * norm2(gp);
            break;
          }
        }
      }
      if (dv2 > 0.0) mx = std::max(mx, std::abs(vf) / std::sqrt(dv2));
    }
  }
  return mx;
}

}  // namespace shapegrad::serial
