#include "shapegrad/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "shapegrad/parallel.hpp"

namespace shapegrad {

std::vector<char> dirichlet_mask_for(const SimplicialMesh& mesh, ProblemCase c) {
  std::vector<char> mask(mesh.num_vertices(), 0);
  if (c == ProblemCase::Dirichlet) {
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      mask[i] = mesh.vertex_on_boundary(i) ? 1 : 0;
    }
  }
  return mask;
}

P1Function P1Function::zeros(const SimplicialMesh& m, ProblemCase c) {
  P1Function u;
  u.mesh = &m;
  u.dof.assign(m.num_vertices(), 0.0);
  u.dirichlet_mask = dirichlet_mask_for(m, c);
  return u;
}

void P1Function::apply_mask() {
  if (dirichlet_mask.empty()) return;
  for (std::size_t i = 0; i < dof.size(); ++i) {
    if (dirichlet_mask[i]) dof[i] = 0.0;
  }
}

double P1Function::value_at(int element, const Vec2& x) const {
  const auto& s = mesh->simplex(element);
  const int vps = mesh->vertices_per_simplex();
  const Vec2 c = mesh->centroid(element);
  double v = 0.0;
  for (int k = 0; k < vps; ++k) {
    v += dof[s[k]] * (1.0 / vps + dot(mesh->grad_phi(element, k), x - c));
  }
  return v;
}

P0VectorField P0VectorField::zeros(const SimplicialMesh& m) {
  P0VectorField f;
  f.mesh = &m;
  f.value.assign(m.num_simplices(), Vec2{});
  return f;
}

P0VectorField gradient(const P1Function& u) {
  const SimplicialMesh& mesh = *u.mesh;
  P0VectorField g = P0VectorField::zeros(mesh);
  const int vps = mesh.vertices_per_simplex();
  par::parallel_for(mesh.num_simplices(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const auto& s = mesh.simplex(t);
    Vec2 gz{0.0, 0.0};
    for (int k = 0; k < vps; ++k) gz += u.dof[s[k]] * mesh.grad_phi(t, k);
    g.value[t] = gz;
  });
  return g;
}

P1Function interpolate(const SimplicialMesh& mesh, ProblemCase c,
                       const std::function<double(const Vec2&)>& fn) {
  P1Function u = P1Function::zeros(mesh, c);
  for (int i = 0; i < mesh.num_vertices(); ++i) u.dof[i] = fn(mesh.vertex(i));
  u.apply_mask();
  return u;
}

double primal_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                     const ScalarIntegrand& g, const P1Function& u) {
  if (f.dim() != mesh.dim()) throw std::invalid_argument("integrand/mesh dimension mismatch");
  const int vps = mesh.vertices_per_simplex();
  const P0VectorField grad_u = gradient(u);
  return par::block_sum(mesh.num_simplices(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const auto& s = mesh.simplex(t);
    double gavg = 0.0;
    for (int k = 0; k < vps; ++k) gavg += g.eval(u.dof[s[k]]);
    gavg /= vps;
    return mesh.volume(t) * (f.eval(grad_u.value[t]) + gavg);
  });
}

double relaxed_boundary_penalty(const SimplicialMesh& mesh, const P1Function& u) {
  if (mesh.dim() != 1) {
    throw std::invalid_argument("relaxed boundary penalty is defined for 1D meshes only");
  }
  double s = 0.0;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (mesh.vertex_on_boundary(i)) s += std::abs(u.dof[i]);
  }
  return s;
}

double objective_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                        const ScalarIntegrand& g, const P1Function& u, ProblemCase c) {
  double e = primal_energy(mesh, f, g, u);
  if (c == ProblemCase::RelaxedDirichlet) e += relaxed_boundary_penalty(mesh, u);
  return e;
}

DiscreteDivergence weak_divergence(const P0VectorField& sigma, ProblemCase c) {
  const SimplicialMesh& mesh = *sigma.mesh;
  DiscreteDivergence d;
  d.mesh = &mesh;
  d.value.assign(mesh.num_vertices(), 0.0);
  d.active.assign(mesh.num_vertices(), 0);
  const int vps = mesh.vertices_per_simplex();
  par::parallel_for(mesh.num_vertices(), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (c == ProblemCase::Dirichlet && mesh.vertex_on_boundary(i)) return;
    double flux = 0.0;
    for (int t : mesh.vertex_elements(i)) {
      const auto& s = mesh.simplex(t);
      for (int k = 0; k < vps; ++k) {
        if (s[k] == i) {
          flux += mesh.volume(t) * dot(sigma.value[t], mesh.grad_phi(t, k));
          break;
        }
      }
    }
    d.value[i] = -flux / mesh.lumped_mass(i);
    d.active[i] = 1;
  });
  return d;
}

// Convex in t; golden-section search on the feasible t-interval.
ExtendedReal relaxed_boundary_conjugate(const ScalarIntegrand& g, double xi, double m,
                                        double snap_tol) {
  const auto dom = g.conjugate_domain();
  double tlo = -1.0, thi = 1.0;
  if (std::isfinite(dom.hi)) tlo = std::max(tlo, xi - m * dom.hi);
  if (std::isfinite(dom.lo)) thi = std::min(thi, xi - m * dom.lo);
  if (tlo > thi + snap_tol) return ExtendedReal::infinity();
  if (tlo > thi) tlo = thi = 0.5 * (tlo + thi);
  const auto val = [&](double t) {
    const ExtendedReal v = g.conjugate_snapped((xi - t) / m, snap_tol / std::max(m, 1e-30));
    return v.is_finite() ? m * v.value() : std::numeric_limits<double>::infinity();
  };
  constexpr double kGolden = 0.6180339887498949;
  double a = tlo, b = thi;
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = val(x1), f2 = val(x2);
  for (int it = 0; it < 120 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = val(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = val(x2);
    }
  }
  const double best = std::min({val(a), f1, f2, val(b)});
  if (!std::isfinite(best)) return ExtendedReal::infinity();
  return best;
}

DualEnergyParts dual_energy_parts(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                                  const ScalarIntegrand& g, const P0VectorField& sigma,
                                  ProblemCase c, double snap_tol) {
  if (f.dim() != mesh.dim()) throw std::invalid_argument("integrand/mesh dimension mismatch");
  DualEnergyParts parts;

  // f* part. AbsNorm is the one indicator-type f*; membership |sigma|<=1 is
  // snapped like the g* domains.
  if (f.kind() == ConvexKind::AbsNorm) {
    parts.fstar_part = 0.0;
    for (const Vec2& s : sigma.value) {
      if (norm(s) > 1.0 + snap_tol) {
        parts.fstar_part = ExtendedReal::infinity();
        break;
      }
    }
  } else {
    parts.fstar_part = par::block_sum(mesh.num_simplices(), [&](std::size_t t) {
      return mesh.volume(static_cast<int>(t)) *
             f.conjugate(sigma.value[static_cast<int>(t)]).value();
    });
  }

  const DiscreteDivergence d = weak_divergence(sigma, c);
  const auto dom = g.conjugate_domain();

  bool gstar_infinite = false;
  double max_snap = 0.0;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (!d.active[i]) continue;
    if (c == ProblemCase::RelaxedDirichlet && mesh.vertex_on_boundary(i)) continue;
    const double clamped = std::clamp(d.value[i], dom.lo, dom.hi);
    const double dist = std::abs(clamped - d.value[i]);
    max_snap = std::max(max_snap, dist);
    if (dist > snap_tol) gstar_infinite = true;
  }
  parts.max_domain_snap = max_snap;
  if (gstar_infinite) {
    parts.gstar_part = ExtendedReal::infinity();
  } else {
    parts.gstar_part = par::block_sum(mesh.num_vertices(), [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      if (!d.active[i]) return 0.0;
      if (c == ProblemCase::RelaxedDirichlet && mesh.vertex_on_boundary(i)) return 0.0;
      const double clamped = std::clamp(d.value[i], dom.lo, dom.hi);
      return mesh.lumped_mass(i) * g.conjugate(clamped).value();
    });
  }

  if (c == ProblemCase::RelaxedDirichlet) {
    ExtendedReal b = 0.0;
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      if (!mesh.vertex_on_boundary(i)) continue;
      b += relaxed_boundary_conjugate(g, mesh.lumped_mass(i) * d.value[i],
                                      mesh.lumped_mass(i), snap_tol);
    }
    parts.boundary_part = b;
  } else {
    parts.boundary_part = 0.0;
  }
  return parts;
}

ExtendedReal dual_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                         const ScalarIntegrand& g, const P0VectorField& sigma,
                         ProblemCase c, double snap_tol) {
  return dual_energy_parts(mesh, f, g, sigma, c, snap_tol).total();
}

}  // namespace shapegrad
