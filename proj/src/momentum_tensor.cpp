#include "shapegrad/momentum_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "shapegrad/parallel.hpp"

namespace shapegrad {

MomentumTensorField tensor_A(const P1Function& u, const P0VectorField& sigma,
                             const ConvexIntegrand& f, const ScalarIntegrand& g) {
  if (u.mesh != sigma.mesh) throw std::invalid_argument("tensor_A: fields on different meshes");
  const SimplicialMesh& mesh = *u.mesh;
  const P0VectorField grad_u = gradient(u);
  const int vps = mesh.vertices_per_simplex();

  MomentumTensorField a;
  a.mesh = &mesh;
  a.value.resize(mesh.num_simplices());
  par::parallel_for(mesh.num_simplices(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const auto& s = mesh.simplex(t);
    double gbar = 0.0;
    for (int k = 0; k < vps; ++k) gbar += g.eval(u.dof[s[k]]);
    gbar /= vps;
    const double density = f.eval(grad_u.value[t]) + gbar;
    Mat2 m = outer(grad_u.value[t], sigma.value[t]);
    m.a -= density;
    if (mesh.dim() == 2) m.d -= density;  // identity restricted to the active dims
    a.value[t] = m;
  });
  return a;
}

double volume_form(const MomentumTensorField& a, const VelocityField& v) {
  if (a.mesh != &v.mesh()) throw std::invalid_argument("volume_form: mesh mismatch");
  const SimplicialMesh& mesh = *a.mesh;
  return par::block_sum(mesh.num_simplices(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    return mesh.volume(t) * ddot(a.value[t], v.element_gradient(t));
  });
}

PrimalSolution as_primal_candidate(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                                   const ScalarIntegrand& g, ProblemCase c, P1Function u) {
  PrimalSolution p;
  p.u = std::move(u);
  p.energy = objective_energy(mesh, f, g, p.u, c);
  p.stage_energies = {p.energy};
  return p;
}

DualField as_dual_candidate(const ScalarIntegrand& g, const P1Function& u, ProblemCase c,
                            P0VectorField sigma) {
  DualField d;
  d.div_h = weak_divergence(sigma, c);
  const SimplicialMesh& mesh = *sigma.mesh;
  double res = 0.0;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (!d.div_h.active[i]) continue;
    const auto iv = g.subgradient_interval(u.dof[i]);
    const double di = d.div_h.value[i];
    res = std::max(res, std::abs(di - std::clamp(di, iv.lo, iv.hi)));
  }
  d.divergence_residual = res;
  d.sigma = std::move(sigma);
  return d;
}

MinMaxResult minmax_form(const std::vector<PrimalSolution>& u_candidates,
                         const std::vector<DualField>& sigma_candidates,
                         const ConvexIntegrand& f, const ScalarIntegrand& g,
                         const VelocityField& v) {
  if (u_candidates.empty() || sigma_candidates.empty()) {
    throw std::invalid_argument("minmax_form: empty candidate list");
  }
  const std::size_t nu = u_candidates.size(), nsig = sigma_candidates.size();
  std::vector<std::vector<double>> m(nu, std::vector<double>(nsig, 0.0));
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nsig; ++j) {
      m[i][j] = volume_form(
          tensor_A(u_candidates[i].u, sigma_candidates[j].sigma, f, g), v);
    }
  }

  MinMaxResult r;
  r.sup_inf = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nu; ++i) {
    double row_min = std::numeric_limits<double>::infinity();
    int jmin = 0;
    for (std::size_t j = 0; j < nsig; ++j) {
      if (m[i][j] < row_min) {
        row_min = m[i][j];
        jmin = static_cast<int>(j);
      }
    }
    if (row_min > r.sup_inf) {
      r.sup_inf = row_min;
      r.u_index = static_cast<int>(i);
      r.sigma_index = jmin;
    }
  }
  r.inf_sup = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nsig; ++j) {
    double col_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nu; ++i) col_max = std::max(col_max, m[i][j]);
    r.inf_sup = std::min(r.inf_sup, col_max);
  }
  r.value = r.sup_inf;
  return r;
}

namespace {

// Least-squares linear fit of (s_k, z_k), evaluated at s = 0.
double extrapolate_to_zero(const std::vector<std::pair<double, double>>& pts) {
  if (pts.empty()) throw std::logic_error("no trace points");
  if (pts.size() == 1) return pts[0].second;
  double sw = 0.0, ss = 0.0, sz = 0.0, sss = 0.0, ssz = 0.0;
  for (const auto& [s, z] : pts) {
    sw += 1.0;
    ss += s;
    sz += z;
    sss += s * s;
    ssz += s * z;
  }
  const double denom = sw * sss - ss * ss;
  if (std::abs(denom) < 1e-30) return pts[0].second;
  return (sz * sss - ss * ssz) / denom;  // intercept at s = 0
}

}  // namespace

double boundary_form(const P1Function& u, const P0VectorField& sigma,
                     const ConvexIntegrand& f, const ScalarIntegrand& g,
                     const VelocityField& v, ProblemCase c) {
  const SimplicialMesh& mesh = *u.mesh;
  const P0VectorField grad_u = gradient(u);

  const auto density = [&](int t) -> double {
    if (c == ProblemCase::Neumann) return f.eval(grad_u.value[t]);
    const ExtendedReal fs = f.conjugate(sigma.value[t]);
    if (!fs.is_finite()) {
      throw std::runtime_error("boundary_form: infinite dual density f*(sigma) on element " +
                               std::to_string(t));
    }
    return fs.value();
  };

  double total = 0.0;
  for (const auto& facet : mesh.boundary_facets()) {
    const int t0 = facet.adjacent_element;
    // Depth-2 element patch: P1 gradients are constant per mesh layer, so the
    // fit needs samples from the next layer inward to carry a slope.
    std::vector<int> patch{t0};
    for (int k = 0; k < mesh.vertices_per_simplex(); ++k) {
      const int nb = mesh.element_neighbor(t0, k);
      if (nb >= 0) patch.push_back(nb);
    }
    const std::size_t depth1 = patch.size();
    for (std::size_t p = 1; p < depth1; ++p) {
      for (int k = 0; k < mesh.vertices_per_simplex(); ++k) {
        const int nb = mesh.element_neighbor(patch[p], k);
        if (nb >= 0 && std::find(patch.begin(), patch.end(), nb) == patch.end()) {
          patch.push_back(nb);
        }
      }
    }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(patch.size());
    for (int t : patch) {
      const double s = dot(mesh.centroid(t) - facet.midpoint, -1.0 * facet.normal);
      pts.push_back({s, density(t)});
    }
    double dens = extrapolate_to_zero(pts);
    if (c == ProblemCase::Neumann) dens += g.eval(u.value_at(t0, facet.midpoint));
    total += facet.measure * dens * dot(v.at_facet_midpoint(facet), facet.normal);
  }
  return total;
}

}  // namespace shapegrad
