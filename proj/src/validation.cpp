#include "shapegrad/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "shapegrad/parallel.hpp"

namespace shapegrad {

double fd_quotient(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                   const ScalarIntegrand& g, ProblemCase c, const VelocityField& v,
                   double eps, const SolverOptions& opts) {
  if (eps <= 0.0) throw std::invalid_argument("fd_quotient: eps must be > 0");
  const DeformationRecord rec = deform(mesh, v, eps);
  const PrimalSolution base = solve_primal(mesh, f, g, c, opts);
  const PrimalSolution moved = solve_primal(rec.deformed_mesh, f, g, c, opts);
  const double j0 = -base.energy;
  const double je = -moved.energy;
  return (je - j0) / eps;
}

QuotientTable fd_sweep(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                       const ScalarIntegrand& g, ProblemCase c, const VelocityField& v,
                       const std::vector<double>& eps_schedule, const SolverOptions& opts) {
  if (eps_schedule.size() < 3) throw std::invalid_argument("fd_sweep: need >= 3 epsilons");
  for (std::size_t k = 1; k < eps_schedule.size(); ++k) {
    if (!(eps_schedule[k] < eps_schedule[k - 1])) {
      throw std::invalid_argument("fd_sweep: schedule must be strictly descending");
    }
  }

  QuotientTable table;
  table.epsilons = eps_schedule;
  const PrimalSolution base = solve_primal(mesh, f, g, c, opts);
  const double j0 = -base.energy;
  for (double eps : eps_schedule) {
    const DeformationRecord rec = deform(mesh, v, eps);
    const PrimalSolution moved = solve_primal(rec.deformed_mesh, f, g, c, opts);
    table.q_values.push_back((-moved.energy - j0) / eps);
  }

  const std::size_t n = table.q_values.size();
  const double e1 = table.epsilons[n - 2], q1 = table.q_values[n - 2];
  const double e2 = table.epsilons[n - 1], q2 = table.q_values[n - 1];
  table.extrapolated = (q2 * e1 - q1 * e2) / (e1 - e2);

  // Slope of log |q - extrapolated| against log eps over usable entries.
  const double noise = 1e-12 * (1.0 + std::abs(table.extrapolated));
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < n; ++k) {
    const double dev = std::abs(table.q_values[k] - table.extrapolated);
    if (dev > noise) pts.push_back({std::log(table.epsilons[k]), std::log(dev)});
  }
  if (pts.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = pts.size();
    table.observed_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  } else {
    table.noise_flagged = true;
  }
  // Deviations should shrink with eps; flag clear violations.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d_coarse = std::abs(table.q_values[k] - table.extrapolated);
    const double d_fine = std::abs(table.q_values[k + 1] - table.extrapolated);
    if (d_fine > 3.0 * d_coarse + 10.0 * noise) table.noise_flagged = true;
  }
  return table;
}

double fd_richardson(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                     const ScalarIntegrand& g, ProblemCase c, const VelocityField& v,
                     std::vector<double> eps_schedule, const SolverOptions& opts) {
  if (eps_schedule.empty()) throw std::invalid_argument("fd_richardson: empty schedule");
  std::sort(eps_schedule.begin(), eps_schedule.end(), std::greater<double>());
  const PrimalSolution base = solve_primal(mesh, f, g, c, opts);
  const double j0 = -base.energy;
  std::vector<double> q;
  for (double eps : eps_schedule) {
    const DeformationRecord rec = deform(mesh, v, eps);
    const PrimalSolution moved = solve_primal(rec.deformed_mesh, f, g, c, opts);
    q.push_back((-moved.energy - j0) / eps);
  }
  const std::size_t n = q.size();
  if (n == 1) return q[0];
  const double e1 = eps_schedule[n - 2], e2 = eps_schedule[n - 1];
  return (q[n - 1] * e1 - q[n - 2] * e2) / (e1 - e2);
}

ConservationReport conservation_residual(const MomentumTensorField& a,
                                         const SimplicialMesh& mesh,
                                         const std::vector<VelocityField>* probes) {
  ConservationReport report;

  if (probes != nullptr) {
    report.residuals.resize(probes->size());
    for (std::size_t p = 0; p < probes->size(); ++p) {
      const double nrm = (*probes)[p].gradient_l2_norm();
      report.residuals[p] = nrm > 0.0 ? std::abs(volume_form(a, (*probes)[p])) / nrm : 0.0;
    }
  } else {
    // Hat-field probes e_k phi_i for every vertex whose one-ring clears the
    // boundary one-ring.
    std::vector<int> eligible;
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      if (mesh.vertex_on_boundary(i)) continue;
      bool clear = true;
      for (int j : mesh.vertex_neighbors(i)) {
        if (mesh.vertex_on_boundary(j)) {
          clear = false;
          break;
        }
      }
      if (clear) eligible.push_back(i);
    }
    if (eligible.empty()) {
      throw std::runtime_error(
          "conservation_residual: no interior vertex clears the boundary one-ring; mesh too "
          "coarse");
    }
    const int dirs = mesh.dim();
    report.residuals.assign(eligible.size() * dirs, 0.0);
    const int vps = mesh.vertices_per_simplex();
    par::parallel_for(eligible.size() * dirs, [&](std::size_t pi) {
      const int i = eligible[pi / dirs];
      const int k = static_cast<int>(pi % dirs);
      const Vec2 e = k == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
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
      report.residuals[pi] = dv2 > 0.0 ? std::abs(vf) / std::sqrt(dv2) : 0.0;
    });
  }

  report.probe_count = static_cast<int>(report.residuals.size());
  double mx = 0.0, mean = 0.0;
  for (double r : report.residuals) {
    mx = std::max(mx, r);
    mean += r;
  }
  report.max_residual = mx;
  report.mean_residual = report.probe_count > 0 ? mean / report.probe_count : 0.0;
  return report;
}

double transported_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                          const ScalarIntegrand& g, const P1Function& u,
                          const VelocityField& v, double eps) {
  const DeformationRecord rec = deform(mesh, v, eps);
  const P0VectorField grad_u = gradient(u);
  const int vps = mesh.vertices_per_simplex();
  return par::block_sum(mesh.num_simplices(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const auto& s = mesh.simplex(t);
    const Mat2 jinv_t = transpose(inverse(rec.element_jacobian[t]));
    double gbar = 0.0;
    for (int k = 0; k < vps; ++k) gbar += g.eval(u.dof[s[k]]);
    gbar /= vps;
    return mesh.volume(t) * rec.element_jacobian_det[t] *
           (f.eval(matvec(jinv_t, grad_u.value[t])) + gbar);
  });
}

P0VectorField piola_pushforward(const DeformationRecord& rec, const P0VectorField& sigma) {
  P0VectorField out;
  out.mesh = &rec.deformed_mesh;
  out.value.resize(sigma.value.size());
  for (std::size_t t = 0; t < sigma.value.size(); ++t) {
    out.value[t] =
        (1.0 / rec.element_jacobian_det[t]) * matvec(rec.element_jacobian[t], sigma.value[t]);
  }
  return out;
}

ExtendedReal transported_dual_energy(const SimplicialMesh& mesh, const ConvexIntegrand& f,
                                     const ScalarIntegrand& g, const P0VectorField& sigma,
                                     const VelocityField& v, double eps, ProblemCase c,
                                     double snap_tol) {
  const DeformationRecord rec = deform(mesh, v, eps);

  // Deformed lumped masses from beta, without touching the deformed mesh.
  const int vps = mesh.vertices_per_simplex();
  std::vector<double> mass_def(mesh.num_vertices(), 0.0);
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const auto& s = mesh.simplex(t);
    for (int k = 0; k < vps; ++k) {
      mass_def[s[k]] += rec.element_jacobian_det[t] * mesh.volume(t) / vps;
    }
  }

  // f* part at the Piola transform of sigma.
  bool infinite = false;
  double fstar = 0.0;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const Vec2 st = (1.0 / rec.element_jacobian_det[t]) *
                    matvec(rec.element_jacobian[t], sigma.value[t]);
    ExtendedReal val = f.conjugate(st);
    if (!val.is_finite() && f.kind() == ConvexKind::AbsNorm && norm(st) <= 1.0 + snap_tol) {
      val = 0.0;
    }
    if (!val.is_finite()) {
      infinite = true;
      break;
    }
    fstar += mesh.volume(t) * rec.element_jacobian_det[t] * val.value();
  }
  if (infinite) return ExtendedReal::infinity();

  // Nodal fluxes m_i d_i are invariant under the Piola transform; the
  // divergence argument scales by the deformed mass.
  const DiscreteDivergence d = weak_divergence(sigma, c);
  ExtendedReal total = fstar;
  const auto dom = g.conjugate_domain();
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (!d.active[i]) continue;
    const double flux = mesh.lumped_mass(i) * d.value[i];
    if (c == ProblemCase::RelaxedDirichlet && mesh.vertex_on_boundary(i)) {
      total += relaxed_boundary_conjugate(g, flux, mass_def[i], snap_tol);
      continue;
    }
    const double arg = flux / mass_def[i];
    const double clamped = std::clamp(arg, dom.lo, dom.hi);
    if (std::abs(clamped - arg) > snap_tol) return ExtendedReal::infinity();
    const ExtendedReal val = g.conjugate(clamped);
    if (!val.is_finite()) return ExtendedReal::infinity();
    total += mass_def[i] * val.value();
  }
  return total;
}

CrossCheckResult cross_check(const DerivativeReport& report) {
  struct Item {
    const char* tag;
    const std::optional<double>* value;
  };
  const Item items[] = {
      {"volume_form", &report.volume_form_value},
      {"boundary_form", &report.boundary_form_value},
      {"minmax", &report.minmax_value},
      {"fd_extrapolated", &report.fd_extrapolated},
  };
  int present = 0;
  for (const auto& it : items) present += it.value->has_value() ? 1 : 0;
  if (present < 2) {
    throw std::invalid_argument("cross_check: need at least two of volume/boundary/minmax/fd");
  }

  CrossCheckResult res;
  char buf[160];
  for (std::size_t a = 0; a < std::size(items); ++a) {
    if (!items[a].value->has_value()) continue;
    for (std::size_t b = a + 1; b < std::size(items); ++b) {
      if (!items[b].value->has_value()) continue;
      const double va = items[a].value->value();
      const double vb = items[b].value->value();
      const double diff = std::abs(va - vb);
      const double tol =
          report.tol_rel * std::max({std::abs(va), std::abs(vb), report.tol_floor});
      const bool ok = diff <= tol;
      std::snprintf(buf, sizeof buf, "%s vs %s: |%.6g - %.6g| = %.3g (tol %.3g) %s",
                    items[a].tag, items[b].tag, va, vb, diff, tol, ok ? "ok" : "FAIL");
      res.lines.push_back(buf);
      if (!ok && diff - tol > res.worst_diff - res.worst_tol) {
        res.pass = false;
        res.worst_pair = std::string(items[a].tag) + " vs " + items[b].tag;
        res.worst_diff = diff;
        res.worst_tol = tol;
      }
    }
  }
  return res;
}

std::string quotient_table_csv(const QuotientTable& table) {
  std::string out = "epsilon,q\n";
  char buf[80];
  for (std::size_t k = 0; k < table.epsilons.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", table.epsilons[k], table.q_values[k]);
    out += buf;
  }
  return out;
}

}  // namespace shapegrad
