#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapegrad/mesh.hpp"

namespace shapegrad::testsupport {

// Exact minimum of the discrete relaxed 1D functional
//   sum_k |u_{k+1} - u_k| + sum_i m_i (1 - u_i)_+ + |u_0| + |u_N|
// over all real nodal vectors. All kinks sit at u = 0 and u = 1, so some
// minimizer is {0,1}-valued (a vertex of the kink arrangement); dynamic
// programming over the two states is exact. Independent of the solver path.
inline double relaxed_chain_min(const SimplicialMesh& mesh) {
  const int nv = mesh.num_vertices();
  const double vals[2] = {0.0, 1.0};
  const auto node_cost = [&](int i, int s) {
    double c = mesh.lumped_mass(i) * std::max(1.0 - vals[s], 0.0);
    if (mesh.vertex_on_boundary(i)) c += std::abs(vals[s]);
    return c;
  };
  double best[2] = {node_cost(0, 0), node_cost(0, 1)};
  for (int i = 1; i < nv; ++i) {
    double next[2];
    for (int s = 0; s < 2; ++s) {
      next[s] = node_cost(i, s) +
                std::min(best[s], best[1 - s] + std::abs(vals[s] - vals[1 - s]));
    }
    best[0] = next[0];
    best[1] = next[1];
  }
  return std::min(best[0], best[1]);
}

struct RadialOracleResult {
  double min_energy = 0.0;
  double certified_lower_bound = 0.0;  // from the radial dual candidate
};

// Direct minimization of the elastoplastic torsion energy over radial P1
// profiles on [0, R] with u(R) = 0:
//   E(u) = int_0^R [ f(u') - lambda u ] 2 pi r dr,
//   f(t) = |t| for |t| < 1, (t^2+1)/2 else.
// Hand-rolled smoothed gradient descent with momentum, independent of the
// library solver. The dual candidate sigma(r) = -lambda r / 2 certifies a
// lower bound -int f*(sigma) 2 pi r dr.
inline RadialOracleResult radial_torsion_oracle(double lambda, double radius, int n,
                                                int iterations) {
  const double pi = 3.14159265358979323846;
  const double h = radius / n;
  std::vector<double> annulus(n), mass(n + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    const double r0 = k * h, r1 = (k + 1) * h;
    annulus[k] = pi * (r1 * r1 - r0 * r0);
    mass[k] += 0.5 * annulus[k];
    mass[k + 1] += 0.5 * annulus[k];
  }

  const auto f_exact = [](double t) {
    const double a = std::abs(t);
    return a < 1.0 ? a : 0.5 * (a * a + 1.0);
  };
  const auto energy = [&](const std::vector<double>& u) {
    double e = 0.0;
    for (int k = 0; k < n; ++k) e += annulus[k] * f_exact((u[k + 1] - u[k]) / h);
    for (int i = 0; i <= n; ++i) e -= lambda * mass[i] * u[i];
    return e;
  };

  // Start away from zero so the descent genuinely works back down.
  std::vector<double> u(n + 1), v(n + 1), grad(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    u[i] = 0.25 * (radius * radius - r * r);
  }

  const double max_annulus = *std::max_element(annulus.begin(), annulus.end());
  double best = energy(u);
  for (const double mu : {1e-2, 1e-3, 1e-4}) {
    const auto fmu_grad = [&](double t) {
      // Moreau gradient of the radial profile of f.
      const double s = std::abs(t);
      double w;
      if (s <= mu) w = 0.0;
      else if (s <= 1.0 + mu) w = s - mu;
      else w = s / (1.0 + mu);
      const double gmag = (s - w) / mu;
      return t >= 0.0 ? gmag : -gmag;
    };
    const double lip = std::max(1.0, 1.0 / mu) * 2.0 * max_annulus / (h * h);
    const double step = 1.0 / lip;
    double theta = 1.0;
    v = u;
    double e_last = energy(u);
    for (int it = 0; it < iterations / 3; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (int k = 0; k < n; ++k) {
        const double gk = annulus[k] * fmu_grad((v[k + 1] - v[k]) / h) / h;
        grad[k] -= gk;
        grad[k + 1] += gk;
      }
      for (int i = 0; i <= n; ++i) grad[i] -= lambda * mass[i];
      std::vector<double> u_next(n + 1);
      for (int i = 0; i <= n; ++i) u_next[i] = v[i] - step * grad[i];
      u_next[n] = 0.0;
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      const double beta = (theta - 1.0) / theta_next;
      for (int i = 0; i <= n; ++i) v[i] = u_next[i] + beta * (u_next[i] - u[i]);
      u = u_next;
      theta = theta_next;
      if (it % 200 == 199) {
        const double e = energy(u);
        if (e < best) best = e;
        if (e > e_last) {  // restart on increase
          theta = 1.0;
          v = u;
        }
        e_last = e;
      }
    }
    best = std::min(best, energy(u));
  }

  // Lower bound from sigma(r) = -lambda r / 2: E >= -int f*(sigma) 2 pi r dr.
  double fstar_int = 0.0;
  const int q = 4000;
  for (int k = 0; k < q; ++k) {
    const double r = (k + 0.5) * radius / q;
    const double s = 0.5 * lambda * r;
    const double fstar = s <= 1.0 ? 0.0 : 0.5 * (s * s - 1.0);
    fstar_int += fstar * 2.0 * pi * r * (radius / q);
  }

  return RadialOracleResult{best, -fstar_int};
}

}  // namespace shapegrad::testsupport
