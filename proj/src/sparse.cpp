#include "shapegrad/sparse.hpp"

#include <cmath>

#include "shapegrad/parallel.hpp"

namespace shapegrad {

void CsrMatrix::apply(const std::vector<double>& x, std::vector<double>& y) const {
  y.resize(n);
  par::parallel_for(n, [&](std::size_t i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  });
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (cols[k] == i) d[i] = vals[k];
    }
  }
  return d;
}

CgResult cg_solve(const CsrMatrix& a, const std::vector<double>& b, std::vector<double>& x,
                  double rel_tol, long max_iter) {
  const int n = a.n;
  x.assign(n, 0.0);
  CgResult res;

  const auto dotv = [](const std::vector<double>& u, const std::vector<double>& v) {
    return par::block_sum(u.size(), [&](std::size_t i) { return u[i] * v[i]; });
  };

  std::vector<double> prec = a.diagonal();
  for (double& d : prec) d = d > 0.0 ? 1.0 / d : 1.0;

  std::vector<double> r = b;
  std::vector<double> z(n), p(n), ap(n);
  par::parallel_for(n, [&](std::size_t i) { z[i] = prec[i] * r[i]; });
  p = z;

  const double bnorm = std::sqrt(dotv(b, b));
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  double rz = dotv(r, z);

  for (long it = 0; it < max_iter; ++it) {
    a.apply(p, ap);
    const double pap = dotv(p, ap);
    if (pap <= 0.0) break;  // matrix not SPD on this subspace
    const double alpha = rz / pap;
    par::parallel_for(n, [&](std::size_t i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    });
    res.iterations = it + 1;
    const double rnorm = std::sqrt(dotv(r, r));
    res.relative_residual = rnorm / bnorm;
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      return res;
    }
    par::parallel_for(n, [&](std::size_t i) { z[i] = prec[i] * r[i]; });
    const double rz_new = dotv(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    par::parallel_for(n, [&](std::size_t i) { p[i] = z[i] + beta * p[i]; });
  }
  return res;
}

}  // namespace shapegrad
