#pragma once

#include <cstddef>
#include <vector>

namespace shapegrad {

// CSR matrix with deterministic assembly and row-parallel apply.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<double> vals;

  void apply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> diagonal() const;
};

struct CgResult {
  long iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned conjugate gradients from x = 0. All inner products
// use fixed-block reductions, so iterates are bit-identical across thread
// counts.
CgResult cg_solve(const CsrMatrix& a, const std::vector<double>& b, std::vector<double>& x,
                  double rel_tol, long max_iter);

}  // namespace shapegrad
