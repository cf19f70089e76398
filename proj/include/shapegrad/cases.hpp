#pragma once

#include <stdexcept>
#include <string>

namespace shapegrad {

// Boundary regime of the minimization problem:
//   Dirichlet        u = 0 on the boundary (masked dofs)
//   Neumann          free boundary values; dual fields satisfy sigma.n = 0 weakly
//   RelaxedDirichlet free boundary values with the penalty sum_b |u_b| added to
//                    the energy (1D only; the Dirichlet problem relaxed in the
//                    L1 sense so that minimizers exist for p = 1 integrands)
enum class ProblemCase { Dirichlet, Neumann, RelaxedDirichlet };

inline ProblemCase parse_case(const std::string& s) {
  if (s == "D") return ProblemCase::Dirichlet;
  if (s == "N") return ProblemCase::Neumann;
  if (s == "relaxed" || s == "R") return ProblemCase::RelaxedDirichlet;
  throw std::invalid_argument("unknown problem case: " + s);
}

inline std::string case_name(ProblemCase c) {
  switch (c) {
    case ProblemCase::Dirichlet: return "D";
    case ProblemCase::Neumann: return "N";
    case ProblemCase::RelaxedDirichlet: return "relaxed";
  }
  return "?";
}

}  // namespace shapegrad
