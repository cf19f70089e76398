#pragma once

#include <string>

#include "json.hpp"
#include "shapegrad/cases.hpp"
#include "shapegrad/integrand.hpp"
#include "shapegrad/mesh.hpp"
#include "shapegrad/solver.hpp"
#include "shapegrad/velocity.hpp"

namespace shapegrad {

// Problem description as read from --config. Raw JSON specs are kept so that
// configs round-trip losslessly.
struct ProblemConfig {
  nlohmann::json mesh_spec;      // "disk(1,20)" | "interval(0,2,400)" | "square(16)" | {"file": path}
  nlohmann::json f_spec;
  nlohmann::json g_spec;
  std::string case_str = "D";
  nlohmann::json velocity_spec;  // named family, nodal array, or {"affine": ...}
  SolverOptions solver;
  bool has_velocity = false;
  bool has_solver = false;

  static ProblemConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  SimplicialMesh build_mesh() const;
  ConvexIntegrand build_f() const;
  ScalarIntegrand build_g() const;
  ProblemCase problem_case() const { return parse_case(case_str); }
  VelocityField build_velocity(const SimplicialMesh& mesh) const;
};

// "disk(1,20)", "interval(0,2,400)", "square(16)" or {"file": "path"}.
SimplicialMesh build_mesh_from_spec(const nlohmann::json& spec);

// "dilation" | "translation" | "translation(x,y)" | "bump(i)" | "bump(i,k)"
// | [[vx,vy],...] | {"nodal": [...]} | {"affine": {"A": [[..],[..]], "b": [..]}}.
VelocityField build_velocity_from_spec(const SimplicialMesh& mesh, const nlohmann::json& spec);

}  // namespace shapegrad
