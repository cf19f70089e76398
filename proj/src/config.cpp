#include "shapegrad/config.hpp"

#include <cstdio>
#include <stdexcept>

#include "shapegrad/serialization.hpp"

namespace shapegrad {

using nlohmann::json;

ProblemConfig ProblemConfig::from_json(const json& j) {
  ProblemConfig cfg;
  cfg.mesh_spec = j.at("mesh");
  cfg.f_spec = j.at("f");
  cfg.g_spec = j.at("g");
  cfg.case_str = j.at("case").get<std::string>();
  parse_case(cfg.case_str);  // validate now
  if (j.contains("velocity")) {
    cfg.velocity_spec = j.at("velocity");
    cfg.has_velocity = true;
  }
  if (j.contains("solver")) {
    cfg.solver = solver_options_from_json(j.at("solver"));
    cfg.has_solver = true;
  }
  return cfg;
}

json ProblemConfig::to_json() const {
  json j{{"mesh", mesh_spec}, {"f", f_spec}, {"g", g_spec}, {"case", case_str}};
  if (has_velocity) j["velocity"] = velocity_spec;
  if (has_solver) j["solver"] = shapegrad::to_json(solver);
  return j;
}

SimplicialMesh ProblemConfig::build_mesh() const { return build_mesh_from_spec(mesh_spec); }
ConvexIntegrand ProblemConfig::build_f() const { return convex_from_json(f_spec); }
ScalarIntegrand ProblemConfig::build_g() const { return scalar_from_json(g_spec); }

VelocityField ProblemConfig::build_velocity(const SimplicialMesh& mesh) const {
  if (!has_velocity) throw std::invalid_argument("config has no velocity field");
  return build_velocity_from_spec(mesh, velocity_spec);
}

SimplicialMesh build_mesh_from_spec(const json& spec) {
  if (spec.is_object() && spec.contains("file")) {
    return SimplicialMesh::read_file(spec.at("file").get<std::string>());
  }
  if (!spec.is_string()) throw std::invalid_argument("mesh spec must be a string or {file}");
  const std::string s = spec.get<std::string>();
  double a = 0.0, b = 0.0;
  int n = 0;
  if (std::sscanf(s.c_str(), "interval(%lf,%lf,%d)", &a, &b, &n) == 3) {
    return SimplicialMesh::interval(a, b, n);
  }
  if (std::sscanf(s.c_str(), "disk(%lf,%d)", &a, &n) == 2) {
    return SimplicialMesh::disk(a, n);
  }
  if (std::sscanf(s.c_str(), "square(%d)", &n) == 1) {
    return SimplicialMesh::square(n);
  }
  throw std::invalid_argument("unknown mesh spec: " + s);
}

VelocityField build_velocity_from_spec(const SimplicialMesh& mesh, const json& spec) {
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    if (s == "dilation") return VelocityField::dilation(mesh);
    if (s == "translation") return VelocityField::translation(mesh, {1.0, 0.0});
    double x = 0.0, y = 0.0;
    int i = 0, k = 0;
    if (std::sscanf(s.c_str(), "translation(%lf,%lf)", &x, &y) == 2) {
      return VelocityField::translation(mesh, {x, y});
    }
    if (std::sscanf(s.c_str(), "bump(%d,%d)", &i, &k) == 2) {
      return VelocityField::bump(mesh, i, k == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0});
    }
    if (std::sscanf(s.c_str(), "bump(%d)", &i) == 1) {
      return VelocityField::bump(mesh, i, {1.0, 0.0});
    }
    throw std::invalid_argument("unknown velocity family: " + s);
  }
  if (spec.is_array() || (spec.is_object() && spec.contains("nodal"))) {
    const json& arr = spec.is_array() ? spec : spec.at("nodal");
    if (static_cast<int>(arr.size()) != mesh.num_vertices()) {
      throw std::invalid_argument("nodal velocity length does not match mesh");
    }
    std::vector<Vec2> nodal(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
      nodal[i].x = arr[i].at(0).get<double>();
      nodal[i].y = arr[i].size() > 1 ? arr[i].at(1).get<double>() : 0.0;
    }
    return VelocityField(mesh, std::move(nodal));
  }
  if (spec.is_object() && spec.contains("affine")) {
    const json& aff = spec.at("affine");
    Mat2 a{};
    Vec2 b{};
    if (aff.contains("A")) {
      const json& m = aff.at("A");
      a.a = m.at(0).at(0).get<double>();
      if (m.at(0).size() > 1) a.b = m.at(0).at(1).get<double>();
      if (m.size() > 1) {
        a.c = m.at(1).at(0).get<double>();
        a.d = m.at(1).at(1).get<double>();
      }
    }
    if (aff.contains("b")) {
      b.x = aff.at("b").at(0).get<double>();
      if (aff.at("b").size() > 1) b.y = aff.at("b").at(1).get<double>();
    }
    return VelocityField::affine(mesh, a, b);
  }
  throw std::invalid_argument("unrecognized velocity spec");
}

}  // namespace shapegrad
