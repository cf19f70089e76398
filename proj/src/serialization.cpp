#include "shapegrad/serialization.hpp"

#include <stdexcept>

namespace shapegrad {

using nlohmann::json;

json to_json(const ConvexIntegrand& f) {
  if (f.kind() == ConvexKind::Custom) {
    throw std::invalid_argument("custom integrands are not serializable");
  }
  return json{{"kind", f.kind_name()}, {"params", f.parameters()}, {"dim", f.dim()}};
}

ConvexIntegrand convex_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int dim = j.value("dim", 2);
  std::vector<double> params;
  if (j.contains("params")) params = j.at("params").get<std::vector<double>>();
  if (kind == "quadratic") {
    return ConvexIntegrand::quadratic(params.empty() ? 1.0 : params[0], dim);
  }
  if (kind == "power_norm") {
    if (params.empty()) throw std::invalid_argument("power_norm needs params: [p]");
    return ConvexIntegrand::power_norm(params[0], dim);
  }
  if (kind == "nonsmooth_torsion") return ConvexIntegrand::nonsmooth_torsion(dim);
  if (kind == "abs_norm") return ConvexIntegrand::abs_norm(dim);
  throw std::invalid_argument("unknown gradient integrand kind: " + kind);
}

json to_json(const ScalarIntegrand& g) {
  if (g.kind() == ScalarKind::Custom) {
    throw std::invalid_argument("custom integrands are not serializable");
  }
  return json{{"kind", g.kind_name()}, {"params", g.parameters()}, {"dim", 1}};
}

ScalarIntegrand scalar_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  std::vector<double> params;
  if (j.contains("params")) params = j.at("params").get<std::vector<double>>();
  if (kind == "linear") return ScalarIntegrand::linear(params.empty() ? 1.0 : params[0]);
  if (kind == "hinge_one_minus") return ScalarIntegrand::hinge_one_minus();
  if (kind == "power") {
    if (params.empty()) throw std::invalid_argument("power needs params: [q]");
    return ScalarIntegrand::power(params[0]);
  }
  throw std::invalid_argument("unknown scalar integrand kind: " + kind);
}

json to_json(const SolverOptions& opts) {
  return json{{"tol", opts.tol},
              {"gap_tol", opts.gap_tol},
              {"max_iter", opts.max_iter},
              {"mu_schedule", opts.mu_schedule},
              {"dom_snap_tol", opts.dom_snap_tol},
              {"check_multiplicity", opts.check_multiplicity}};
}

SolverOptions solver_options_from_json(const json& j) {
  SolverOptions opts;
  opts.tol = j.value("tol", opts.tol);
  opts.gap_tol = j.value("gap_tol", opts.gap_tol);
  opts.max_iter = j.value("max_iter", opts.max_iter);
  if (j.contains("mu_schedule")) {
    opts.mu_schedule = j.at("mu_schedule").get<std::vector<double>>();
  }
  opts.dom_snap_tol = j.value("dom_snap_tol", opts.dom_snap_tol);
  opts.check_multiplicity = j.value("check_multiplicity", opts.check_multiplicity);
  return opts;
}

json velocity_to_json(const VelocityField& v) {
  json nodal = json::array();
  for (const Vec2& w : v.nodal_values()) {
    if (v.mesh().dim() == 1) {
      nodal.push_back(json::array({w.x}));
    } else {
      nodal.push_back(json::array({w.x, w.y}));
    }
  }
  return json{{"nodal", nodal}};
}

json to_json(const QuotientTable& table) {
  return json{{"epsilons", table.epsilons},
              {"q_values", table.q_values},
              {"extrapolated", table.extrapolated},
              {"observed_order", table.observed_order},
              {"noise_flagged", table.noise_flagged},
              {"formula", "q_eps = (J(Omega_eps) - J(Omega)) / eps, one-sided"}};
}

json to_json(const ConservationReport& report) {
  return json{{"max_residual", report.max_residual},
              {"mean_residual", report.mean_residual},
              {"probe_count", report.probe_count},
              {"normalization", report.normalization},
              {"residuals", report.residuals}};
}

namespace {

json tagged(const char* tag, double value) { return json{{"formula", tag}, {"value", value}}; }

}  // namespace

json to_json(const DerivativeReport& report) {
  json values;
  values["J_primal"] = tagged("-min discrete energy", report.J_primal);
  values["J_dual"] = tagged("dual energy of reconstructed sigma", report.J_dual);
  if (report.volume_form_value) {
    values["volume_form"] = tagged("sum_T |T| A_T : DV_T", *report.volume_form_value);
  }
  if (report.boundary_form_value) {
    values[report.problem_case == "N" ? "boundary_form_N" : "boundary_form_D"] =
        tagged(report.problem_case == "N"
                   ? "sum_facets w [f(grad u) + g(u)] (V.n), inward-extrapolated trace"
                   : "sum_facets w f*(sigma) (V.n), inward-extrapolated trace",
               *report.boundary_form_value);
  }
  if (report.minmax_value) {
    values["minmax"] = tagged("sup_u inf_sigma sum_T |T| A(u,sigma) : DV", *report.minmax_value);
  }
  if (report.fd_extrapolated) {
    values["fd_extrapolated"] =
        tagged("Richardson extrapolation of one-sided quotients", *report.fd_extrapolated);
  }
  return json{{"values", values},
              {"tolerances", json{{"rel", report.tol_rel}, {"floor", report.tol_floor}}},
              {"case", report.problem_case}};
}

json to_json(const PrimalSolution& sol) {
  return json{{"energy", sol.energy},
              {"J", -sol.energy},
              {"iterations", sol.iterations},
              {"grad_norm_or_gap", sol.grad_norm_or_gap},
              {"smoothing_mu_final", sol.smoothing_mu_final},
              {"converged", sol.status == SolveStatus::Converged},
              {"stage_energies", sol.stage_energies},
              {"suspected_multiplicity", sol.suspected_multiplicity}};
}

json to_json(const DualField& dual) {
  return json{{"membership_residual", dual.membership_residual},
              {"divergence_residual", dual.divergence_residual},
              {"iterations", dual.iterations}};
}

}  // namespace shapegrad
