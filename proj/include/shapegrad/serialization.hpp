#pragma once

#include <string>

#include "json.hpp"
#include "shapegrad/integrand.hpp"
#include "shapegrad/momentum_tensor.hpp"
#include "shapegrad/solver.hpp"
#include "shapegrad/validation.hpp"
#include "shapegrad/velocity.hpp"

namespace shapegrad {

// Integrands round-trip through {"kind": ..., "params": [...], "dim": ...}.
nlohmann::json to_json(const ConvexIntegrand& f);
ConvexIntegrand convex_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScalarIntegrand& g);
ScalarIntegrand scalar_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SolverOptions& opts);
SolverOptions solver_options_from_json(const nlohmann::json& j);

nlohmann::json velocity_to_json(const VelocityField& v);

nlohmann::json to_json(const QuotientTable& table);
nlohmann::json to_json(const ConservationReport& report);

// Every value carries its formula tag; tolerances and the case are included.
nlohmann::json to_json(const DerivativeReport& report);

nlohmann::json to_json(const PrimalSolution& sol);
nlohmann::json to_json(const DualField& dual);

}  // namespace shapegrad
