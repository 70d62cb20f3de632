#pragma once

#include "cohortflow/domain.hpp"
#include "cohortflow/forecast.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace cohortflow {

/// Key order follows insertion so documents read top-down.
using Json = nlohmann::ordered_json;

Json model_to_json(const TransitionModel& model);
/// Throws ParseError on schema problems, ValidationError on stochastic violations.
TransitionModel model_from_json(const Json& doc);

/// Keys: cell_overrides [{from, to, probability}], inflow_multiplier | inflow {label: n},
/// horizon (defaults to `default_horizon`). Unknown keys are rejected.
ScenarioSpec scenario_from_json(const Json& doc, int default_horizon);
Json scenario_to_json(const ScenarioSpec& spec);

Json trajectory_to_json(const ForecastTrajectory& trajectory, const StateSpace& space);
Json deltas_to_json(const std::vector<StepDelta>& deltas, const StateSpace& space);
Json report_to_json(const EvaluationReport& report);

/// Columns: step, one per enrolled state, total, inflow_total, outflow_total.
std::string trajectory_to_csv(const ForecastTrajectory& trajectory, const StateSpace& space);

/// Parses `label=value,label=value`. Throws ParseError.
std::map<std::string, double> parse_label_values(std::string_view text);

} // namespace cohortflow
