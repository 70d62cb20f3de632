#pragma once

#include <cohortflow/serialization.hpp>

#include <optional>

namespace cohortflow::app {

/// Baseline projection plus, when a scenario is given, the scenario projection and
/// per-step deltas. Shared by `project` and `POST /api/project` so both emit the
/// same document for the same inputs.
Json projection_document(const TransitionModel& model, const StateVector& initial, int horizon,
                         const std::optional<ScenarioSpec>& scenario);

/// Initial vector stored in the model's fit metadata. Throws ScenarioError when absent.
StateVector initial_from_model(const TransitionModel& model);

} // namespace cohortflow::app
