#include "cohortflow/app/projection.hpp"

#include <cohortflow/forecast.hpp>

namespace cohortflow::app {

Json projection_document(const TransitionModel& model, const StateVector& initial, int horizon,
                         const std::optional<ScenarioSpec>& scenario) {
    const StateSpace& space = model.space();
    const ForecastTrajectory baseline = project(initial, model, horizon);
    Json doc{{"baseline", trajectory_to_json(baseline, space)},
             {"scenario", nullptr},
             {"deltas", nullptr}};
    if (scenario) {
        ScenarioSpec spec = *scenario;
        spec.horizon = horizon;
        const TransitionModel edited = apply_scenario(model, spec);
        const ForecastTrajectory what_if = project(initial, edited, horizon);
        doc["scenario"] = trajectory_to_json(what_if, space);
        doc["deltas"] = deltas_to_json(compare(baseline, what_if), space);
    }
    return doc;
}

StateVector initial_from_model(const TransitionModel& model) {
    if (model.meta().last_counts.empty()) {
        throw ScenarioError("model carries no data-derived initial vector (meta.last_counts)");
    }
    return StateVector::from_labels(model.space(), model.meta().last_counts);
}

} // namespace cohortflow::app
