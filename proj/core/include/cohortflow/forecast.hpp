#pragma once

#include "cohortflow/domain.hpp"

#include <utility>
#include <vector>

namespace cohortflow {

/// Flow accounting for one projection step: S_next = S + inflow - outflow.
struct StepFlows {
    double inflow_total = 0.0;
    double outflow_total = 0.0;
    /// Mass entering each absorbing state, in StateSpace::absorbing() order.
    std::vector<double> per_absorbing;

    friend bool operator==(const StepFlows&, const StepFlows&) = default;
};

struct ForecastPoint {
    int step = 0;
    StateVector vector;
    StepFlows flows;

    friend bool operator==(const ForecastPoint&, const ForecastPoint&) = default;
};

/// Projected expected headcounts; points[0] is the initial vector with zero flows.
struct ForecastTrajectory {
    int horizon = 0;
    std::vector<ForecastPoint> points;

    friend bool operator==(const ForecastTrajectory&, const ForecastTrajectory&) = default;
};

/// One step: survivors redistribute through the matrix, then inflow is added.
/// Throws ArgumentError on dimension mismatch.
std::pair<StateVector, StepFlows> step(const StateVector& v, const TransitionModel& model);

/// Iterates `step` `horizon` times, 1 <= horizon <= kMaxHorizon.
ForecastTrajectory project(const StateVector& v0, const TransitionModel& model, int horizon);

/// Pins overridden cells and rescales the rest of each edited row proportionally so
/// it still sums to 1. When the untouched cells carry no mass the residual is spread
/// uniformly over them. Throws ScenarioError on unknown states or over-committed rows.
TransitionModel apply_scenario(const TransitionModel& model, const ScenarioSpec& spec);

struct StepDelta {
    int step = 0;
    std::vector<double> per_state;
    double total = 0.0;

    friend bool operator==(const StepDelta&, const StepDelta&) = default;
};

/// scenario - baseline at every step. Throws ArgumentError on shape mismatch.
std::vector<StepDelta> compare(const ForecastTrajectory& baseline, const ForecastTrajectory& scenario);

} // namespace cohortflow
