#include "cohortflow/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cohortflow {

std::pair<StateVector, StepFlows> step(const StateVector& v, const TransitionModel& model) {
    const StateSpace& space = model.space();
    const Matrix& p = model.matrix();
    if (v.size() != space.enrolled_size()) {
        throw ArgumentError("state vector has " + std::to_string(v.size()) +
                            " entries, model has " + std::to_string(space.enrolled_size()) +
                            " enrolled states");
    }

    std::vector<double> next(space.enrolled_size(), 0.0);
    const auto absorbing_columns = space.absorbing_columns();
    StepFlows flows;
    flows.per_absorbing.assign(absorbing_columns.size(), 0.0);

    for (std::size_t from = 0; from < space.enrolled_size(); ++from) {
        const double mass = v[from];
        if (mass == 0.0) {
            continue;
        }
        for (std::size_t to = 0; to < space.enrolled_size(); ++to) {
            next[to] += mass * p(from, space.column_of_enrolled(to));
        }
        for (std::size_t a = 0; a < absorbing_columns.size(); ++a) {
            flows.per_absorbing[a] += mass * p(from, absorbing_columns[a]);
        }
    }
    for (std::size_t e = 0; e < next.size(); ++e) {
        next[e] += model.inflow()[e];
        flows.inflow_total += model.inflow()[e];
    }
    for (const double out : flows.per_absorbing) {
        flows.outflow_total += out;
    }
    return {StateVector(std::move(next)), std::move(flows)};
}

ForecastTrajectory project(const StateVector& v0, const TransitionModel& model, int horizon) {
    if (horizon < 1 || horizon > kMaxHorizon) {
        throw ArgumentError("horizon must be in [1, " + std::to_string(kMaxHorizon) + "], got " +
                            std::to_string(horizon));
    }
    if (v0.size() != model.space().enrolled_size()) {
        throw ArgumentError("initial vector does not match the model's enrolled states");
    }
    ForecastTrajectory trajectory;
    trajectory.horizon = horizon;
    trajectory.points.reserve(static_cast<std::size_t>(horizon) + 1);
    trajectory.points.push_back(
        {0, v0, StepFlows{0.0, 0.0, std::vector<double>(model.space().absorbing().size(), 0.0)}});
    for (int k = 1; k <= horizon; ++k) {
        auto [next, flows] = step(trajectory.points.back().vector, model);
        trajectory.points.push_back({k, std::move(next), std::move(flows)});
    }
    return trajectory;
}

TransitionModel apply_scenario(const TransitionModel& model, const ScenarioSpec& spec) {
    validate_scenario(spec);
    const StateSpace& space = model.space();

    Matrix matrix = model.matrix();
    std::vector<std::vector<bool>> pinned(space.enrolled_size(),
                                          std::vector<bool>(space.size(), false));
    std::set<std::size_t> edited_rows;
    for (const auto& o : spec.cell_overrides) {
        const auto row = space.enrolled_index_of(o.from);
        if (!row) {
            throw ScenarioError(space.contains(o.from)
                                    ? "state '" + o.from + "' is absorbing and has no row"
                                    : "unknown state '" + o.from + "'");
        }
        const auto col = space.index_of(o.to);
        if (!col) {
            throw ScenarioError("unknown state '" + o.to + "'");
        }
        matrix(*row, *col) = o.probability;
        pinned[*row][*col] = true;
        edited_rows.insert(*row);
    }

    for (const std::size_t r : edited_rows) {
        double fixed = 0.0;
        double remaining = 0.0;
        std::size_t free_cells = 0;
        for (std::size_t c = 0; c < space.size(); ++c) {
            if (pinned[r][c]) {
                fixed += matrix(r, c);
            } else {
                remaining += model.matrix()(r, c);
                ++free_cells;
            }
        }
        const double residual = std::max(0.0, 1.0 - fixed);
        if (free_cells == 0) {
            if (std::abs(fixed - 1.0) > kRowSumTolerance) {
                throw ScenarioError("row '" + space.enrolled()[r] +
                                    "' overrides every cell but sums to " + format_number(fixed));
            }
            continue;
        }
        for (std::size_t c = 0; c < space.size(); ++c) {
            if (pinned[r][c]) {
                continue;
            }
            matrix(r, c) = remaining > 0.0
                               ? model.matrix()(r, c) * residual / remaining
                               : residual / static_cast<double>(free_cells);
        }
    }

    std::vector<double> inflow = model.inflow();
    if (const auto* m = std::get_if<InflowMultiplier>(&spec.inflow_override)) {
        for (double& x : inflow) {
            x *= m->factor;
        }
    } else if (const auto* a = std::get_if<InflowAbsolute>(&spec.inflow_override)) {
        for (const auto& [label, value] : a->values) {
            const auto e = space.enrolled_index_of(label);
            if (!e) {
                throw ScenarioError(space.contains(label)
                                        ? "state '" + label + "' is absorbing and takes no inflow"
                                        : "unknown state '" + label + "'");
            }
            inflow[*e] = value;
        }
    }

    TransitionModel result(space, std::move(matrix), std::move(inflow), model.meta());
    require_valid(result);
    return result;
}

std::vector<StepDelta> compare(const ForecastTrajectory& baseline, const ForecastTrajectory& scenario) {
    if (baseline.horizon != scenario.horizon || baseline.points.size() != scenario.points.size()) {
        throw ArgumentError("cannot compare trajectories with horizons " +
                            std::to_string(baseline.horizon) + " and " +
                            std::to_string(scenario.horizon));
    }
    std::vector<StepDelta> deltas;
    deltas.reserve(baseline.points.size());
    for (std::size_t k = 0; k < baseline.points.size(); ++k) {
        const StateVector& b = baseline.points[k].vector;
        const StateVector& s = scenario.points[k].vector;
        if (b.size() != s.size()) {
            throw ArgumentError("cannot compare trajectories over different state spaces");
        }
        StepDelta delta{baseline.points[k].step, std::vector<double>(b.size()), 0.0};
        for (std::size_t e = 0; e < b.size(); ++e) {
            delta.per_state[e] = s[e] - b[e];
        }
        delta.total = s.total() - b.total();
        deltas.push_back(std::move(delta));
    }
    return deltas;
}

} // namespace cohortflow
