#include "cohortflow/estimation.hpp"

#include <cmath>
#include <future>
#include <numeric>

namespace cohortflow {

TransitionCounts count_transitions(const std::vector<Trajectory>& trajectories,
                                   const TermPair& term_pair, const StateSpace& space) {
    if (term_pair.to.index != term_pair.from.index + 1) {
        throw ArgumentError("term pair must be consecutive, got " +
                            std::to_string(term_pair.from.index) + " -> " +
                            std::to_string(term_pair.to.index));
    }
    TransitionCounts result{term_pair, Matrix(space.enrolled_size(), space.size()),
                            std::vector<double>(space.enrolled_size(), 0.0), true};

    for (const auto& trajectory : trajectories) {
        const std::string* from = trajectory.state_at(term_pair.from.index);
        const std::string* to = trajectory.state_at(term_pair.to.index);
        if (to == nullptr) {
            continue;
        }
        if (from != nullptr) {
            const auto row = space.enrolled_index_of(*from);
            const auto col = space.index_of(*to);
            if (!row || !col) {
                throw StructureError("student '" + trajectory.student_id +
                                     "' has an uncountable transition " + *from + " -> " + *to);
            }
            result.counts(*row, *col) += 1.0;
            result.empty = false;
        } else if (trajectory.path.front().term.index == term_pair.to.index) {
            if (const auto e = space.enrolled_index_of(*to)) {
                result.inflow_counts[*e] += 1.0;
                result.empty = false;
            }
        }
    }
    return result;
}

Matrix pool_counts(const std::vector<TransitionCounts>& per_pair, const std::vector<double>& weights) {
    if (per_pair.empty()) {
        throw ArgumentError("nothing to pool");
    }
    if (weights.size() != per_pair.size()) {
        throw ArgumentError("got " + std::to_string(weights.size()) + " weights for " +
                            std::to_string(per_pair.size()) + " term pairs");
    }
    bool any_positive = false;
    for (const double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw ArgumentError("pooling weights must be finite and >= 0, got " + format_number(w));
        }
        any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) {
        throw ArgumentError("at least one pooling weight must be positive");
    }

    const std::size_t rows = per_pair.front().counts.rows();
    const std::size_t cols = per_pair.front().counts.cols();
    Matrix pooled(rows, cols);
    for (std::size_t k = 0; k < per_pair.size(); ++k) {
        const Matrix& counts = per_pair[k].counts;
        if (counts.rows() != rows || counts.cols() != cols) {
            throw ArgumentError("count matrices have different shapes");
        }
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                pooled(r, c) += weights[k] * counts(r, c);
            }
        }
    }
    return pooled;
}

MatrixEstimate estimate_matrix(const Matrix& pooled, double alpha, const StateSpace& space) {
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw ArgumentError("smoothing alpha must be finite and >= 0, got " + format_number(alpha));
    }
    if (pooled.rows() != space.enrolled_size() || pooled.cols() != space.size()) {
        throw ArgumentError("pooled counts do not match the state space");
    }
    MatrixEstimate estimate{Matrix(pooled.rows(), pooled.cols()), {}};
    const double n_states = static_cast<double>(space.size());
    for (std::size_t r = 0; r < pooled.rows(); ++r) {
        double total = 0.0;
        for (const double n : pooled.row(r)) {
            if (!std::isfinite(n) || n < 0.0) {
                throw ArgumentError("pooled count in row '" + space.enrolled()[r] +
                                    "' is negative or non-finite: " + format_number(n));
            }
            total += n;
        }
        if (total == 0.0 && alpha == 0.0) {
            estimate.matrix(r, space.column_of_enrolled(r)) = 1.0;
            estimate.diagnostics.push_back("row '" + space.enrolled()[r] +
                                           "' has no observations; imputed as a self-loop");
            continue;
        }
        const double denominator = total + alpha * n_states;
        for (std::size_t c = 0; c < pooled.cols(); ++c) {
            estimate.matrix(r, c) = (pooled(r, c) + alpha) / denominator;
        }
    }
    return estimate;
}

std::string to_string(InflowPolicy policy) {
    switch (policy) {
    case InflowPolicy::Mean:
        return "mean";
    case InflowPolicy::WeightedMean:
        return "weighted-mean";
    case InflowPolicy::Last:
        return "last";
    }
    return "mean";
}

InflowPolicy parse_inflow_policy(std::string_view text) {
    if (text == "mean") {
        return InflowPolicy::Mean;
    }
    if (text == "weighted-mean") {
        return InflowPolicy::WeightedMean;
    }
    if (text == "last") {
        return InflowPolicy::Last;
    }
    throw ArgumentError("unknown inflow policy '" + std::string(text) +
                        "' (expected mean, weighted-mean or last)");
}

std::vector<double> estimate_inflow(const std::vector<std::vector<double>>& per_pair_inflows,
                                    InflowPolicy policy, const std::vector<double>& weights) {
    if (per_pair_inflows.empty()) {
        throw ArgumentError("inflow estimate needs at least one term pair");
    }
    const std::size_t n_states = per_pair_inflows.front().size();
    for (const auto& inflow : per_pair_inflows) {
        if (inflow.size() != n_states) {
            throw ArgumentError("per-pair inflow vectors have different lengths");
        }
    }
    if (policy == InflowPolicy::Last) {
        return per_pair_inflows.back();
    }

    std::vector<double> w(per_pair_inflows.size(), 1.0);
    if (policy == InflowPolicy::WeightedMean) {
        if (weights.size() != per_pair_inflows.size()) {
            throw ArgumentError("weighted-mean inflow needs one weight per term pair");
        }
        w = weights;
    }
    const double weight_total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(weight_total > 0.0)) {
        throw ArgumentError("inflow weights must have a positive total");
    }
    std::vector<double> result(n_states, 0.0);
    for (std::size_t k = 0; k < per_pair_inflows.size(); ++k) {
        for (std::size_t e = 0; e < n_states; ++e) {
            result[e] += w[k] * per_pair_inflows[k][e];
        }
    }
    for (double& x : result) {
        x /= weight_total;
    }
    return result;
}

std::vector<double> decay_weights(std::size_t n, double decay) {
    if (!std::isfinite(decay) || decay <= 0.0 || decay > 1.0) {
        throw ArgumentError("decay must be in (0, 1], got " + format_number(decay));
    }
    std::vector<double> weights(n);
    for (std::size_t k = 0; k < n; ++k) {
        weights[k] = std::pow(decay, static_cast<double>(n - 1 - k));
    }
    return weights;
}

std::vector<TransitionCounts> count_all_pairs(const std::vector<Trajectory>& trajectories,
                                              const std::vector<TermPair>& pairs,
                                              const StateSpace& space) {
    std::vector<std::future<TransitionCounts>> pending;
    pending.reserve(pairs.size());
    for (const auto& pair : pairs) {
        pending.push_back(std::async(std::launch::async, [&trajectories, &space, pair] {
            return count_transitions(trajectories, pair, space);
        }));
    }
    std::vector<TransitionCounts> counts;
    counts.reserve(pairs.size());
    for (auto& f : pending) {
        counts.push_back(f.get());
    }
    return counts;
}

TransitionModel fit(const std::vector<EnrollmentSnapshot>& snapshots, const FitConfig& config) {
    if (snapshots.size() < 2) {
        throw ArgumentError("fitting needs at least 2 snapshots, got " +
                            std::to_string(snapshots.size()));
    }
    const StateSpace& space = config.space;
    const auto trajectories = build_trajectories(snapshots, space);

    std::vector<TermPair> pairs;
    for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
        const TermId& from = snapshots[k].term;
        if (config.term_type_filter && from.term_type != *config.term_type_filter) {
            continue;
        }
        pairs.push_back({from, snapshots[k + 1].term});
    }
    if (pairs.empty()) {
        throw ArgumentError("no term pairs match term type '" +
                            config.term_type_filter.value_or("") + "'");
    }

    std::vector<double> weights(pairs.size(), 1.0);
    if (config.weights) {
        weights = *config.weights;
    } else if (config.decay) {
        weights = decay_weights(pairs.size(), *config.decay);
    }

    const auto counts = count_all_pairs(trajectories, pairs, space);
    const Matrix pooled = pool_counts(counts, weights);
    MatrixEstimate estimate = estimate_matrix(pooled, config.alpha, space);

    std::vector<std::vector<double>> inflows;
    inflows.reserve(counts.size());
    for (const auto& c : counts) {
        inflows.push_back(c.inflow_counts);
    }
    std::vector<double> inflow = estimate_inflow(inflows, config.inflow_policy, weights);

    ModelMeta meta;
    meta.alpha = config.alpha;
    meta.term_pairs = pairs;
    meta.weights = weights;
    meta.decay = config.weights ? std::nullopt : config.decay;
    meta.inflow_policy = to_string(config.inflow_policy);
    meta.term_type_filter = config.term_type_filter;
    meta.created = config.created;
    meta.diagnostics = std::move(estimate.diagnostics);
    for (const auto& c : counts) {
        if (c.empty) {
            meta.diagnostics.push_back("term pair " + c.term_pair.from.label + " -> " +
                                       c.term_pair.to.label + " has no observations");
        }
    }
    const StateVector last = enrolled_headcount(snapshots.back(), space);
    for (std::size_t e = 0; e < space.enrolled_size(); ++e) {
        meta.last_counts[space.enrolled()[e]] = last[e];
    }

    TransitionModel model(space, std::move(estimate.matrix), std::move(inflow), std::move(meta));
    if (const auto check = validate_model(model); !check.ok()) {
        throw Error("estimated model failed validation (internal error): " +
                    check.violations.front().message);
    }
    return model;
}

} // namespace cohortflow
