#pragma once

#include "cohortflow/domain.hpp"
#include "cohortflow/ingestion.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cohortflow {

/// Integer transition tallies for one pair of consecutive terms.
struct TransitionCounts {
    TermPair term_pair;
    /// |enrolled| x |states|; row i totals the students in enrolled state i at the
    /// from-term who are still observed at the to-term.
    Matrix counts;
    /// Students first appearing at the to-term, per enrolled state.
    std::vector<double> inflow_counts;
    /// No transitions and no entrants were found for this pair.
    bool empty = true;
};

TransitionCounts count_transitions(const std::vector<Trajectory>& trajectories,
                                   const TermPair& term_pair, const StateSpace& space);

/// Weighted element-wise sum of count matrices. Throws ArgumentError on length or
/// shape mismatch, negative weights, or all-zero weights.
Matrix pool_counts(const std::vector<TransitionCounts>& per_pair, const std::vector<double>& weights);

struct MatrixEstimate {
    Matrix matrix;
    /// One message per row that had no observations and was imputed as a self-loop.
    std::vector<std::string> diagnostics;
};

/// Additive (Laplace) smoothing: p[i][j] = (n[i][j] + alpha) / (n_i + alpha * |states|).
/// With alpha = 0 an empty row becomes a self-loop and a diagnostic is attached.
MatrixEstimate estimate_matrix(const Matrix& pooled, double alpha, const StateSpace& space);

enum class InflowPolicy { Mean, WeightedMean, Last };

std::string to_string(InflowPolicy policy);
/// Accepts "mean", "weighted-mean", "last". Throws ArgumentError otherwise.
InflowPolicy parse_inflow_policy(std::string_view text);

/// Combines per-pair entrant counts. `weights` is only consulted by WeightedMean.
std::vector<double> estimate_inflow(const std::vector<std::vector<double>>& per_pair_inflows,
                                    InflowPolicy policy, const std::vector<double>& weights = {});

/// Exponential recency weights decay^age, age 0 for the most recent of `n` pairs.
std::vector<double> decay_weights(std::size_t n, double decay);

struct FitConfig {
    StateSpace space = StateSpace::standard();
    double alpha = 0.0;
    /// Explicit pooling weights, one per used term pair, oldest first.
    std::optional<std::vector<double>> weights;
    /// Exponential decay factor in (0, 1]; ignored when `weights` is set.
    std::optional<double> decay;
    InflowPolicy inflow_policy = InflowPolicy::Mean;
    /// Keep only pairs whose from-term has this term type.
    std::optional<std::string> term_type_filter;
    /// Stored verbatim in meta.created.
    std::string created;
};

/// Counts every used term pair (in parallel) and returns them oldest first.
std::vector<TransitionCounts> count_all_pairs(const std::vector<Trajectory>& trajectories,
                                              const std::vector<TermPair>& pairs,
                                              const StateSpace& space);

/// Snapshots -> trajectories -> per-pair counts -> pooled matrix + inflow.
/// Throws ArgumentError with fewer than 2 snapshots or no usable pairs.
TransitionModel fit(const std::vector<EnrollmentSnapshot>& snapshots, const FitConfig& config);

} // namespace cohortflow
