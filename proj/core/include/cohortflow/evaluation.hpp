#pragma once

#include "cohortflow/domain.hpp"
#include "cohortflow/estimation.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cohortflow {

/// (actual - projected) / projected * 100. Throws ArgumentError when projected <= 0.
double difference_pct(double projected, double actual);

/// Signed mean of per-period differences. Throws ArgumentError when empty.
double bias_pct(std::span<const double> differences);

/// Mean of absolute per-period differences. Throws ArgumentError when empty.
double mean_abs_difference_pct(std::span<const double> differences);

struct BacktestConfig {
    FitConfig fit;
    int horizon = 1;
    /// Count StopOut toward enrolled headcount when scoring.
    bool include_stopout = false;
    /// Fill EvaluationRow::per_state.
    bool per_state = false;
    /// Score this model instead of fitting one on the training window.
    std::optional<TransitionModel> model;
};

/// Fits on terms up to and including `train_through`, projects `horizon` steps from
/// that term's enrolled roster, and scores each step against the held-out snapshot.
/// Throws ArgumentError when the data cannot cover the split and horizon.
EvaluationReport backtest(const std::vector<EnrollmentSnapshot>& snapshots, int train_through,
                          const BacktestConfig& config);

/// Aligned text table with columns Year / Projected / Actual / Difference (%).
std::string format_report_table(const EvaluationReport& report);

} // namespace cohortflow
