#include "cohortflow/evaluation.hpp"

#include "cohortflow/forecast.hpp"
#include "cohortflow/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace cohortflow {

double difference_pct(double projected, double actual) {
    if (!(projected > 0.0) || !std::isfinite(projected)) {
        throw ArgumentError("difference needs a positive projected value, got " +
                            format_number(projected));
    }
    return (actual - projected) / projected * 100.0;
}

double bias_pct(std::span<const double> differences) {
    if (differences.empty()) {
        throw ArgumentError("bias of an empty difference list");
    }
    return std::accumulate(differences.begin(), differences.end(), 0.0) /
           static_cast<double>(differences.size());
}

double mean_abs_difference_pct(std::span<const double> differences) {
    if (differences.empty()) {
        throw ArgumentError("mean absolute difference of an empty list");
    }
    double total = 0.0;
    for (const double d : differences) {
        total += std::abs(d);
    }
    return total / static_cast<double>(differences.size());
}

namespace {

double headcount(const StateVector& v, const StateSpace& space, bool include_stopout) {
    double total = 0.0;
    for (std::size_t e = 0; e < v.size(); ++e) {
        if (!include_stopout && space.enrolled()[e] == kStopOutLabel) {
            continue;
        }
        total += v[e];
    }
    return total;
}

} // namespace

EvaluationReport backtest(const std::vector<EnrollmentSnapshot>& snapshots, int train_through,
                          const BacktestConfig& config) {
    if (config.horizon < 1) {
        throw ArgumentError("backtest horizon must be >= 1, got " + std::to_string(config.horizon));
    }
    const auto split = std::find_if(snapshots.begin(), snapshots.end(), [&](const auto& s) {
        return s.term.index == train_through;
    });
    if (split == snapshots.end()) {
        throw ArgumentError("train_through term " + std::to_string(train_through) +
                            " is not in the data");
    }
    const auto split_pos = static_cast<std::size_t>(split - snapshots.begin());
    const std::size_t held_out = snapshots.size() - split_pos - 1;
    if (held_out < static_cast<std::size_t>(config.horizon)) {
        throw ArgumentError("horizon " + std::to_string(config.horizon) + " needs " +
                            std::to_string(config.horizon) + " held-out terms after term " +
                            std::to_string(train_through) + ", data has " +
                            std::to_string(held_out));
    }
    for (std::size_t k = split_pos + 1; k <= split_pos + static_cast<std::size_t>(config.horizon); ++k) {
        if (snapshots[k].term.index != snapshots[k - 1].term.index + 1) {
            throw StructureError("held-out terms must be consecutive");
        }
    }

    const std::vector<EnrollmentSnapshot> training(snapshots.begin(), split + 1);
    const TransitionModel model = config.model ? *config.model : fit(training, config.fit);
    require_valid(model);
    const StateSpace& space = model.space();

    const StateVector v0 = enrolled_headcount(*split, space);
    const ForecastTrajectory forecast = project(v0, model, config.horizon);

    EvaluationReport report;
    std::vector<double> differences;
    for (int k = 1; k <= config.horizon; ++k) {
        const EnrollmentSnapshot& truth = snapshots[split_pos + static_cast<std::size_t>(k)];
        const StateVector& projected = forecast.points[static_cast<std::size_t>(k)].vector;
        const StateVector actual = enrolled_headcount(truth, space);

        EvaluationRow row;
        row.period = truth.term.label;
        row.projected = headcount(projected, space, config.include_stopout);
        row.actual = headcount(actual, space, config.include_stopout);
        if (row.projected > 0.0) {
            row.difference_pct = difference_pct(row.projected, row.actual);
            differences.push_back(*row.difference_pct);
        }
        if (config.per_state) {
            for (std::size_t e = 0; e < space.enrolled_size(); ++e) {
                row.per_state[space.enrolled()[e]] = {projected[e], actual[e]};
            }
        }
        report.rows.push_back(std::move(row));
    }
    if (differences.empty()) {
        throw ArgumentError("no held-out term has a positive projected headcount");
    }
    report.bias_pct = bias_pct(differences);
    report.mean_abs_difference_pct = mean_abs_difference_pct(differences);
    return report;
}

namespace {

std::string with_thousands(double value) {
    const long long rounded = std::llround(value);
    std::string digits = std::to_string(rounded < 0 ? -rounded : rounded);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) {
            out.push_back(',');
        }
        out.push_back(digits[i]);
    }
    return rounded < 0 ? "-" + out : out;
}

std::string two_decimals(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    // Keep "-0.00" out of reports.
    return std::string(buf) == "-0.00" ? "0.00" : buf;
}

} // namespace

std::string format_report_table(const EvaluationReport& report) {
    const std::vector<std::string> header{"Year", "Projected", "Actual", "Difference (%)"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : report.rows) {
        cells.push_back({row.period, with_thousands(row.projected), with_thousands(row.actual),
                         row.difference_pct ? two_decimals(*row.difference_pct) : "n/a"});
    }
    std::vector<std::size_t> widths;
    for (const auto& h : header) {
        widths.push_back(h.size());
    }
    for (const auto& r : cells) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            widths[c] = std::max(widths[c], r[c].size());
        }
    }

    auto emit = [&](const std::vector<std::string>& r, std::string& out) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            const std::string pad(widths[c] - r[c].size(), ' ');
            if (c > 0) {
                out += "  ";
            }
            // Period left-aligned, numbers right-aligned.
            out += c == 0 ? r[c] + pad : pad + r[c];
        }
        out.push_back('\n');
    };

    std::string out;
    emit(header, out);
    std::size_t rule = 0;
    for (const auto w : widths) {
        rule += w;
    }
    out += std::string(rule + 2 * (widths.size() - 1), '-') + "\n";
    for (const auto& r : cells) {
        emit(r, out);
    }
    out += "Bias (%): " + two_decimals(report.bias_pct) + "\n";
    out += "Mean |Difference| (%): " + two_decimals(report.mean_abs_difference_pct) + "\n";
    return out;
}

} // namespace cohortflow
