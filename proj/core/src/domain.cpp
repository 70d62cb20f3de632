#include "cohortflow/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

namespace cohortflow {

namespace {

std::optional<std::size_t> find_label(const std::vector<std::string>& labels,
                                      std::string_view label) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - labels.begin());
}

} // namespace

StateSpace::StateSpace(std::vector<std::string> states, std::vector<std::string> enrolled,
                       std::vector<std::string> absorbing)
    : states_{std::move(states)}, enrolled_{std::move(enrolled)}, absorbing_{std::move(absorbing)} {
    if (enrolled_.empty()) {
        throw ValidationError("state space needs at least one enrolled state");
    }
    if (absorbing_.empty()) {
        throw ValidationError("state space needs at least one absorbing state");
    }

    std::set<std::string_view> seen;
    for (const auto& label : states_) {
        if (label.empty()) {
            throw ValidationError("state labels must be non-empty");
        }
        if (!seen.insert(label).second) {
            throw ValidationError("duplicate state label '" + label + "'");
        }
    }

    std::set<std::string_view> classified;
    auto classify = [&](const std::vector<std::string>& group, const char* name) {
        for (const auto& label : group) {
            if (!seen.contains(label)) {
                throw ValidationError(std::string(name) + " label '" + label +
                                      "' is not a declared state");
            }
            if (!classified.insert(label).second) {
                throw ValidationError("state '" + label +
                                      "' must be exactly one of enrolled or absorbing");
            }
        }
    };
    classify(enrolled_, "enrolled");
    classify(absorbing_, "absorbing");
    if (classified.size() != states_.size()) {
        for (const auto& label : states_) {
            if (!classified.contains(label)) {
                throw ValidationError("state '" + label +
                                      "' is neither enrolled nor absorbing");
            }
        }
    }

    enrolled_columns_.reserve(enrolled_.size());
    for (const auto& label : enrolled_) {
        enrolled_columns_.push_back(*find_label(states_, label));
    }
    for (std::size_t c = 0; c < states_.size(); ++c) {
        if (!find_label(enrolled_, states_[c])) {
            absorbing_columns_.push_back(c);
        }
    }
}

StateSpace StateSpace::standard() {
    return StateSpace(
        {"Freshman", "Sophomore", "Junior", "Senior", "StopOut", "Graduated", "Departed"},
        {"Freshman", "Sophomore", "Junior", "Senior", "StopOut"}, {"Graduated", "Departed"});
}

std::optional<std::size_t> StateSpace::index_of(std::string_view label) const {
    return find_label(states_, label);
}

std::optional<std::size_t> StateSpace::enrolled_index_of(std::string_view label) const {
    return find_label(enrolled_, label);
}

std::optional<std::size_t> state_index(const StateSpace& space, std::string_view label) {
    return space.index_of(label);
}

std::string term_type_from_label(std::string_view label) {
    std::string type;
    for (const char ch : label) {
        if (!std::isalpha(static_cast<unsigned char>(ch))) {
            break;
        }
        type.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return type;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) {
            throw ValidationError("matrix row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " columns, expected " +
                                  std::to_string(cols));
        }
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
    std::vector<std::vector<double>> out;
    out.reserve(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        const auto values = row(r);
        out.emplace_back(values.begin(), values.end());
    }
    return out;
}

TransitionModel::TransitionModel(StateSpace space, Matrix matrix, std::vector<double> inflow,
                                 ModelMeta meta)
    : space_{std::move(space)}, matrix_{std::move(matrix)}, inflow_{std::move(inflow)},
      meta_{std::move(meta)} {
    if (matrix_.rows() != space_.enrolled_size() || matrix_.cols() != space_.size()) {
        throw ValidationError("transition matrix must be " +
                              std::to_string(space_.enrolled_size()) + "x" +
                              std::to_string(space_.size()) + ", got " +
                              std::to_string(matrix_.rows()) + "x" +
                              std::to_string(matrix_.cols()));
    }
    if (inflow_.size() != space_.enrolled_size()) {
        throw ValidationError("inflow must have one entry per enrolled state");
    }
    // -0.0 is a legal zero; store it canonically so round-trips compare equal.
    for (std::size_t r = 0; r < matrix_.rows(); ++r) {
        for (double& p : matrix_.row(r)) {
            p += 0.0;
        }
    }
    for (double& x : inflow_) {
        x += 0.0;
    }
}

double TransitionModel::probability(std::string_view from, std::string_view to) const {
    const auto row = space_.enrolled_index_of(from);
    const auto col = space_.index_of(to);
    if (!row || !col) {
        throw ArgumentError("no transition cell " + std::string(from) + " -> " + std::string(to));
    }
    return matrix_(*row, *col);
}

double TransitionModel::inflow_total() const {
    return std::accumulate(inflow_.begin(), inflow_.end(), 0.0);
}

TransitionModel TransitionModel::with_matrix(Matrix matrix) const {
    return {space_, std::move(matrix), inflow_, meta_};
}

TransitionModel TransitionModel::with_inflow(std::vector<double> inflow) const {
    return {space_, matrix_, std::move(inflow), meta_};
}

TransitionModel TransitionModel::with_meta(ModelMeta meta) const {
    return {space_, matrix_, inflow_, std::move(meta)};
}

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

ValidationResult validate_model(const TransitionModel& model) {
    ValidationResult result;
    const Matrix& m = model.matrix();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        bool finite_row = true;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double p = m(r, c);
            const std::string where =
                "entry (" + std::to_string(r) + ", " + std::to_string(c) + ")";
            if (!std::isfinite(p)) {
                result.violations.push_back({Violation::Kind::NonFiniteEntry, r, c, p,
                                             where + " is not finite"});
                finite_row = false;
                continue;
            }
            if (p < 0.0) {
                result.violations.push_back({Violation::Kind::NegativeEntry, r, c, p,
                                             where + " is negative: " + format_number(p)});
            } else if (p > 1.0) {
                result.violations.push_back({Violation::Kind::EntryAboveOne, r, c, p,
                                             where + " exceeds 1: " + format_number(p)});
            }
            sum += p;
        }
        if (finite_row && std::abs(sum - 1.0) > kRowSumTolerance) {
            result.violations.push_back({Violation::Kind::RowSum, r, std::nullopt, sum,
                                         "row " + std::to_string(r) + " sums to " +
                                             format_number(sum)});
        }
    }
    const auto& inflow = model.inflow();
    for (std::size_t i = 0; i < inflow.size(); ++i) {
        if (!std::isfinite(inflow[i]) || inflow[i] < 0.0) {
            result.violations.push_back({Violation::Kind::Inflow, i, std::nullopt, inflow[i],
                                         "inflow for '" + model.space().enrolled()[i] +
                                             "' must be finite and >= 0, got " +
                                             format_number(inflow[i])});
        }
    }
    return result;
}

void require_valid(const TransitionModel& model) {
    const auto result = validate_model(model);
    if (result.ok()) {
        return;
    }
    std::string message = "invalid transition model:";
    for (const auto& v : result.violations) {
        message += " " + v.message + ";";
    }
    message.pop_back();
    throw ValidationError(message);
}

StateVector::StateVector(std::vector<double> counts) : counts_{std::move(counts)} {
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (!std::isfinite(counts_[i]) || counts_[i] < 0.0) {
            throw ValidationError("state vector entry " + std::to_string(i) +
                                  " must be finite and >= 0, got " + format_number(counts_[i]));
        }
        counts_[i] += 0.0;
    }
}

StateVector StateVector::from_labels(const StateSpace& space,
                                     const std::map<std::string, double>& counts) {
    std::vector<double> values(space.enrolled_size(), 0.0);
    for (const auto& [label, count] : counts) {
        const auto idx = space.enrolled_index_of(label);
        if (!idx) {
            throw ScenarioError(space.contains(label)
                                    ? "state '" + label + "' is absorbing and has no headcount"
                                    : "unknown state '" + label + "'");
        }
        values[*idx] = count;
    }
    return StateVector(std::move(values));
}

double StateVector::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

void validate_scenario(const ScenarioSpec& spec) {
    if (spec.horizon < 1 || spec.horizon > kMaxHorizon) {
        throw ScenarioError("scenario horizon must be in [1, " + std::to_string(kMaxHorizon) +
                            "], got " + std::to_string(spec.horizon));
    }
    std::map<std::string, double> row_sums;
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& o : spec.cell_overrides) {
        if (!std::isfinite(o.probability) || o.probability < 0.0 || o.probability > 1.0) {
            throw ScenarioError("override " + o.from + " -> " + o.to +
                                " must be in [0, 1], got " + format_number(o.probability));
        }
        if (!cells.emplace(o.from, o.to).second) {
            throw ScenarioError("duplicate override for " + o.from + " -> " + o.to);
        }
        row_sums[o.from] += o.probability;
    }
    for (const auto& [row, sum] : row_sums) {
        if (sum > 1.0 + kRowSumTolerance) {
            throw ScenarioError("overrides in row '" + row + "' sum to " + format_number(sum) +
                                " (> 1)");
        }
    }
    if (const auto* m = std::get_if<InflowMultiplier>(&spec.inflow_override)) {
        if (!std::isfinite(m->factor) || m->factor < 0.0) {
            throw ScenarioError("inflow multiplier must be finite and >= 0, got " +
                                format_number(m->factor));
        }
    } else if (const auto* a = std::get_if<InflowAbsolute>(&spec.inflow_override)) {
        for (const auto& [label, value] : a->values) {
            if (!std::isfinite(value) || value < 0.0) {
                throw ScenarioError("inflow for '" + label + "' must be finite and >= 0, got " +
                                    format_number(value));
            }
        }
    }
}

} // namespace cohortflow
