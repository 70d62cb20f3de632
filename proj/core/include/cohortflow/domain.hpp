#pragma once

#include "cohortflow/errors.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cohortflow {

/// Tolerance for a transition row summing to one.
inline constexpr double kRowSumTolerance = 1e-9;

/// Longest projection accepted by the forecast engine.
inline constexpr int kMaxHorizon = 1000;

/// Label used to fill terms a student skipped before reappearing.
inline constexpr std::string_view kStopOutLabel = "StopOut";
/// Label assigned to students who vanish without an explicit terminal row.
inline constexpr std::string_view kDepartedLabel = "Departed";

/// Ordered set of state labels split into enrolled (counted, have a matrix row)
/// and absorbing (terminal, column only) states.
class StateSpace {
public:
    /// Validates the partition. Throws ValidationError.
    StateSpace(std::vector<std::string> states, std::vector<std::string> enrolled,
               std::vector<std::string> absorbing);

    /// Freshman, Sophomore, Junior, Senior, StopOut / Graduated, Departed.
    static StateSpace standard();

    const std::vector<std::string>& states() const noexcept { return states_; }
    const std::vector<std::string>& enrolled() const noexcept { return enrolled_; }
    const std::vector<std::string>& absorbing() const noexcept { return absorbing_; }

    std::size_t size() const noexcept { return states_.size(); }
    std::size_t enrolled_size() const noexcept { return enrolled_.size(); }

    /// Position of `label` in states(), or nullopt.
    std::optional<std::size_t> index_of(std::string_view label) const;
    /// Position of `label` in enrolled(), or nullopt.
    std::optional<std::size_t> enrolled_index_of(std::string_view label) const;
    /// Column in the transition matrix for the i-th enrolled state.
    std::size_t column_of_enrolled(std::size_t enrolled_index) const {
        return enrolled_columns_.at(enrolled_index);
    }
    std::span<const std::size_t> absorbing_columns() const noexcept { return absorbing_columns_; }

    bool contains(std::string_view label) const { return index_of(label).has_value(); }
    bool is_enrolled(std::string_view label) const { return enrolled_index_of(label).has_value(); }
    bool is_absorbing(std::string_view label) const {
        return contains(label) && !is_enrolled(label);
    }

    friend bool operator==(const StateSpace& a, const StateSpace& b) {
        return a.states_ == b.states_ && a.enrolled_ == b.enrolled_ &&
               a.absorbing_ == b.absorbing_;
    }

private:
    std::vector<std::string> states_;
    std::vector<std::string> enrolled_;
    std::vector<std::string> absorbing_;
    std::vector<std::size_t> enrolled_columns_;
    std::vector<std::size_t> absorbing_columns_;
};

/// Position of `label` in `space`'s ordered state list.
std::optional<std::size_t> state_index(const StateSpace& space, std::string_view label);

struct TermId {
    int index = 0;
    std::string label;
    std::string term_type;

    friend bool operator==(const TermId&, const TermId&) = default;
};

/// Seasonality tag derived from a term label: its leading letters, lower-cased
/// ("Fall2018" -> "fall", "W19" -> "w"). Empty when the label starts with a digit.
std::string term_type_from_label(std::string_view label);

/// One census: student id -> state label.
struct EnrollmentSnapshot {
    TermId term;
    std::map<std::string, std::string> roster;

    friend bool operator==(const EnrollmentSnapshot&, const EnrollmentSnapshot&) = default;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_{rows}, cols_{cols}, data_(rows * cols, fill) {}
    /// Throws ValidationError on ragged input.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<std::vector<double>> to_rows() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct TermPair {
    TermId from;
    TermId to;

    friend bool operator==(const TermPair&, const TermPair&) = default;
};

/// Provenance recorded by estimation and carried through persistence.
struct ModelMeta {
    double alpha = 0.0;
    std::vector<TermPair> term_pairs;
    std::vector<double> weights;
    std::optional<double> decay;
    std::string inflow_policy;
    std::optional<std::string> term_type_filter;
    std::string created;
    std::vector<std::string> diagnostics;
    /// Enrolled headcount at the last fitted term, keyed by label.
    std::map<std::string, double> last_counts;

    friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

/// State space, |enrolled| x |states| transition matrix, and per-term inflow.
/// Construction checks shape only; use validate_model for the stochastic contract.
class TransitionModel {
public:
    /// Throws ValidationError on dimension mismatch.
    TransitionModel(StateSpace space, Matrix matrix, std::vector<double> inflow,
                    ModelMeta meta = {});

    const StateSpace& space() const noexcept { return space_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    const std::vector<double>& inflow() const noexcept { return inflow_; }
    const ModelMeta& meta() const noexcept { return meta_; }

    double probability(std::string_view from, std::string_view to) const;
    double inflow_total() const;

    TransitionModel with_matrix(Matrix matrix) const;
    TransitionModel with_inflow(std::vector<double> inflow) const;
    TransitionModel with_meta(ModelMeta meta) const;

    friend bool operator==(const TransitionModel&, const TransitionModel&) = default;

private:
    StateSpace space_;
    Matrix matrix_;
    std::vector<double> inflow_;
    ModelMeta meta_;
};

struct Violation {
    enum class Kind { NegativeEntry, EntryAboveOne, NonFiniteEntry, RowSum, Inflow };

    Kind kind;
    std::size_t row = 0;
    std::optional<std::size_t> column;
    double value = 0.0;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    explicit operator bool() const noexcept { return ok(); }
    friend bool operator==(const ValidationResult&, const ValidationResult&) = default;
};

/// Reports every broken invariant of `model` with row/column coordinates.
ValidationResult validate_model(const TransitionModel& model);

/// Throws ValidationError carrying all violation messages if the model is invalid.
void require_valid(const TransitionModel& model);

/// Formats a number for error messages (up to 10 significant digits).
std::string format_number(double value);

/// Expected headcount per enrolled state.
class StateVector {
public:
    StateVector() = default;
    /// Throws ValidationError on negative or non-finite entries.
    explicit StateVector(std::vector<double> counts);

    /// Builds a vector over `space.enrolled()` from label -> count; missing labels are zero.
    /// Throws ScenarioError on unknown or non-enrolled labels.
    static StateVector from_labels(const StateSpace& space,
                                   const std::map<std::string, double>& counts);

    std::span<const double> counts() const noexcept { return counts_; }
    std::size_t size() const noexcept { return counts_.size(); }
    double operator[](std::size_t i) const { return counts_[i]; }
    double total() const;

    friend bool operator==(const StateVector&, const StateVector&) = default;

private:
    std::vector<double> counts_;
};

struct CellOverride {
    std::string from;
    std::string to;
    double probability = 0.0;

    friend bool operator==(const CellOverride&, const CellOverride&) = default;
};

struct InflowMultiplier {
    double factor = 1.0;
    friend bool operator==(const InflowMultiplier&, const InflowMultiplier&) = default;
};

struct InflowAbsolute {
    std::map<std::string, double> values;
    friend bool operator==(const InflowAbsolute&, const InflowAbsolute&) = default;
};

using InflowOverride = std::variant<std::monostate, InflowMultiplier, InflowAbsolute>;

/// What-if edits to a model: fixed cells, inflow changes, and a projection horizon.
struct ScenarioSpec {
    std::vector<CellOverride> cell_overrides;
    InflowOverride inflow_override;
    int horizon = 1;

    bool empty() const noexcept {
        return cell_overrides.empty() && std::holds_alternative<std::monostate>(inflow_override);
    }

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Checks the spec against itself (ranges, per-row sums, horizon). Throws ScenarioError.
void validate_scenario(const ScenarioSpec& spec);

struct EvaluationRow {
    std::string period;
    double projected = 0.0;
    double actual = 0.0;
    /// Absent when the projected total is zero.
    std::optional<double> difference_pct;
    /// Per-state projected/actual, filled only in verbose backtests.
    std::map<std::string, std::pair<double, double>> per_state;

    friend bool operator==(const EvaluationRow&, const EvaluationRow&) = default;
};

struct EvaluationReport {
    std::vector<EvaluationRow> rows;
    double bias_pct = 0.0;
    double mean_abs_difference_pct = 0.0;

    friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

} // namespace cohortflow
