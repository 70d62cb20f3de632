#pragma once

#include "cohortflow/domain.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cohortflow {

/// Header every snapshot CSV starts with.
inline constexpr std::string_view kSnapshotCsvHeader = "term_index,term_label,student_id,state";

/// Parses snapshot CSV (LF or CRLF, RFC-4180 quoting) into one snapshot per term,
/// sorted by term index. Throws ParseError with the 1-based line number.
std::vector<EnrollmentSnapshot> parse_snapshot_csv(std::string_view text, const StateSpace& space);

/// Inverse of parse_snapshot_csv: rows ordered by term then student id.
std::string write_snapshot_csv(const std::vector<EnrollmentSnapshot>& snapshots);

struct PathEntry {
    TermId term;
    std::string state;
    /// False for StopOut/Departed entries filled in by reconstruction.
    bool observed = true;

    friend bool operator==(const PathEntry&, const PathEntry&) = default;
};

/// One student's consecutive path from first appearance to a terminal state or
/// to the final observed term (right-censored).
struct Trajectory {
    std::string student_id;
    std::vector<PathEntry> path;
    /// True when the path was cut by the end of the data rather than a terminal state.
    bool censored = false;

    /// State at term `index`, or nullptr when the path does not cover it.
    const std::string* state_at(int index) const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Reconstructs per-student paths. Terms a student skipped before reappearing
/// become StopOut; a student who disappears for good gets Departed one term after
/// their last row unless that row is already absorbing. Students present in the
/// final snapshot are right-censored. Throws StructureError on non-consecutive
/// terms, an absorbing state followed by more rows, or a required fill label
/// missing from the space.
std::vector<Trajectory> build_trajectories(const std::vector<EnrollmentSnapshot>& snapshots,
                                           const StateSpace& space);

/// Drops synthesized StopOut/Departed entries and regroups by term; the result
/// equals the snapshots the trajectories were built from.
std::vector<EnrollmentSnapshot> project_to_snapshots(const std::vector<Trajectory>& trajectories,
                                                     const std::vector<TermId>& terms);

enum class InflowMode {
    /// round(I[e]) new students every term.
    FixedPerTerm,
    /// floor(I[e]) plus one more with probability frac(I[e]); preserves the expectation.
    StochasticRounding,
};

struct SyntheticConfig {
    TransitionModel true_model;
    StateVector initial_counts;
    int n_terms = 2;
    InflowMode inflow_mode = InflowMode::FixedPerTerm;
    std::uint64_t seed = 0;
    /// Term labels become `label_prefix` + index.
    std::string label_prefix = "T";
};

/// Seeded cohort simulation used as the estimation oracle. Students entering an
/// absorbing state get a terminal row at that term and leave. Output is
/// bit-identical for a fixed seed.
std::vector<EnrollmentSnapshot> generate_synthetic(const SyntheticConfig& cfg);

/// Headcount per enrolled state in a roster; absorbing rows are not counted.
StateVector enrolled_headcount(const EnrollmentSnapshot& snapshot, const StateSpace& space);

/// Serializes a model to the JSON document format. Throws ValidationError on an invalid model.
std::string write_model(const TransitionModel& model);

/// Parses and validates a model document. Throws ParseError on schema problems
/// and ValidationError on broken stochastic invariants.
TransitionModel read_model(std::string_view text);

} // namespace cohortflow
