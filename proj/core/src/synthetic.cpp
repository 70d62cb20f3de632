#include "cohortflow/ingestion.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace cohortflow {

namespace {

// mt19937_64 is fully specified by the standard; the standard distributions are
// not, so draws are mapped to [0, 1) by hand to keep output identical across
// standard library implementations.
class UnitSampler {
public:
    explicit UnitSampler(std::uint64_t seed) : engine_{seed} {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::size_t categorical(std::span<const double> weights) {
        const double u = uniform();
        double cumulative = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) {
                continue;
            }
            cumulative += weights[i];
            last_positive = i;
            if (u < cumulative) {
                return i;
            }
        }
        return last_positive;
    }

private:
    std::mt19937_64 engine_;
};

struct ActiveStudent {
    std::string id;
    std::size_t enrolled_index;
};

std::string student_id(std::size_t serial) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%08zu", serial);
    return buf;
}

long whole_count(double expected, const char* what) {
    if (expected > 1e9) {
        throw ArgumentError(std::string(what) + " too large to simulate: " + format_number(expected));
    }
    return std::lround(expected);
}

} // namespace

std::vector<EnrollmentSnapshot> generate_synthetic(const SyntheticConfig& cfg) {
    require_valid(cfg.true_model);
    const StateSpace& space = cfg.true_model.space();
    const Matrix& matrix = cfg.true_model.matrix();
    if (cfg.n_terms < 2) {
        throw ArgumentError("synthetic data needs at least 2 terms, got " +
                            std::to_string(cfg.n_terms));
    }
    if (cfg.initial_counts.size() != space.enrolled_size()) {
        throw ArgumentError("initial counts must have one entry per enrolled state");
    }

    UnitSampler sampler(cfg.seed);
    std::size_t serial = 0;
    std::vector<ActiveStudent> active;
    std::vector<EnrollmentSnapshot> snapshots;
    snapshots.reserve(static_cast<std::size_t>(cfg.n_terms));

    auto term = [&](int index) {
        const std::string label = cfg.label_prefix + std::to_string(index);
        return TermId{index, label, term_type_from_label(label)};
    };

    snapshots.push_back({term(0), {}});
    for (std::size_t e = 0; e < space.enrolled_size(); ++e) {
        const long n = whole_count(cfg.initial_counts[e], "initial count");
        for (long i = 0; i < n; ++i) {
            active.push_back({student_id(serial++), e});
            snapshots.back().roster.emplace(active.back().id, space.enrolled()[e]);
        }
    }

    const auto& inflow = cfg.true_model.inflow();
    for (int t = 1; t < cfg.n_terms; ++t) {
        EnrollmentSnapshot snapshot{term(t), {}};
        std::vector<ActiveStudent> still_active;
        still_active.reserve(active.size());
        for (auto& student : active) {
            const std::size_t column = sampler.categorical(matrix.row(student.enrolled_index));
            const std::string& label = space.states()[column];
            snapshot.roster.emplace(student.id, label);
            if (const auto e = space.enrolled_index_of(label)) {
                student.enrolled_index = *e;
                still_active.push_back(std::move(student));
            }
        }
        active = std::move(still_active);

        for (std::size_t e = 0; e < space.enrolled_size(); ++e) {
            long entrants = 0;
            if (cfg.inflow_mode == InflowMode::FixedPerTerm) {
                entrants = whole_count(inflow[e], "inflow");
            } else {
                const double base = std::floor(inflow[e]);
                entrants = whole_count(base, "inflow");
                if (sampler.uniform() < inflow[e] - base) {
                    ++entrants;
                }
            }
            for (long i = 0; i < entrants; ++i) {
                active.push_back({student_id(serial++), e});
                snapshot.roster.emplace(active.back().id, space.enrolled()[e]);
            }
        }
        snapshots.push_back(std::move(snapshot));
    }
    return snapshots;
}

} // namespace cohortflow
