#pragma once

#include <cohortflow/domain.hpp>
#include <cohortflow/ingestion.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace cohortflow::testing {

/// Freshman/Sophomore/Junior plus a Departed column that receives no mass.
inline StateSpace three_stage_space() {
    return StateSpace({"Freshman", "Sophomore", "Junior", "Departed"},
                      {"Freshman", "Sophomore", "Junior"}, {"Departed"});
}

/// The worked 3x3 enrollment matrix, zero-padded with an empty Departed column.
inline TransitionModel worked_example_model(std::vector<double> inflow = {0.0, 0.0, 0.0}) {
    return TransitionModel(three_stage_space(),
                           Matrix::from_rows({{0.7, 0.2, 0.1, 0.0},
                                              {0.1, 0.6, 0.3, 0.0},
                                              {0.3, 0.3, 0.4, 0.0}}),
                           std::move(inflow));
}

/// Worked matrix scaled by 0.95 with 5% of every row departing.
inline TransitionModel worked_example_with_departures(std::vector<double> inflow) {
    Matrix m = worked_example_model().matrix();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            m(r, c) *= 0.95;
        }
        m(r, 3) = 0.05;
    }
    return TransitionModel(three_stage_space(), std::move(m), std::move(inflow));
}

inline TransitionModel identity_model(const StateSpace& space, std::vector<double> inflow = {}) {
    Matrix m(space.enrolled_size(), space.size());
    for (std::size_t e = 0; e < space.enrolled_size(); ++e) {
        m(e, space.column_of_enrolled(e)) = 1.0;
    }
    if (inflow.empty()) {
        inflow.assign(space.enrolled_size(), 0.0);
    }
    return TransitionModel(space, std::move(m), std::move(inflow));
}

/// Random state space with 1..6 enrolled and 1..3 absorbing states, labels shuffled.
inline StateSpace random_space(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_enrolled(1, 6);
    std::uniform_int_distribution<int> n_absorbing(1, 3);
    std::vector<std::string> enrolled;
    std::vector<std::string> absorbing;
    for (int i = n_enrolled(rng); i > 0; --i) {
        enrolled.push_back("E" + std::to_string(enrolled.size()));
    }
    for (int i = n_absorbing(rng); i > 0; --i) {
        absorbing.push_back("A" + std::to_string(absorbing.size()));
    }
    std::vector<std::string> states = enrolled;
    states.insert(states.end(), absorbing.begin(), absorbing.end());
    std::shuffle(states.begin(), states.end(), rng);
    return StateSpace(states, enrolled, absorbing);
}

/// Random valid model: rows drawn from scaled exponentials, some cells forced to zero.
inline TransitionModel random_model(std::mt19937_64& rng, const StateSpace& space,
                                    double max_inflow = 500.0) {
    std::exponential_distribution<double> expo(1.0);
    std::bernoulli_distribution sparse(0.25);
    std::uniform_real_distribution<double> inflow_dist(0.0, max_inflow);
    Matrix m(space.enrolled_size(), space.size());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            m(r, c) = sparse(rng) ? 0.0 : expo(rng);
            total += m(r, c);
        }
        if (total == 0.0) {
            m(r, space.column_of_enrolled(r)) = 1.0;
            continue;
        }
        for (std::size_t c = 0; c < m.cols(); ++c) {
            m(r, c) /= total;
        }
    }
    std::vector<double> inflow(space.enrolled_size());
    for (double& x : inflow) {
        x = sparse(rng) ? 0.0 : inflow_dist(rng);
    }
    return TransitionModel(space, std::move(m), std::move(inflow));
}

inline StateVector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 10000.0) {
    std::uniform_real_distribution<double> dist(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) {
        x = dist(rng);
    }
    return StateVector(std::move(v));
}

inline double linf(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
        }
    }
    return worst;
}

inline std::filesystem::path make_temp_dir(const std::string& stem) {
    static std::uint64_t counter = 0;
    const auto stamp = std::random_device{}();
    const auto dir = std::filesystem::temp_directory_path() /
                     (stem + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace cohortflow::testing
