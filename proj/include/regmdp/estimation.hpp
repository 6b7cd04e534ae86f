#pragma once

#include "regmdp/data.hpp"
#include "regmdp/mdp.hpp"

#include <cstdint>

namespace regmdp {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Sufficient statistics of a dataset.
struct CountsTensor {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<CountMatrix> c; // c[a](s, s') transition counts
    Matrix reward_sum;          // N x |A|
    CountMatrix visit_count;    // N x |A|, row sums of c

    CountsTensor() = default;
    CountsTensor(std::size_t n, std::size_t na)
        : n_states(n), n_actions(na),
          c(na, CountMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
          reward_sum(Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(na))),
          visit_count(CountMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(na))) {}

    std::int64_t total() const { return visit_count.sum(); }

    void add(const Step& st) {
        const auto s = static_cast<Eigen::Index>(st.state);
        const auto a = static_cast<Eigen::Index>(st.action);
        c[st.action](s, static_cast<Eigen::Index>(st.next_state)) += 1;
        visit_count(s, a) += 1;
        reward_sum(s, a) += st.reward;
    }
};

inline constexpr double kUnvisitedReward = 0.50;

/// Maximum-likelihood model. Unvisited pairs get a uniform row and reward 0.50.
struct EstimatedModel {
    ActionMatrices t_hat;
    Matrix r_hat;
    CountMatrix visit_count;

    std::size_t n_states() const { return static_cast<std::size_t>(r_hat.rows()); }
    std::size_t n_actions() const { return static_cast<std::size_t>(r_hat.cols()); }
};

inline CountsTensor count(const Dataset& data, std::size_t n_states, std::size_t n_actions) {
    CountsTensor out(n_states, n_actions);
    for (std::size_t t = 0; t < data.size(); ++t)
        for (std::size_t k = 0; k < data[t].size(); ++k) {
            const auto& st = data[t][k];
            if (st.state >= n_states || st.next_state >= n_states || st.action >= n_actions)
                throw ArgumentError(detail::cat("trajectory ", t, " step ", k, ": index out of range (", st.state, ",",
                                                st.action, ",", st.next_state, ")"));
            out.add(st);
        }
    return out;
}

/**
 * Empirical transition frequencies and mean rewards. States listed in
 * `absorbing` always get r_hat = 0 since they pay nothing once entered.
 */
inline EstimatedModel mle_model(const CountsTensor& counts, const std::vector<std::size_t>& absorbing = {}) {
    const auto n = static_cast<Eigen::Index>(counts.n_states);
    const auto na = static_cast<Eigen::Index>(counts.n_actions);
    EstimatedModel m;
    m.t_hat.assign(counts.n_actions, Matrix::Zero(n, n));
    m.r_hat = Matrix::Zero(n, na);
    m.visit_count = counts.visit_count;
    const double uniform = 1.0 / static_cast<double>(n);
    for (Eigen::Index a = 0; a < na; ++a) {
        auto& t = m.t_hat[static_cast<std::size_t>(a)];
        const auto& c = counts.c[static_cast<std::size_t>(a)];
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto visits = counts.visit_count(s, a);
            if (visits == 0) {
                t.row(s).setConstant(uniform);
                m.r_hat(s, a) = kUnvisitedReward;
                continue;
            }
            const double v = static_cast<double>(visits);
            for (Eigen::Index j = 0; j < n; ++j) t(s, j) = static_cast<double>(c(s, j)) / v;
            m.r_hat(s, a) = counts.reward_sum(s, a) / v;
        }
    }
    for (auto s : absorbing) m.r_hat.row(static_cast<Eigen::Index>(s)).setZero();
    return m;
}

} // namespace regmdp
