#pragma once

#include "regmdp/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace regmdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One N x N matrix per action; row s of element a is T(. | s, a).
using ActionMatrices = std::vector<Matrix>;

using ValueFunction = Vector;

/// N x |A| action values.
using QFunction = Matrix;

inline constexpr double kProbabilityTol = 1e-9;
inline constexpr double kTieTol = 1e-6;

/**
 * Finite tabular MDP.
 *
 * Rewards are kept per state-action pair as the mean and standard deviation
 * of a Gaussian. Environments whose reward depends on the destination store
 * the expected reward over destinations. Absorbing states are self-loops with
 * zero reward.
 */
struct TabularMdp {
    std::string name;
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    ActionMatrices transition;
    Matrix reward_mean;
    Matrix reward_std;
    double gamma = 0.95;
    Vector start_dist;
    std::vector<std::size_t> absorbing;

    bool is_absorbing(std::size_t s) const {
        for (auto a : absorbing)
            if (a == s) return true;
        return false;
    }

    bool operator==(const TabularMdp&) const = default;
};

/// Deterministic policy: one action index per state.
struct DeterministicPolicy {
    std::vector<std::size_t> action_of;

    DeterministicPolicy() = default;
    explicit DeterministicPolicy(std::vector<std::size_t> actions) : action_of(std::move(actions)) {}
    DeterministicPolicy(std::initializer_list<std::size_t> actions) : action_of(actions) {}
    DeterministicPolicy(std::size_t n_states, std::size_t action) : action_of(n_states, action) {}

    std::size_t size() const noexcept { return action_of.size(); }
    std::size_t operator[](std::size_t s) const { return action_of[s]; }
    std::size_t& operator[](std::size_t s) { return action_of[s]; }

    bool operator==(const DeterministicPolicy&) const = default;
};

/// Uniform probability vector of length n.
inline Vector uniform_distribution(std::size_t n) {
    return Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

namespace detail {

template <typename... Args>
std::string cat(const Args&... args) {
    std::ostringstream os;
    os.precision(12);
    (os << ... << args);
    return os.str();
}

} // namespace detail

/// Lists every violated TabularMdp invariant; empty when the model is well formed.
inline std::vector<std::string> validate_mdp(const TabularMdp& mdp) {
    using detail::cat;
    std::vector<std::string> report;
    const auto n = static_cast<Eigen::Index>(mdp.n_states);
    const auto na = static_cast<Eigen::Index>(mdp.n_actions);

    if (mdp.n_states == 0) report.push_back("n_states must be positive");
    if (mdp.n_actions == 0) report.push_back("n_actions must be positive");
    if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0)) report.push_back(cat("gamma out of range: ", mdp.gamma));

    if (mdp.transition.size() != mdp.n_actions) {
        report.push_back(cat("transition has ", mdp.transition.size(), " actions, expected ", mdp.n_actions));
    } else {
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            const auto& t = mdp.transition[a];
            if (t.rows() != n || t.cols() != n) {
                report.push_back(cat("transition[", a, "] has shape ", t.rows(), "x", t.cols()));
                continue;
            }
            for (Eigen::Index s = 0; s < n; ++s) {
                const double sum = t.row(s).sum();
                if (std::abs(sum - 1.0) > kProbabilityTol)
                    report.push_back(cat("action ", a, " row ", s, " sums to ", sum));
                const double lo = t.row(s).minCoeff();
                if (lo < 0.0) report.push_back(cat("action ", a, " row ", s, " has negative entry ", lo));
                if (!t.row(s).allFinite()) report.push_back(cat("action ", a, " row ", s, " is not finite"));
            }
        }
    }

    if (mdp.reward_mean.rows() != n || mdp.reward_mean.cols() != na)
        report.push_back(cat("reward_mean has shape ", mdp.reward_mean.rows(), "x", mdp.reward_mean.cols()));
    else if (!mdp.reward_mean.allFinite())
        report.push_back("reward_mean is not finite");

    if (mdp.reward_std.rows() != n || mdp.reward_std.cols() != na)
        report.push_back(cat("reward_std has shape ", mdp.reward_std.rows(), "x", mdp.reward_std.cols()));
    else if (mdp.reward_std.size() > 0 && !(mdp.reward_std.minCoeff() >= 0.0))
        report.push_back("reward_std has negative entries");

    if (mdp.start_dist.size() != n) {
        report.push_back(cat("start_dist has length ", mdp.start_dist.size()));
    } else if (n > 0) {
        const double sum = mdp.start_dist.sum();
        if (std::abs(sum - 1.0) > kProbabilityTol) report.push_back(cat("start_dist sums to ", sum));
        if (mdp.start_dist.minCoeff() < 0.0) report.push_back("start_dist has negative entries");
    }

    const bool shapes_ok = report.empty() || (mdp.transition.size() == mdp.n_actions &&
                                              mdp.reward_mean.rows() == n && mdp.reward_mean.cols() == na);
    for (auto s : mdp.absorbing) {
        if (s >= mdp.n_states) {
            report.push_back(cat("absorbing state ", s, " out of range"));
            continue;
        }
        if (!shapes_ok) continue;
        const auto si = static_cast<Eigen::Index>(s);
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            const auto& t = mdp.transition[a];
            if (t.rows() != n || t.cols() != n) continue;
            if (std::abs(t(si, si) - 1.0) > kProbabilityTol)
                report.push_back(cat("absorbing state ", s, " action ", a, " is not a self-loop"));
            if (mdp.reward_mean(si, static_cast<Eigen::Index>(a)) != 0.0)
                report.push_back(cat("absorbing state ", s, " action ", a, " has nonzero reward"));
        }
    }
    return report;
}

/// Throws ValidationError when validate_mdp reports anything.
inline void require_valid(const TabularMdp& mdp) {
    auto report = validate_mdp(mdp);
    if (!report.empty()) throw ValidationError(std::move(report));
}

/// Adds x to every reward mean except on absorbing states.
inline TabularMdp apply_reward_shift(const TabularMdp& mdp, double x) {
    TabularMdp out = mdp;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        if (mdp.is_absorbing(s)) continue;
        out.reward_mean.row(static_cast<Eigen::Index>(s)).array() += x;
    }
    return out;
}

} // namespace regmdp
