#pragma once

#include "regmdp/mdp.hpp"

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace regmdp {

struct Step {
    std::size_t state = 0;
    std::size_t action = 0;
    double reward = 0.0;
    std::size_t next_state = 0;

    bool operator==(const Step&) const = default;
};

using Trajectory = std::vector<Step>;
using Dataset = std::vector<Trajectory>;

/// Where trajectories begin: uniformly over all states, or uniformly over a listed subset.
struct StartMode {
    enum class Kind { uniform, fixed, set };
    Kind kind = Kind::uniform;
    std::vector<std::size_t> states; // one entry for fixed, non-empty for set

    static StartMode uniform() { return {}; }
    static StartMode fixed(std::size_t s) { return {Kind::fixed, {s}}; }
    static StartMode set(std::vector<std::size_t> s) { return {Kind::set, std::move(s)}; }

    /// Start distribution implied by the mode over n states.
    Vector distribution(std::size_t n) const {
        if (kind == Kind::uniform) return uniform_distribution(n);
        Vector d = Vector::Zero(static_cast<Eigen::Index>(n));
        for (auto s : states) d(static_cast<Eigen::Index>(s)) += 1.0 / static_cast<double>(states.size());
        return d;
    }

    bool operator==(const StartMode&) const = default;
};

struct CollectionConfig {
    std::size_t n_trajectories = 15;
    std::size_t trajectory_length = 10;
    double p_optimal = 0.0; // per-step probability the behaviour action is the optimal one
    StartMode start;

    bool operator==(const CollectionConfig&) const = default;
};

inline std::vector<std::string> validate_collection(const CollectionConfig& cfg, std::size_t n_states) {
    std::vector<std::string> out;
    if (cfg.n_trajectories == 0) out.emplace_back("n_trajectories must be positive");
    if (cfg.trajectory_length == 0) out.emplace_back("trajectory_length must be positive");
    if (!(cfg.p_optimal >= 0.0 && cfg.p_optimal <= 1.0)) out.emplace_back("p_optimal must lie in [0,1]");
    if (cfg.start.kind != StartMode::Kind::uniform) {
        if (cfg.start.states.empty()) out.emplace_back("start state set is empty");
        if (cfg.start.kind == StartMode::Kind::fixed && cfg.start.states.size() != 1)
            out.emplace_back("fixed start needs exactly one state");
        for (auto s : cfg.start.states)
            if (s >= n_states) out.push_back(detail::cat("start state ", s, " out of range"));
    }
    return out;
}

/// SplitMix64 finalizer; child generator i is seeded with mix(master ^ mix(i + 1)).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

using Rng = std::mt19937_64;

namespace detail {

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Inverse-CDF draw from row s of t. Falls back to the last positive entry on round-off.
inline std::size_t sample_row(Rng& rng, const Matrix& t, Eigen::Index s) {
    const double u = uniform01(rng);
    double acc = 0.0;
    Eigen::Index last = 0;
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
        const double p = t(s, j);
        if (p <= 0.0) continue;
        acc += p;
        last = j;
        if (u < acc) return static_cast<std::size_t>(j);
    }
    return static_cast<std::size_t>(last);
}

} // namespace detail

/**
 * Rolls out one trajectory in the true MDP. Each step independently takes the
 * optimal action with probability p_optimal and a uniformly random action
 * otherwise. Absorbing states self-loop with zero reward.
 */
inline Trajectory sample_trajectory(const TabularMdp& mdp, const DeterministicPolicy& optimal,
                                    const CollectionConfig& cfg, Rng& rng) {
    if (optimal.size() != mdp.n_states) throw ArgumentError("optimal policy length does not match state count");
    std::size_t s = 0;
    switch (cfg.start.kind) {
    case StartMode::Kind::uniform: s = detail::uniform_index(rng, mdp.n_states); break;
    case StartMode::Kind::fixed: s = cfg.start.states.at(0); break;
    case StartMode::Kind::set: s = cfg.start.states.at(detail::uniform_index(rng, cfg.start.states.size())); break;
    }
    Trajectory traj;
    traj.reserve(cfg.trajectory_length);
    for (std::size_t k = 0; k < cfg.trajectory_length; ++k) {
        // coin is always drawn so the stream layout does not depend on p_optimal
        const bool use_optimal = detail::uniform01(rng) < cfg.p_optimal;
        const std::size_t random_action = detail::uniform_index(rng, mdp.n_actions);
        const std::size_t a = use_optimal ? optimal[s] : random_action;
        const auto si = static_cast<Eigen::Index>(s);
        const auto ai = static_cast<Eigen::Index>(a);
        const std::size_t next = detail::sample_row(rng, mdp.transition[a], si);
        double r = 0.0;
        if (!mdp.is_absorbing(s)) {
            const double sd = mdp.reward_std(si, ai);
            const double noise = std::normal_distribution<double>(0.0, 1.0)(rng);
            r = mdp.reward_mean(si, ai) + sd * noise;
        }
        traj.push_back({s, a, r, next});
        s = next;
    }
    return traj;
}

/// n trajectories; trajectory i uses its own generator seeded from (master_seed, i).
inline Dataset generate_dataset(const TabularMdp& mdp, const DeterministicPolicy& optimal, const CollectionConfig& cfg,
                                std::uint64_t master_seed) {
    auto problems = validate_collection(cfg, mdp.n_states);
    if (!problems.empty()) throw ValidationError(std::move(problems));
    Dataset data;
    data.reserve(cfg.n_trajectories);
    for (std::size_t i = 0; i < cfg.n_trajectories; ++i) {
        Rng rng(child_seed(master_seed, i));
        data.push_back(sample_trajectory(mdp, optimal, cfg, rng));
    }
    return data;
}

inline std::size_t total_steps(const Dataset& data) {
    std::size_t n = 0;
    for (const auto& t : data) n += t.size();
    return n;
}

/// Appends one CSV row per step. Writes the header when `header` is true.
inline void write_dataset_csv(std::ostream& out, const Dataset& data, std::size_t replication, bool header) {
    if (header) out << "replication,trajectory,step,state,action,reward,next_state\n";
    const auto old = out.precision(17);
    for (std::size_t t = 0; t < data.size(); ++t)
        for (std::size_t k = 0; k < data[t].size(); ++k) {
            const auto& st = data[t][k];
            out << replication << ',' << t << ',' << k << ',' << st.state << ',' << st.action << ',' << st.reward
                << ',' << st.next_state << '\n';
        }
    out.precision(old);
}

} // namespace regmdp
