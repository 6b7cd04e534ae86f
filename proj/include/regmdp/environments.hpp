#pragma once

#include "regmdp/mdp.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace regmdp {

/**
 * Action noise shared by the grid builders. With probability slip_prob the
 * intended move is replaced by a move drawn uniformly from the action set
 * (which may coincide with the intended one).
 */
struct GridNoiseConfig {
    double slip_prob = 0.1;
    double reward_std = 0.25;
};

inline void check_noise(const GridNoiseConfig& noise) {
    if (!(noise.slip_prob >= 0.0 && noise.slip_prob < 1.0)) throw ArgumentError("slip_prob must lie in [0,1)");
    if (!(noise.reward_std >= 0.0)) throw ArgumentError("reward_std must be nonnegative");
}

namespace detail {

// Builds a state's transition row and expected reward from a per-action
// deterministic successor and a per-destination entry reward.
template <typename Successor, typename EntryReward>
void fill_slip_row(TabularMdp& mdp, std::size_t s, const GridNoiseConfig& noise, Successor&& successor,
                   EntryReward&& entry_reward) {
    const auto na = mdp.n_actions;
    const auto si = static_cast<Eigen::Index>(s);
    for (std::size_t a = 0; a < na; ++a) {
        double expected = 0.0;
        for (std::size_t b = 0; b < na; ++b) {
            double w = noise.slip_prob / static_cast<double>(na);
            if (b == a) w += 1.0 - noise.slip_prob;
            if (w == 0.0) continue;
            const auto [landing, dest] = successor(s, b);
            mdp.transition[a](si, static_cast<Eigen::Index>(dest)) += w;
            expected += w * entry_reward(landing);
        }
        mdp.reward_mean(si, static_cast<Eigen::Index>(a)) = expected;
    }
}

inline TabularMdp blank_mdp(std::string name, std::size_t n, std::size_t na, double reward_std) {
    TabularMdp mdp;
    mdp.name = std::move(name);
    mdp.n_states = n;
    mdp.n_actions = na;
    const auto ni = static_cast<Eigen::Index>(n);
    const auto nai = static_cast<Eigen::Index>(na);
    mdp.transition.assign(na, Matrix::Zero(ni, ni));
    mdp.reward_mean = Matrix::Zero(ni, nai);
    mdp.reward_std = Matrix::Constant(ni, nai, reward_std);
    mdp.start_dist = uniform_distribution(n);
    return mdp;
}

inline void make_absorbing(TabularMdp& mdp, std::size_t s) {
    const auto si = static_cast<Eigen::Index>(s);
    for (auto& t : mdp.transition) {
        t.row(si).setZero();
        t(si, si) = 1.0;
    }
    mdp.reward_mean.row(si).setZero();
    mdp.reward_std.row(si).setZero();
    mdp.absorbing.push_back(s);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Cliff Walk: 4 x 12 grid, row-major, row 0 on top.
// ---------------------------------------------------------------------------

namespace cliff {

inline constexpr std::size_t kRows = 4;
inline constexpr std::size_t kCols = 12;
inline constexpr std::size_t kStates = kRows * kCols;
inline constexpr std::size_t kStart = (kRows - 1) * kCols;     // bottom-left
inline constexpr std::size_t kGoal = kRows * kCols - 1;        // bottom-right
inline constexpr double kCliffReward = -100.0;
inline constexpr double kStepReward = -1.0;

enum Action : std::size_t { kLeft = 0, kRight = 1, kUp = 2, kDown = 3 };

inline constexpr std::size_t index(std::size_t row, std::size_t col) { return row * kCols + col; }

inline constexpr bool is_cliff(std::size_t s) { return s > kStart && s < kGoal; }

/// Cell reached by a move; moves off the grid stay put.
inline std::size_t move(std::size_t s, std::size_t action) {
    std::size_t r = s / kCols, c = s % kCols;
    switch (action) {
    case kLeft: c = c == 0 ? c : c - 1; break;
    case kRight: c = c + 1 == kCols ? c : c + 1; break;
    case kUp: r = r == 0 ? r : r - 1; break;
    case kDown: r = r + 1 == kRows ? r : r + 1; break;
    default: throw ArgumentError("cliff: bad action");
    }
    return index(r, c);
}

/// Non-cliff cells within Manhattan distance 2 of the goal (goal included).
inline std::vector<std::size_t> near_goal_states() {
    std::vector<std::size_t> out;
    const std::size_t gr = kGoal / kCols, gc = kGoal % kCols;
    for (std::size_t s = 0; s < kStates; ++s) {
        const std::size_t r = s / kCols, c = s % kCols;
        const std::size_t d = (r > gr ? r - gr : gr - r) + (c > gc ? c - gc : gc - c);
        if (d <= 2 && !is_cliff(s)) out.push_back(s);
    }
    return out;
}

} // namespace cliff

/**
 * Cliff Walk. Entering a cliff cell costs -100 and sends the agent back to
 * the start; every other move costs -1; the goal is absorbing. Cliff cells
 * themselves (reachable only as start states) return to the start for -1.
 */
inline TabularMdp build_cliff_walk(const GridNoiseConfig& noise = {}, double gamma = 0.95) {
    check_noise(noise);
    using namespace cliff;
    auto mdp = detail::blank_mdp("cliff_walk", kStates, 4, noise.reward_std);
    mdp.gamma = gamma;
    auto successor = [](std::size_t s, std::size_t b) -> std::pair<std::size_t, std::size_t> {
        const std::size_t landing = move(s, b);
        return {landing, is_cliff(landing) ? kStart : landing};
    };
    auto entry_reward = [](std::size_t landing) { return is_cliff(landing) ? kCliffReward : kStepReward; };
    for (std::size_t s = 0; s < kStates; ++s) {
        if (s == kGoal) continue;
        if (is_cliff(s)) {
            const auto si = static_cast<Eigen::Index>(s);
            for (std::size_t a = 0; a < 4; ++a) {
                mdp.transition[a](si, static_cast<Eigen::Index>(kStart)) = 1.0;
                mdp.reward_mean(si, static_cast<Eigen::Index>(a)) = kStepReward;
            }
            continue;
        }
        detail::fill_slip_row(mdp, s, noise, successor, entry_reward);
    }
    detail::make_absorbing(mdp, kGoal);
    return mdp;
}

// ---------------------------------------------------------------------------
// Two Goals: 12-cell corridor with a small reward at 0 and a large one at 11.
// ---------------------------------------------------------------------------

namespace two_goals {

inline constexpr std::size_t kStates = 12;
inline constexpr double kSmallReward = 0.10;
inline constexpr double kLargeReward = 1.0;

enum Action : std::size_t { kLeft = 0, kRight = 1, kUp = 2 };

inline std::size_t move(std::size_t s, std::size_t action) {
    switch (action) {
    case kLeft: return s == 0 ? s : s - 1;
    case kRight: return s + 1 == kStates ? s : s + 1;
    case kUp: return s;
    default: throw ArgumentError("two_goals: bad action");
    }
}

} // namespace two_goals

inline TabularMdp build_two_goals(const GridNoiseConfig& noise = {}, double gamma = 0.95) {
    check_noise(noise);
    using namespace two_goals;
    auto mdp = detail::blank_mdp("two_goals", kStates, 3, noise.reward_std);
    mdp.gamma = gamma;
    auto successor = [](std::size_t s, std::size_t b) -> std::pair<std::size_t, std::size_t> {
        const auto d = move(s, b);
        return {d, d};
    };
    auto entry_reward = [](std::size_t d) {
        if (d == 0) return kSmallReward;
        if (d == kStates - 1) return kLargeReward;
        return 0.0;
    };
    for (std::size_t s = 1; s + 1 < kStates; ++s) detail::fill_slip_row(mdp, s, noise, successor, entry_reward);
    detail::make_absorbing(mdp, 0);
    detail::make_absorbing(mdp, kStates - 1);
    return mdp;
}

// ---------------------------------------------------------------------------
// Interconnected Grid: dense random-looking graph with uniform fan-out.
// ---------------------------------------------------------------------------

/// Per-(state, action) out-neighbour sets and per-state reward means.
struct TopologyConfig {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<std::vector<std::vector<std::size_t>>> neighbors; // [state][action] -> successor set
    std::vector<double> reward_mean;                              // per state
    double reward_std = 0.25;
};

/**
 * Stand-in 10-state, 3-action topology. Each action moves to one of three
 * successors with equal probability; rewards are paid on the state occupied.
 */
inline TopologyConfig default_topology() {
    TopologyConfig cfg;
    cfg.n_states = 10;
    cfg.n_actions = 3;
    cfg.reward_mean = {0.0, 0.2, 0.1, 0.6, 0.0, 0.3, 1.0, 0.1, 0.4, 0.8};
    cfg.neighbors = {
        {{1, 2, 3}, {4, 5, 9}, {0, 7, 8}},
        {{0, 2, 5}, {3, 6, 8}, {1, 4, 7}},
        {{1, 3, 4}, {5, 6, 9}, {0, 2, 8}},
        {{2, 4, 6}, {0, 7, 9}, {1, 3, 5}},
        {{3, 5, 7}, {1, 6, 8}, {0, 2, 9}},
        {{4, 6, 8}, {2, 3, 9}, {0, 1, 7}},
        {{5, 7, 9}, {0, 3, 4}, {1, 2, 8}},
        {{6, 8, 0}, {2, 5, 9}, {1, 3, 4}},
        {{7, 9, 1}, {0, 4, 6}, {2, 3, 5}},
        {{8, 0, 2}, {3, 5, 6}, {1, 4, 7}},
    };
    return cfg;
}

inline TabularMdp build_interconnected_grid(const TopologyConfig& topo = default_topology(), double gamma = 0.95) {
    if (topo.n_states == 0 || topo.n_actions == 0) throw ArgumentError("topology: empty state or action set");
    if (topo.neighbors.size() != topo.n_states || topo.reward_mean.size() != topo.n_states)
        throw ArgumentError("topology: per-state tables must have n_states entries");
    if (!(topo.reward_std >= 0.0)) throw ArgumentError("topology: reward_std must be nonnegative");
    auto mdp = detail::blank_mdp("interconnected_grid", topo.n_states, topo.n_actions, topo.reward_std);
    mdp.gamma = gamma;
    for (std::size_t s = 0; s < topo.n_states; ++s) {
        if (topo.neighbors[s].size() != topo.n_actions)
            throw ArgumentError(detail::cat("topology: state ", s, " lists ", topo.neighbors[s].size(), " actions"));
        const auto si = static_cast<Eigen::Index>(s);
        for (std::size_t a = 0; a < topo.n_actions; ++a) {
            const auto& out = topo.neighbors[s][a];
            if (out.empty()) throw ArgumentError(detail::cat("topology: empty out-neighbour set at (", s, ",", a, ")"));
            const double w = 1.0 / static_cast<double>(out.size());
            for (auto d : out) {
                if (d >= topo.n_states) throw ArgumentError(detail::cat("topology: successor ", d, " out of range"));
                mdp.transition[a](si, static_cast<Eigen::Index>(d)) += w;
            }
            mdp.reward_mean(si, static_cast<Eigen::Index>(a)) = topo.reward_mean[s];
        }
    }
    return mdp;
}

/// Builtin MDPs by name: "cliff", "two_goals", "grid".
inline TabularMdp builtin_mdp(const std::string& name, const GridNoiseConfig& noise = {}, double gamma = 0.95) {
    if (name == "cliff" || name == "cliff_walk") return build_cliff_walk(noise, gamma);
    if (name == "two_goals" || name == "twogoals") return build_two_goals(noise, gamma);
    if (name == "grid" || name == "interconnected_grid") {
        auto topo = default_topology();
        topo.reward_std = noise.reward_std;
        return build_interconnected_grid(topo, gamma);
    }
    throw ArgumentError("unknown builtin MDP '" + name + "'");
}

// ---------------------------------------------------------------------------
// JSON spec files
// ---------------------------------------------------------------------------

inline nlohmann::json mdp_to_json(const TabularMdp& mdp) {
    using nlohmann::json;
    auto matrix = [](const Matrix& m) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    json j;
    j["name"] = mdp.name;
    j["n_states"] = mdp.n_states;
    j["n_actions"] = mdp.n_actions;
    j["transition"] = json::array();
    for (const auto& t : mdp.transition) j["transition"].push_back(matrix(t));
    j["reward_mean"] = matrix(mdp.reward_mean);
    j["reward_std"] = matrix(mdp.reward_std);
    j["gamma"] = mdp.gamma;
    j["start_dist"] = std::vector<double>(mdp.start_dist.data(), mdp.start_dist.data() + mdp.start_dist.size());
    j["absorbing"] = mdp.absorbing;
    return j;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const std::string& key) {
    if (!j.is_object()) throw ParseError("<root>", "expected a JSON object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(key, "missing field");
    return *it;
}

inline double number(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where, "expected a number");
    return j.get<double>();
}

inline std::size_t count(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ParseError(where, "expected a nonnegative integer");
    const auto v = j.get<long long>();
    if (v < 0) throw ParseError(where, "expected a nonnegative integer");
    return static_cast<std::size_t>(v);
}

inline Matrix matrix(const nlohmann::json& j, std::size_t rows, std::size_t cols, const std::string& where) {
    if (!j.is_array() || j.size() != rows)
        throw ParseError(where, cat("expected ", rows, " rows"));
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j[r];
        const auto rw = cat(where, "[", r, "]");
        if (!row.is_array() || row.size() != cols) throw ParseError(rw, cat("expected ", cols, " columns"));
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(row[c], cat(rw, "[", c, "]"));
    }
    return m;
}

} // namespace detail

/// Parses without validating; see mdp_from_json for the validated variant.
inline TabularMdp mdp_from_json_unchecked(const nlohmann::json& j) {
    using namespace detail;
    TabularMdp mdp;
    const auto& name = field(j, "name");
    if (!name.is_string()) throw ParseError("name", "expected a string");
    mdp.name = name.get<std::string>();
    mdp.n_states = detail::count(field(j, "n_states"), "n_states");
    mdp.n_actions = detail::count(field(j, "n_actions"), "n_actions");
    if (mdp.n_states == 0) throw ParseError("n_states", "must be positive");
    if (mdp.n_actions == 0) throw ParseError("n_actions", "must be positive");
    const auto& tr = field(j, "transition");
    if (!tr.is_array() || tr.size() != mdp.n_actions)
        throw ParseError("transition", cat("expected ", mdp.n_actions, " action matrices"));
    for (std::size_t a = 0; a < mdp.n_actions; ++a)
        mdp.transition.push_back(matrix(tr[a], mdp.n_states, mdp.n_states, cat("transition[", a, "]")));
    mdp.reward_mean = matrix(field(j, "reward_mean"), mdp.n_states, mdp.n_actions, "reward_mean");
    mdp.reward_std = matrix(field(j, "reward_std"), mdp.n_states, mdp.n_actions, "reward_std");
    mdp.gamma = number(field(j, "gamma"), "gamma");
    const auto& sd = field(j, "start_dist");
    if (!sd.is_array() || sd.size() != mdp.n_states)
        throw ParseError("start_dist", cat("expected ", mdp.n_states, " entries"));
    mdp.start_dist.resize(static_cast<Eigen::Index>(mdp.n_states));
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        mdp.start_dist(static_cast<Eigen::Index>(s)) = number(sd[s], cat("start_dist[", s, "]"));
    const auto& ab = field(j, "absorbing");
    if (!ab.is_array()) throw ParseError("absorbing", "expected an array");
    for (std::size_t i = 0; i < ab.size(); ++i) mdp.absorbing.push_back(detail::count(ab[i], cat("absorbing[", i, "]")));
    return mdp;
}

inline TabularMdp mdp_from_json(const nlohmann::json& j) {
    auto mdp = mdp_from_json_unchecked(j);
    require_valid(mdp);
    return mdp;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, "cannot open file");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path, e.what());
    }
}

inline TabularMdp load_mdp_spec(const std::string& path) { return mdp_from_json(read_json_file(path)); }

inline void save_mdp_spec(const TabularMdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    // max_digits10 via nlohmann's shortest round-trip formatting
    out << mdp_to_json(mdp).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace regmdp
