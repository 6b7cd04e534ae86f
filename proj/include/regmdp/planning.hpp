#pragma once

#include "regmdp/mdp.hpp"

#include <limits>

namespace regmdp {

/**
 * Model handed to the planner. Transition rows may be substochastic (the
 * discount blend); evaluation is well posed while gamma * max row sum < 1.
 */
struct PlanningProblem {
    ActionMatrices t;
    Matrix r; // N x |A|
    double gamma = 0.95;

    std::size_t n_states() const { return static_cast<std::size_t>(r.rows()); }
    std::size_t n_actions() const { return static_cast<std::size_t>(r.cols()); }

    static PlanningProblem from_mdp(const TabularMdp& mdp) { return {mdp.transition, mdp.reward_mean, mdp.gamma}; }
};

struct PolicyIterationResult {
    DeterministicPolicy policy;
    QFunction q;
    ValueFunction v;
    std::size_t iterations = 0;
};

namespace detail {

inline void check_problem(const PlanningProblem& p) {
    const auto n = p.r.rows();
    if (p.t.size() != static_cast<std::size_t>(p.r.cols()))
        throw ArgumentError("planning problem: action count mismatch between t and r");
    for (const auto& m : p.t)
        if (m.rows() != n || m.cols() != n) throw ArgumentError("planning problem: transition shape mismatch");
    if (!(p.gamma >= 0.0 && p.gamma < 1.0)) throw ArgumentError("planning problem: gamma out of [0,1)");
}

} // namespace detail

/// Transition matrix and reward vector induced by a deterministic policy.
inline std::pair<Matrix, Vector> policy_model(const PlanningProblem& p, const DeterministicPolicy& pi) {
    const auto n = static_cast<Eigen::Index>(p.n_states());
    if (pi.size() != p.n_states()) throw ArgumentError("policy length does not match state count");
    Matrix tp(n, n);
    Vector rp(n);
    for (Eigen::Index s = 0; s < n; ++s) {
        const auto a = pi[static_cast<std::size_t>(s)];
        if (a >= p.n_actions()) throw ArgumentError("policy action out of range");
        tp.row(s) = p.t[a].row(s);
        rp(s) = p.r(s, static_cast<Eigen::Index>(a));
    }
    return {std::move(tp), std::move(rp)};
}

/// Solves V = R_pi + gamma T_pi V exactly with an LU factorization.
inline ValueFunction policy_evaluation(const PlanningProblem& p, const DeterministicPolicy& pi) {
    detail::check_problem(p);
    auto [tp, rp] = policy_model(p, pi);
    const auto n = tp.rows();
    Matrix a = Matrix::Identity(n, n) - p.gamma * tp;
    Eigen::PartialPivLU<Matrix> lu(a);
    ValueFunction v = lu.solve(rp);
    if (!v.allFinite()) throw NumericError("policy evaluation produced non-finite values");
    const double residual = (v - (rp + p.gamma * tp * v)).lpNorm<Eigen::Infinity>();
    // refine once; residual scales with |V| so large reward offsets need it
    if (residual > 1e-10) v += lu.solve(rp + p.gamma * tp * v - v);
    const double final_residual = (v - (rp + p.gamma * tp * v)).lpNorm<Eigen::Infinity>();
    if (!(final_residual < 1e-9 * std::max(1.0, v.lpNorm<Eigen::Infinity>())))
        throw NumericError(detail::cat("policy evaluation residual too large: ", final_residual));
    return v;
}

/// Q(s,a) = r(s,a) + gamma * sum_s' t_a(s,s') V(s').
inline QFunction q_from_values(const PlanningProblem& p, const ValueFunction& v) {
    const auto n = static_cast<Eigen::Index>(p.n_states());
    QFunction q(n, static_cast<Eigen::Index>(p.n_actions()));
    for (std::size_t a = 0; a < p.n_actions(); ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        q.col(ai) = p.r.col(ai) + p.gamma * (p.t[a] * v);
    }
    return q;
}

/// Argmax per state; any action within tie_tol of the best counts as tied and the lowest index wins.
inline DeterministicPolicy greedy_from_q(const QFunction& q, double tie_tol = kTieTol) {
    DeterministicPolicy pi(static_cast<std::size_t>(q.rows()), 0);
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        const double best = q.row(s).maxCoeff();
        for (Eigen::Index a = 0; a < q.cols(); ++a) {
            if (q(s, a) >= best - tie_tol) {
                pi[static_cast<std::size_t>(s)] = static_cast<std::size_t>(a);
                break;
            }
        }
    }
    return pi;
}

/// Difference between the best and second-best action value at state s (infinity for one action).
inline double q_gap(const QFunction& q, Eigen::Index s) {
    if (q.cols() < 2) return std::numeric_limits<double>::infinity();
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < q.cols(); ++a) {
        const double x = q(s, a);
        if (x > best) {
            second = best;
            best = x;
        } else if (x > second) {
            second = x;
        }
    }
    return best - second;
}

inline bool tie_free(const QFunction& q, double tie_tol = kTieTol) {
    for (Eigen::Index s = 0; s < q.rows(); ++s)
        if (q_gap(q, s) <= tie_tol) return false;
    return true;
}

/**
 * Howard policy iteration from the all-zeros policy.
 *
 * An action is only switched when it improves on the incumbent by more than
 * tie_tol, so the loop cannot cycle on numerically tied actions. The returned
 * policy is greedy_from_q of the final Q, i.e. ties resolve to the lowest
 * action index. `observer` receives the value function of every evaluated
 * policy in order.
 */
template <typename Observer>
PolicyIterationResult policy_iteration(const PlanningProblem& p, double tie_tol, Observer&& observer) {
    detail::check_problem(p);
    const std::size_t n = p.n_states();
    DeterministicPolicy pi(n, 0);
    PolicyIterationResult out;
    // |A|^N bounds the number of distinct policies; the cap only guards against misuse
    const std::size_t max_iterations = 10'000;
    for (std::size_t it = 1;; ++it) {
        ValueFunction v = policy_evaluation(p, pi);
        observer(static_cast<const ValueFunction&>(v));
        QFunction q = q_from_values(p, v);
        bool changed = false;
        for (std::size_t s = 0; s < n; ++s) {
            const auto si = static_cast<Eigen::Index>(s);
            Eigen::Index best_a = 0;
            const double best = q.row(si).maxCoeff(&best_a);
            if (best > q(si, static_cast<Eigen::Index>(pi[s])) + tie_tol) {
                pi[s] = static_cast<std::size_t>(best_a);
                changed = true;
            }
        }
        if (!changed || it >= max_iterations) {
            out.policy = greedy_from_q(q, tie_tol);
            out.q = std::move(q);
            out.v = std::move(v);
            out.iterations = it;
            return out;
        }
    }
}

inline PolicyIterationResult policy_iteration(const PlanningProblem& p, double tie_tol = kTieTol) {
    return policy_iteration(p, tie_tol, [](const ValueFunction&) {});
}

/// Outcome of comparing (T, (1-eps) gamma) against ((1-eps) T + eps U, gamma).
struct BlendEquivalenceReport {
    DeterministicPolicy policy_lowered_gamma;
    DeterministicPolicy policy_uniform_blend;
    std::vector<bool> compared; // false where either model has a Q tie
    bool agree = true;
};

/**
 * Plans on the true transitions with a lowered discount and on the
 * uniform-blended transitions with the original discount, and checks that the
 * optimal actions coincide at every state that is tie-free in both models.
 */
inline BlendEquivalenceReport blend_equivalence_check(const TabularMdp& mdp, double eps, double tie_tol = kTieTol) {
    if (!(eps >= 0.0 && eps < 1.0)) throw ArgumentError("blend_equivalence_check: eps must lie in [0,1)");
    const auto n = static_cast<Eigen::Index>(mdp.n_states);
    PlanningProblem lowered{mdp.transition, mdp.reward_mean, (1.0 - eps) * mdp.gamma};
    PlanningProblem blended{{}, mdp.reward_mean, mdp.gamma};
    const Matrix uniform = Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
    for (const auto& t : mdp.transition) blended.t.push_back((1.0 - eps) * t + eps * uniform);

    const auto r1 = policy_iteration(lowered, tie_tol);
    const auto r2 = policy_iteration(blended, tie_tol);
    BlendEquivalenceReport rep;
    rep.policy_lowered_gamma = r1.policy;
    rep.policy_uniform_blend = r2.policy;
    rep.compared.assign(mdp.n_states, false);
    for (Eigen::Index s = 0; s < n; ++s) {
        if (q_gap(r1.q, s) <= tie_tol || q_gap(r2.q, s) <= tie_tol) continue;
        const auto su = static_cast<std::size_t>(s);
        rep.compared[su] = true;
        if (r1.policy[su] != r2.policy[su]) rep.agree = false;
    }
    return rep;
}

} // namespace regmdp
