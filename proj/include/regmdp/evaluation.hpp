#pragma once

#include "regmdp/planning.hpp"
#include "regmdp/regularizers.hpp"

namespace regmdp {

struct LossResult {
    double loss = 0.0;
    ValueFunction v_opt;
    ValueFunction v_reg;
};

/// Start-weighted value gap between the optimal and the regularized policy, both evaluated in the true MDP.
inline LossResult policy_loss(const TabularMdp& true_mdp, const DeterministicPolicy& pi_reg,
                              const DeterministicPolicy& pi_opt, const Vector& start_dist) {
    if (start_dist.size() != static_cast<Eigen::Index>(true_mdp.n_states))
        throw ArgumentError("start distribution length does not match state count");
    const auto problem = PlanningProblem::from_mdp(true_mdp);
    LossResult out;
    out.v_opt = policy_evaluation(problem, pi_opt);
    out.v_reg = pi_reg == pi_opt ? out.v_opt : policy_evaluation(problem, pi_reg);
    out.loss = start_dist.dot(out.v_opt - out.v_reg);
    return out;
}

struct MseResult {
    double mse_plain = 0.0;
    double mse_absorbing = 0.0; // differs from mse_plain only for the discount method
};

/**
 * Mean squared entrywise difference over all (s, a, s'). For the discount
 * method the absorbing variant appends an exit state: each regularized row
 * puts its missing mass eps into the exit column, true rows put 0 there, and
 * the exit state self-loops in both. That average runs over |A| (N+1)^2 entries.
 */
inline MseResult transition_mse(const ActionMatrices& t_true, const RegularizedModel& reg) {
    if (t_true.size() != reg.t_reg.size()) throw ArgumentError("transition_mse: action count mismatch");
    MseResult out;
    if (t_true.empty()) return out;
    const auto n = t_true.front().rows();
    double sq = 0.0;
    double sq_exit = 0.0;
    for (std::size_t a = 0; a < t_true.size(); ++a) {
        if (t_true[a].rows() != n || t_true[a].cols() != n || reg.t_reg[a].rows() != n || reg.t_reg[a].cols() != n)
            throw ArgumentError("transition_mse: shape mismatch");
        sq += (t_true[a] - reg.t_reg[a]).squaredNorm();
        if (reg.method == Method::discount)
            for (Eigen::Index s = 0; s < n; ++s) {
                const double e = reg.eps_per_pair.size() ? reg.eps_per_pair(s, static_cast<Eigen::Index>(a)) : 0.0;
                sq_exit += e * e;
            }
    }
    const auto na = static_cast<double>(t_true.size());
    const auto nd = static_cast<double>(n);
    out.mse_plain = sq / (na * nd * nd);
    out.mse_absorbing = reg.method == Method::discount ? (sq + sq_exit) / (na * (nd + 1.0) * (nd + 1.0)) : out.mse_plain;
    return out;
}

} // namespace regmdp
