#pragma once

// Randomized equivalence checks over families of small MDPs. Each check uses
// brute force (policy enumeration, fixed-point iteration) as its reference
// rather than the policy-iteration path it is checking.

#include "regmdp/data.hpp"
#include "regmdp/estimation.hpp"
#include "regmdp/planning.hpp"
#include "regmdp/regularizers.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace regmdp::properties {

struct PropertyReport {
    explicit PropertyReport(std::string n) : name(std::move(n)) {}

    std::string name;
    std::size_t checked = 0; // instances (or instance x parameter pairs) examined
    std::size_t skipped = 0; // excluded because of Q ties
    std::size_t failed = 0;
    double worst_error = 0.0;
    std::string first_failure;

    bool passed() const { return failed == 0 && checked > 0; }

    void fail(std::string why) {
        if (failed++ == 0) first_failure = std::move(why);
    }
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Probability row drawn from a flat Dirichlet.
inline Vector random_row(Rng& rng, std::size_t n) {
    std::exponential_distribution<double> expo(1.0);
    Vector r(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = expo(rng);
    return r / r.sum();
}

struct RandomMdpSpec {
    std::size_t min_states = 2, max_states = 6;
    std::size_t min_actions = 2, max_actions = 3;
    double gamma = 0.95;
    bool state_rewards = false; // same reward mean for every action at a state
};

inline TabularMdp random_mdp(Rng& rng, const RandomMdpSpec& spec = {}) {
    const auto n = std::uniform_int_distribution<std::size_t>(spec.min_states, spec.max_states)(rng);
    const auto na = std::uniform_int_distribution<std::size_t>(spec.min_actions, spec.max_actions)(rng);
    std::uniform_real_distribution<double> reward(-1.0, 1.0);
    TabularMdp mdp;
    mdp.name = "random";
    mdp.n_states = n;
    mdp.n_actions = na;
    mdp.gamma = spec.gamma;
    const auto ni = static_cast<Eigen::Index>(n);
    const auto nai = static_cast<Eigen::Index>(na);
    mdp.transition.assign(na, Matrix(ni, ni));
    for (auto& t : mdp.transition)
        for (Eigen::Index s = 0; s < ni; ++s) t.row(s) = random_row(rng, n).transpose();
    mdp.reward_mean.resize(ni, nai);
    for (Eigen::Index s = 0; s < ni; ++s) {
        const double rs = reward(rng);
        for (Eigen::Index a = 0; a < nai; ++a) mdp.reward_mean(s, a) = spec.state_rewards ? rs : reward(rng);
    }
    mdp.reward_std = Matrix::Zero(ni, nai);
    mdp.start_dist = uniform_distribution(n);
    return mdp;
}

/// Counts with exactly `per_pair` observations at every (s, a), drawn from random rows.
inline CountsTensor uniform_visit_counts(Rng& rng, std::size_t n, std::size_t na, std::int64_t per_pair) {
    CountsTensor counts(n, na);
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t s = 0; s < n; ++s) {
            const Vector row = random_row(rng, n);
            std::discrete_distribution<std::size_t> pick(row.data(), row.data() + row.size());
            for (std::int64_t k = 0; k < per_pair; ++k) {
                const std::size_t d = pick(rng);
                counts.add({s, a, 0.0, d});
            }
        }
    return counts;
}

// ---------------------------------------------------------------------------
// Reference solvers (independent of the LU / Howard path)
// ---------------------------------------------------------------------------

/// V = R + gamma T V by fixed-point iteration until successive iterates differ by < 1e-13.
inline Vector iterate_values(const Matrix& t, const Vector& r, double gamma) {
    Vector v = Vector::Zero(r.size());
    for (int it = 0; it < 100000; ++it) {
        Vector next = r + gamma * (t * v);
        const double delta = (next - v).lpNorm<Eigen::Infinity>();
        v = std::move(next);
        if (delta < 1e-13) break;
    }
    return v;
}

/// Every deterministic policy over n states and na actions, in lexicographic order.
inline std::vector<DeterministicPolicy> all_policies(std::size_t n, std::size_t na) {
    std::vector<DeterministicPolicy> out;
    DeterministicPolicy pi(n, 0);
    for (;;) {
        out.push_back(pi);
        std::size_t s = 0;
        while (s < n && ++pi[s] == na) pi[s++] = 0;
        if (s == n) return out;
    }
}

/// Values of executing pi as an eps-greedy stochastic policy in (t, r, gamma).
inline Vector eps_greedy_execution_values(const ActionMatrices& t, const Matrix& r, double gamma,
                                          const DeterministicPolicy& pi, double eps) {
    const auto n = r.rows();
    const auto na = r.cols();
    Matrix tp = Matrix::Zero(n, n);
    Vector rp = Vector::Zero(n);
    for (Eigen::Index s = 0; s < n; ++s)
        for (Eigen::Index a = 0; a < na; ++a) {
            double w = eps / static_cast<double>(na);
            if (static_cast<std::size_t>(a) == pi[static_cast<std::size_t>(s)]) w += 1.0 - eps;
            tp.row(s) += w * t[static_cast<std::size_t>(a)].row(s);
            rp(s) += w * r(s, a);
        }
    return iterate_values(tp, rp, gamma);
}

inline Vector deterministic_values(const ActionMatrices& t, const Matrix& r, double gamma,
                                   const DeterministicPolicy& pi) {
    return eps_greedy_execution_values(t, r, gamma, pi, 0.0);
}

inline EstimatedModel as_estimate(const TabularMdp& mdp) {
    EstimatedModel m;
    m.t_hat = mdp.transition;
    m.r_hat = mdp.reward_mean;
    return m;
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

inline const std::vector<double>& default_eps_list() {
    static const std::vector<double> eps = {0.1, 0.3, 0.5, 0.7, 0.9};
    return eps;
}

/// Lowered discount on T vs uniform blend of T with the true discount.
inline PropertyReport check_uniform_blend_equivalence(std::uint64_t seed, std::size_t instances = 200,
                                                      const std::vector<double>& eps_list = default_eps_list()) {
    PropertyReport rep{"uniform blend == lowered discount"};
    Rng rng(seed);
    for (std::size_t i = 0; i < instances; ++i) {
        const auto mdp = random_mdp(rng);
        for (double eps : eps_list) {
            const auto r = blend_equivalence_check(mdp, eps);
            std::size_t compared = 0;
            for (bool c : r.compared) compared += c;
            rep.skipped += mdp.n_states - compared;
            ++rep.checked;
            if (!r.agree) rep.fail(detail::cat("instance ", i, " eps ", eps));
        }
    }
    return rep;
}

/// Planning on (1-eps) T_hat with gamma vs T_hat with (1-eps) gamma.
inline PropertyReport check_discount_blend_equivalence(std::uint64_t seed, std::size_t instances = 200,
                                                       const std::vector<double>& eps_list = default_eps_list()) {
    PropertyReport rep{"discount blend == lowered discount"};
    Rng rng(seed);
    for (std::size_t i = 0; i < instances; ++i) {
        const auto mdp = random_mdp(rng);
        const auto est = as_estimate(mdp);
        for (double eps : eps_list) {
            const auto blended = policy_iteration(discount_blend(est, eps, mdp.gamma).planning_problem());
            const auto lowered = policy_iteration(PlanningProblem{mdp.transition, mdp.reward_mean, (1.0 - eps) * mdp.gamma});
            if (!tie_free(blended.q) || !tie_free(lowered.q)) {
                ++rep.skipped;
                continue;
            }
            ++rep.checked;
            rep.worst_error = std::max(rep.worst_error, (blended.v - lowered.v).lpNorm<Eigen::Infinity>());
            if (!(blended.policy == lowered.policy)) rep.fail(detail::cat("instance ", i, " eps ", eps));
        }
    }
    return rep;
}

/// Per-pair posterior mean against the matrix form under uniform visits.
inline PropertyReport check_dirichlet_matrix_form(std::uint64_t seed, std::size_t instances = 50,
                                                  const std::vector<double>& magnitudes = {1.0, 10.0, 100.0},
                                                  double tol = 1e-12) {
    PropertyReport rep{"dirichlet posterior mean == matrix weighted average"};
    Rng rng(seed);
    std::uniform_int_distribution<std::int64_t> per_pair(1, 40);
    for (std::size_t i = 0; i < instances; ++i) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
        const auto na = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
        const auto k = per_pair(rng);
        const auto counts = uniform_visit_counts(rng, n, na, k);
        const auto mle = mle_model(counts);
        const auto ni = static_cast<Eigen::Index>(n);
        const Matrix unif = Matrix::Constant(ni, ni, 1.0 / static_cast<double>(n));
        for (double m : magnitudes) {
            const auto post = dirichlet_posterior_mean(counts, m, mle.r_hat, 0.95);
            const double eps = m / (static_cast<double>(k) + m);
            double err = 0.0;
            for (std::size_t a = 0; a < na; ++a) {
                const Matrix expected = (1.0 - eps) * mle.t_hat[a] + eps * unif;
                err = std::max(err, (post.t_reg[a] - expected).cwiseAbs().maxCoeff());
            }
            ++rep.checked;
            rep.worst_error = std::max(rep.worst_error, err);
            if (err > tol) rep.fail(detail::cat("instance ", i, " m ", m, " error ", err));
        }
    }
    return rep;
}

/// Discount blend vs uniform Dirichlet with the implied per-entry magnitude, uniform visits.
inline PropertyReport check_implied_prior_equivalence(std::uint64_t seed, std::size_t instances = 100,
                                                      const std::vector<double>& eps_list = default_eps_list()) {
    PropertyReport rep{"discount blend == implied uniform Dirichlet"};
    Rng rng(seed);
    std::uniform_real_distribution<double> reward(-1.0, 1.0);
    std::uniform_int_distribution<std::int64_t> per_pair(1, 30);
    const double gamma = 0.95;
    for (std::size_t i = 0; i < instances; ++i) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
        const auto na = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
        const auto k = per_pair(rng);
        const auto counts = uniform_visit_counts(rng, n, na, k);
        auto mle = mle_model(counts);
        for (Eigen::Index s = 0; s < mle.r_hat.rows(); ++s)
            for (Eigen::Index a = 0; a < mle.r_hat.cols(); ++a) mle.r_hat(s, a) = reward(rng);
        const double eps = eps_list[i % eps_list.size()];
        const double gamma_l = lowered_discount(gamma, eps);
        const double alpha_i = implied_prior_magnitude(gamma, gamma_l, static_cast<double>(k), n);
        const auto disc = policy_iteration(discount_blend(mle, eps, gamma).planning_problem());
        const auto dir = policy_iteration(
            dirichlet_posterior_mean(counts, alpha_i * static_cast<double>(n), mle.r_hat, gamma).planning_problem());
        if (!tie_free(disc.q) || !tie_free(dir.q)) {
            ++rep.skipped;
            continue;
        }
        ++rep.checked;
        if (!(disc.policy == dir.policy)) rep.fail(detail::cat("instance ", i, " eps ", eps));
    }
    return rep;
}

/**
 * Greedy planning on eps-greedy blended matrices against brute force over
 * all deterministic policies executed eps-greedily in the unblended model.
 */
inline PropertyReport check_eps_greedy_planning(std::uint64_t seed, std::size_t instances = 100,
                                                const std::vector<double>& eps_list = {0.25, 0.5},
                                                double tol = 1e-9) {
    PropertyReport rep{"eps-greedy blend planning == best eps-greedy execution"};
    Rng rng(seed);
    RandomMdpSpec spec{2, 4, 2, 2, 0.95, true};
    for (std::size_t i = 0; i < instances; ++i) {
        const auto mdp = random_mdp(rng, spec);
        const auto est = as_estimate(mdp);
        const auto policies = all_policies(mdp.n_states, mdp.n_actions);
        for (double eps : eps_list) {
            const auto plan = policy_iteration(eps_greedy_blend(est, eps, mdp.gamma).planning_problem());
            // brute force: the optimal policy dominates every other one at every state
            std::vector<Vector> values;
            for (const auto& pi : policies)
                values.push_back(eps_greedy_execution_values(mdp.transition, mdp.reward_mean, mdp.gamma, pi, eps));
            std::size_t best = 0;
            for (std::size_t p = 1; p < policies.size(); ++p)
                if (values[p].sum() > values[best].sum()) best = p;
            Vector upper = values[0];
            for (const auto& v : values) upper = upper.cwiseMax(v);
            const double dominance_gap = (upper - values[best]).lpNorm<Eigen::Infinity>();
            if (!tie_free(plan.q)) {
                ++rep.skipped;
                continue;
            }
            ++rep.checked;
            const Vector executed =
                eps_greedy_execution_values(mdp.transition, mdp.reward_mean, mdp.gamma, plan.policy, eps);
            const double err = std::max((executed - values[best]).lpNorm<Eigen::Infinity>(),
                                        (plan.v - values[best]).lpNorm<Eigen::Infinity>());
            rep.worst_error = std::max({rep.worst_error, err, dominance_gap});
            if (!(plan.policy == policies[best]) || err > tol || dominance_gap > tol)
                rep.fail(detail::cat("instance ", i, " eps ", eps, " value error ", err));
        }
    }
    return rep;
}

/// Adding x to every reward shifts Q by x / (1 - gamma) and leaves the policy alone.
inline PropertyReport check_reward_shift(std::uint64_t seed, std::size_t instances = 100,
                                         const std::vector<double>& shifts = {-5.0, 1.0, 100.0}, double tol = 1e-9) {
    PropertyReport rep{"reward shift leaves policy unchanged"};
    Rng rng(seed);
    for (std::size_t i = 0; i < instances; ++i) {
        const auto mdp = random_mdp(rng);
        const auto base = policy_iteration(PlanningProblem::from_mdp(mdp));
        for (double x : shifts) {
            const auto shifted = policy_iteration(PlanningProblem::from_mdp(apply_reward_shift(mdp, x)));
            // Q of the base policy in the shifted model, so the comparison does not depend on the shifted plan
            const auto shifted_problem = PlanningProblem::from_mdp(apply_reward_shift(mdp, x));
            const QFunction q_shift = q_from_values(shifted_problem, policy_evaluation(shifted_problem, base.policy));
            const double err =
                (q_shift - base.q - Matrix::Constant(base.q.rows(), base.q.cols(), x / (1.0 - mdp.gamma)))
                    .cwiseAbs()
                    .maxCoeff();
            rep.worst_error = std::max(rep.worst_error, err);
            if (!tie_free(base.q)) {
                ++rep.skipped;
                continue;
            }
            ++rep.checked;
            if (err > tol || !(shifted.policy == base.policy))
                rep.fail(detail::cat("instance ", i, " x ", x, " q error ", err));
        }
    }
    return rep;
}

/// Policy iteration against exhaustive enumeration on 2- and 3-state, 2-action problems.
inline PropertyReport check_policy_iteration_oracle(std::uint64_t seed, std::size_t instances = 500,
                                                    double tol = 1e-9) {
    PropertyReport rep{"policy iteration == exhaustive enumeration"};
    Rng rng(seed);
    for (std::size_t i = 0; i < instances; ++i) {
        RandomMdpSpec spec{2 + i % 2, 2 + i % 2, 2, 2, 0.95, false};
        const auto mdp = random_mdp(rng, spec);
        const auto plan = policy_iteration(PlanningProblem::from_mdp(mdp));
        Vector best = Vector::Constant(static_cast<Eigen::Index>(mdp.n_states), -1e300);
        for (const auto& pi : all_policies(mdp.n_states, mdp.n_actions))
            best = best.cwiseMax(deterministic_values(mdp.transition, mdp.reward_mean, mdp.gamma, pi));
        const double err = (plan.v - best).lpNorm<Eigen::Infinity>();
        ++rep.checked;
        rep.worst_error = std::max(rep.worst_error, err);
        if (err > tol) rep.fail(detail::cat("instance ", i, " value error ", err));
    }
    return rep;
}

} // namespace regmdp::properties
