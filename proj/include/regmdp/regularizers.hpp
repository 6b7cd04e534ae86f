#pragma once

#include "regmdp/estimation.hpp"
#include "regmdp/planning.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace regmdp {

/**
 * The three transition regularizers, each a weighted average of the MLE
 * matrix with a method-specific target:
 *
 *   dirichlet   (1-e) T_mle + e T_prior_mean    e = sum(alpha) / (sum(c) + sum(alpha)), per (s,a)
 *   discount    (1-e) T_mle + e 0               e = (gamma - gamma_l) / gamma
 *   eps_greedy  (1-e) T_mle + e mean_a' T_mle(a')
 *
 * `none` passes the MLE through unchanged.
 */
enum class Method { none, dirichlet, discount, eps_greedy };

inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::none: return "none";
    case Method::dirichlet: return "dirichlet";
    case Method::discount: return "discount";
    case Method::eps_greedy: return "eps_greedy";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "none") return Method::none;
    if (s == "dirichlet") return Method::dirichlet;
    if (s == "discount") return Method::discount;
    if (s == "eps_greedy") return Method::eps_greedy;
    throw ArgumentError("unknown regularization method '" + std::string(s) + "'");
}

struct RegularizedModel {
    ActionMatrices t_reg;
    Matrix r_hat;
    Method method = Method::none;
    double strength = 0.0;       // eps for discount / eps_greedy, prior magnitude for dirichlet
    double effective_gamma = 0.0; // discount used when planning; always the true gamma
    double lowered_gamma = 0.0;   // (1-eps) gamma; the equivalent discount for the discount method
    Matrix eps_per_pair;          // N x |A| weight on the non-MLE target

    PlanningProblem planning_problem() const { return {t_reg, r_hat, effective_gamma}; }
};

/// Dirichlet parameters, one N x N matrix per action; row s holds alpha over successors of (s, a).
struct DirichletPrior {
    ActionMatrices alpha;
};

inline DirichletPrior uniform_prior(double magnitude, std::size_t n_states, std::size_t n_actions) {
    if (!(magnitude >= 0.0)) throw ArgumentError("prior magnitude must be nonnegative");
    const auto n = static_cast<Eigen::Index>(n_states);
    return {ActionMatrices(n_actions, Matrix::Constant(n, n, magnitude / static_cast<double>(n_states)))};
}

/**
 * Per-pair posterior mean (c + alpha) / (sum c + sum alpha). Rows with no
 * counts and no prior mass fall back to uniform like the MLE.
 */
inline RegularizedModel dirichlet_posterior_mean(const CountsTensor& counts, const DirichletPrior& prior,
                                                 const Matrix& r_hat, double gamma, double magnitude = 0.0) {
    const auto n = static_cast<Eigen::Index>(counts.n_states);
    const auto na = static_cast<Eigen::Index>(counts.n_actions);
    if (prior.alpha.size() != counts.n_actions) throw ArgumentError("prior action count mismatch");
    RegularizedModel out;
    out.method = Method::dirichlet;
    out.strength = magnitude;
    out.effective_gamma = gamma;
    out.lowered_gamma = gamma;
    out.r_hat = r_hat;
    out.eps_per_pair = Matrix::Zero(n, na);
    out.t_reg.assign(counts.n_actions, Matrix::Zero(n, n));
    for (Eigen::Index a = 0; a < na; ++a) {
        const auto au = static_cast<std::size_t>(a);
        const auto& alpha = prior.alpha[au];
        if (alpha.rows() != n || alpha.cols() != n) throw ArgumentError("prior shape mismatch");
        if (alpha.size() > 0 && alpha.minCoeff() < 0.0) throw ArgumentError("Dirichlet parameters must be nonnegative");
        const auto& c = counts.c[au];
        auto& t = out.t_reg[au];
        for (Eigen::Index s = 0; s < n; ++s) {
            const double csum = static_cast<double>(counts.visit_count(s, a));
            const double asum = alpha.row(s).sum();
            const double denom = csum + asum;
            if (denom == 0.0) {
                t.row(s).setConstant(1.0 / static_cast<double>(n));
                continue;
            }
            for (Eigen::Index j = 0; j < n; ++j) t(s, j) = (static_cast<double>(c(s, j)) + alpha(s, j)) / denom;
            out.eps_per_pair(s, a) = asum / denom;
        }
    }
    return out;
}

inline RegularizedModel dirichlet_posterior_mean(const CountsTensor& counts, double magnitude,
                                                 const Matrix& r_hat, double gamma) {
    return dirichlet_posterior_mean(counts, uniform_prior(magnitude, counts.n_states, counts.n_actions), r_hat, gamma,
                                    magnitude);
}

namespace detail {

inline void check_eps(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw ArgumentError(cat("eps must lie in [0,1], got ", eps));
}

} // namespace detail

/// Scales every MLE row by (1 - eps); rows become substochastic.
inline RegularizedModel discount_blend(const EstimatedModel& model, double eps, double gamma) {
    detail::check_eps(eps);
    RegularizedModel out;
    out.method = Method::discount;
    out.strength = eps;
    out.effective_gamma = gamma;
    out.lowered_gamma = (1.0 - eps) * gamma;
    out.r_hat = model.r_hat;
    out.eps_per_pair = Matrix::Constant(model.r_hat.rows(), model.r_hat.cols(), eps);
    for (const auto& t : model.t_hat) out.t_reg.push_back((1.0 - eps) * t);
    return out;
}

/// Blends each action's MLE matrix with the action-averaged matrix.
inline RegularizedModel eps_greedy_blend(const EstimatedModel& model, double eps, double gamma) {
    detail::check_eps(eps);
    RegularizedModel out;
    out.method = Method::eps_greedy;
    out.strength = eps;
    out.effective_gamma = gamma;
    out.lowered_gamma = gamma;
    out.r_hat = model.r_hat;
    out.eps_per_pair = Matrix::Constant(model.r_hat.rows(), model.r_hat.cols(), eps);
    const auto n = static_cast<Eigen::Index>(model.n_states());
    Matrix mean = Matrix::Zero(n, n);
    for (const auto& t : model.t_hat) mean += t;
    mean /= static_cast<double>(model.t_hat.size());
    for (const auto& t : model.t_hat) out.t_reg.push_back((1.0 - eps) * t + eps * mean);
    return out;
}

inline RegularizedModel unregularized(const EstimatedModel& model, double gamma) {
    RegularizedModel out;
    out.method = Method::none;
    out.effective_gamma = gamma;
    out.lowered_gamma = gamma;
    out.r_hat = model.r_hat;
    out.t_reg = model.t_hat;
    out.eps_per_pair = Matrix::Zero(model.r_hat.rows(), model.r_hat.cols());
    return out;
}

// ---------------------------------------------------------------------------
// Conversions between the parameterizations.
// ---------------------------------------------------------------------------

/// eps = (gamma - gamma_l) / gamma
inline double eps_from_discounts(double gamma, double gamma_l) {
    if (gamma == 0.0) throw DomainError("eps_from_discounts: gamma must be nonzero");
    return (gamma - gamma_l) / gamma;
}

/// gamma_l = (1 - eps) gamma
inline double lowered_discount(double gamma, double eps) { return (1.0 - eps) * gamma; }

/// eps = sum(alpha) / (sum(c) + sum(alpha))
inline double eps_from_prior(double alpha_sum, double count_sum) {
    const double denom = alpha_sum + count_sum;
    if (denom == 0.0) throw DomainError("eps_from_prior: alpha_sum + count_sum is zero");
    return alpha_sum / denom;
}

/// sum(alpha) = eps / (1 - eps) * sum(c)
inline double prior_sum_from_eps(double eps, double count_sum) {
    if (eps == 1.0) throw DomainError("prior_sum_from_eps: eps = 1 needs an infinite prior");
    return eps / (1.0 - eps) * count_sum;
}

/**
 * Per-entry uniform Dirichlet parameter that reproduces discount
 * regularization at a pair with `count_sum` observations:
 * alpha_i = (gamma - gamma_l) / gamma_l * count_sum / N.
 */
inline double implied_prior_magnitude(double gamma, double gamma_l, double count_sum, std::size_t n_states) {
    if (gamma_l == 0.0) throw DomainError("implied_prior_magnitude: gamma_l = 0 is singular");
    if (!(gamma_l > 0.0 && gamma_l <= gamma && gamma < 1.0))
        throw DomainError("implied_prior_magnitude: need 0 < gamma_l <= gamma < 1");
    if (count_sum < 0.0) throw DomainError("implied_prior_magnitude: negative count");
    if (n_states == 0) throw DomainError("implied_prior_magnitude: N must be positive");
    return (gamma - gamma_l) / gamma_l * count_sum / static_cast<double>(n_states);
}

} // namespace regmdp
