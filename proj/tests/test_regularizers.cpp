#include "regmdp/properties.hpp"
#include "regmdp/regularizers.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

using namespace regmdp;
using regmdp::test::mat;

namespace {

CountsTensor counts_from_row(std::initializer_list<std::int64_t> row) {
    CountsTensor c(row.size(), 1);
    Eigen::Index j = 0;
    for (auto x : row) {
        c.c[0](0, j++) = x;
        c.visit_count(0, 0) += x;
    }
    return c;
}

DirichletPrior single_row_prior(std::size_t n, std::initializer_list<double> row) {
    DirichletPrior p{{Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))}};
    Eigen::Index j = 0;
    for (double x : row) p.alpha[0](0, j++) = x;
    return p;
}

EstimatedModel model_of(ActionMatrices t) {
    EstimatedModel m;
    const auto n = t.front().rows();
    m.r_hat = Matrix::Zero(n, static_cast<Eigen::Index>(t.size()));
    m.t_hat = std::move(t);
    return m;
}

} // namespace

TEST(DirichletPosteriorMean, ConjugateUpdate) {
    const auto counts = counts_from_row({2, 0, 2});
    const auto r = dirichlet_posterior_mean(counts, single_row_prior(3, {1, 1, 1}), Matrix::Zero(3, 1), 0.9);
    EXPECT_NEAR(r.t_reg[0](0, 0), 3.0 / 7.0, 1e-15);
    EXPECT_NEAR(r.t_reg[0](0, 1), 1.0 / 7.0, 1e-15);
    EXPECT_NEAR(r.t_reg[0](0, 2), 3.0 / 7.0, 1e-15);
    EXPECT_NEAR(r.eps_per_pair(0, 0), 3.0 / 7.0, 1e-15);
}

TEST(DirichletPosteriorMean, ZeroPriorIsMle) {
    const auto counts = counts_from_row({3, 1});
    const auto r = dirichlet_posterior_mean(counts, 0.0, Matrix::Zero(2, 1), 0.9);
    EXPECT_DOUBLE_EQ(r.t_reg[0](0, 0), 0.75);
    EXPECT_DOUBLE_EQ(r.t_reg[0](0, 1), 0.25);
    EXPECT_EQ(r.t_reg[0], mle_model(counts).t_hat[0]);
}

TEST(DirichletPosteriorMean, NoCountsGivesPriorMean) {
    const auto r = dirichlet_posterior_mean(CountsTensor(4, 2), 7.0, Matrix::Zero(4, 2), 0.9);
    for (const auto& t : r.t_reg) EXPECT_LT((t.array() - 0.25).abs().maxCoeff(), 1e-15);
    // zero prior and zero counts falls back to uniform too
    const auto z = dirichlet_posterior_mean(CountsTensor(4, 2), 0.0, Matrix::Zero(4, 2), 0.9);
    for (const auto& t : z.t_reg) EXPECT_LT((t.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(DirichletPosteriorMean, RejectsNegativeAlpha) {
    EXPECT_THROW(dirichlet_posterior_mean(counts_from_row({1, 1}), single_row_prior(2, {1, -1}), Matrix::Zero(2, 1), 0.9),
                 ArgumentError);
    EXPECT_THROW(uniform_prior(-1.0, 2, 1), ArgumentError);
}

TEST(UniformPrior, Magnitudes) {
    EXPECT_EQ(uniform_prior(0.0, 3, 2).alpha[1], Matrix::Zero(3, 3));
    const auto p = uniform_prior(10.0, 10, 2);
    EXPECT_LT((p.alpha[0].array() - 1.0).abs().maxCoeff(), 1e-15);
    EXPECT_NEAR(p.alpha[1].row(4).sum(), 10.0, 1e-12);
}

TEST(DiscountBlend, Endpoints) {
    const auto m = model_of({mat({{0.4, 0.6}, {1, 0}})});
    EXPECT_EQ(discount_blend(m, 0.0, 0.9).t_reg[0], m.t_hat[0]);
    EXPECT_EQ(discount_blend(m, 1.0, 0.9).t_reg[0], Matrix::Zero(2, 2));
}

TEST(DiscountBlend, ScalesRows) {
    const auto r = discount_blend(model_of({mat({{0.4, 0.6}, {1, 0}})}), 0.25, 0.8);
    EXPECT_NEAR(r.t_reg[0](0, 0), 0.3, 1e-15);
    EXPECT_NEAR(r.t_reg[0](0, 1), 0.45, 1e-15);
    EXPECT_NEAR(r.lowered_gamma, 0.6, 1e-15);
    EXPECT_DOUBLE_EQ(r.effective_gamma, 0.8);
}

TEST(DiscountBlend, RejectsEpsOutOfRange) {
    const auto m = model_of({mat({{1}})});
    EXPECT_THROW(discount_blend(m, -0.1, 0.9), ArgumentError);
    EXPECT_THROW(discount_blend(m, 1.1, 0.9), ArgumentError);
    EXPECT_THROW(eps_greedy_blend(m, 2.0, 0.9), ArgumentError);
}

TEST(EpsGreedyBlend, SingleActionUnchanged) {
    const auto m = model_of({mat({{0.2, 0.8}, {0.5, 0.5}})});
    for (double eps : {0.0, 0.3, 1.0}) EXPECT_LT((eps_greedy_blend(m, eps, 0.9).t_reg[0] - m.t_hat[0]).norm(), 1e-15);
}

TEST(EpsGreedyBlend, FullBlendAveragesActions) {
    const auto m = model_of({mat({{1, 0}, {0.2, 0.8}}), mat({{0, 1}, {0.6, 0.4}})});
    const auto r = eps_greedy_blend(m, 1.0, 0.9);
    const Matrix avg = mat({{0.5, 0.5}, {0.4, 0.6}});
    EXPECT_LT((r.t_reg[0] - avg).norm(), 1e-15);
    EXPECT_LT((r.t_reg[1] - avg).norm(), 1e-15);
}

TEST(EpsGreedyBlend, ConvexCombination) {
    const auto m = model_of({mat({{1, 0}, {1, 0}}), mat({{0, 1}, {0, 1}})});
    const auto r = eps_greedy_blend(m, 0.5, 0.9);
    EXPECT_DOUBLE_EQ(r.t_reg[0](0, 0), 0.75);
    EXPECT_DOUBLE_EQ(r.t_reg[0](0, 1), 0.25);
}

TEST(ImpliedPriorMagnitude, FormulaValues) {
    EXPECT_NEAR(implied_prior_magnitude(0.9, 0.45, 20, 10), 2.0, 1e-14);
    EXPECT_DOUBLE_EQ(implied_prior_magnitude(0.9, 0.9, 20, 10), 0.0);
    EXPECT_NEAR(implied_prior_magnitude(0.9, 0.45, 40, 10), 2 * implied_prior_magnitude(0.9, 0.45, 20, 10), 1e-14);
    EXPECT_THROW(implied_prior_magnitude(0.9, 0.0, 20, 10), DomainError);
}

TEST(EpsConversions, Values) {
    EXPECT_DOUBLE_EQ(eps_from_discounts(0.9, 0.9), 0.0);
    EXPECT_NEAR(eps_from_discounts(0.8, 0.4), 0.5, 1e-15);
    EXPECT_NEAR(eps_from_prior(5, 15), 0.25, 1e-15);
    EXPECT_THROW(eps_from_prior(0, 0), DomainError);
    EXPECT_THROW(eps_from_discounts(0.0, 0.0), DomainError);
}

TEST(EpsConversions, RoundTrip) {
    Rng rng(4);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 1000; ++i) {
        const double gamma = u(rng), eps = u(rng), csum = 100 * u(rng);
        EXPECT_NEAR(eps_from_discounts(gamma, lowered_discount(gamma, eps)), eps, 1e-12);
        EXPECT_NEAR(eps_from_prior(prior_sum_from_eps(eps, csum), csum), eps, 1e-12);
        // implied per-entry alpha reproduces the same eps through the prior route
        const double alpha = implied_prior_magnitude(gamma, lowered_discount(gamma, eps), csum, 7);
        EXPECT_NEAR(eps_from_prior(7 * alpha, csum), eps, 1e-12);
    }
}

TEST(Regularizers, ConvexityAndEndpointsOnRandomModels) {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        const auto mdp = properties::random_mdp(rng);
        const auto est = properties::as_estimate(mdp);
        const auto counts = properties::uniform_visit_counts(rng, mdp.n_states, mdp.n_actions, 1 + i);
        for (double eps : {0.0, 0.2, 0.7, 1.0}) {
            const auto g = eps_greedy_blend(est, eps, 0.9);
            const auto d = discount_blend(est, eps, 0.9);
            for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                EXPECT_LT((g.t_reg[a].rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
                EXPECT_LT((d.t_reg[a].rowwise().sum().array() - (1.0 - eps)).abs().maxCoeff(), 1e-9);
                EXPECT_GE(g.t_reg[a].minCoeff(), 0.0);
                EXPECT_GE(d.t_reg[a].minCoeff(), 0.0);
            }
            if (eps == 0.0) {
                for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                    EXPECT_EQ(g.t_reg[a], est.t_hat[a]);
                    EXPECT_EQ(d.t_reg[a], est.t_hat[a]);
                }
            }
            if (eps == 1.0) {
                for (std::size_t a = 1; a < mdp.n_actions; ++a) EXPECT_LT((g.t_reg[a] - g.t_reg[0]).norm(), 1e-14);
            }
        }
        for (double m : {0.0, 1.0, 50.0}) {
            const auto p = dirichlet_posterior_mean(counts, m, est.r_hat, 0.9);
            for (const auto& t : p.t_reg) {
                EXPECT_LT((t.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
                EXPECT_GE(t.minCoeff(), 0.0);
            }
        }
    }
}

TEST(Regularizers, MethodNames) {
    for (auto m : {Method::none, Method::dirichlet, Method::discount, Method::eps_greedy})
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_THROW(parse_method("l2"), ArgumentError);
}
