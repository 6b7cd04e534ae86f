#include "regmdp/evaluation.hpp"
#include "regmdp/properties.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

using namespace regmdp;
using regmdp::test::mat;

namespace {

RegularizedModel reg_of(ActionMatrices t, Method method = Method::none, double eps = 0.0) {
    RegularizedModel r;
    r.method = method;
    r.strength = eps;
    const auto n = t.front().rows();
    r.eps_per_pair = Matrix::Constant(n, static_cast<Eigen::Index>(t.size()), method == Method::none ? 0.0 : eps);
    r.t_reg = std::move(t);
    return r;
}

// Explicit (N+1) x (N+1) augmentation used as the reference for the absorbing MSE.
Matrix augment(const Matrix& t, bool regularized) {
    const auto n = t.rows();
    Matrix out = Matrix::Zero(n + 1, n + 1);
    out.topLeftCorner(n, n) = t;
    if (regularized)
        for (Eigen::Index s = 0; s < n; ++s) out(s, n) = 1.0 - t.row(s).sum();
    out(n, n) = 1.0;
    return out;
}

} // namespace

TEST(PolicyLoss, IdenticalPoliciesLoseNothing) {
    const auto m = test::two_state_mdp();
    const DeterministicPolicy pi({1, 0});
    EXPECT_EQ(policy_loss(m, pi, pi, m.start_dist).loss, 0.0);
}

TEST(PolicyLoss, DominatedActionAtStart) {
    // optimal values (9, 10); staying at state 0 forever is worth 0
    const auto m = test::two_state_mdp(0.9);
    const DeterministicPolicy opt({1, 0}), bad({0, 0});
    EXPECT_NEAR(policy_loss(m, bad, opt, m.start_dist).loss, 4.5, 1e-12);
    Vector point(2);
    point << 1.0, 0.0;
    const auto r = policy_loss(m, bad, opt, point);
    EXPECT_NEAR(r.loss, 9.0, 1e-12);
    EXPECT_NEAR(r.v_opt(0), 9.0, 1e-12);
    EXPECT_NEAR(r.v_reg(0), 0.0, 1e-12);
}

TEST(PolicyLoss, NonNegativeAgainstTrueOptimum) {
    Rng rng(12);
    for (int i = 0; i < 50; ++i) {
        const auto m = properties::random_mdp(rng);
        const auto opt = policy_iteration(PlanningProblem::from_mdp(m)).policy;
        for (const auto& pi : properties::all_policies(m.n_states, m.n_actions))
            EXPECT_GE(policy_loss(m, pi, opt, m.start_dist).loss, -1e-9);
    }
}

TEST(TransitionMse, IdenticalIsZero) {
    const ActionMatrices t{mat({{0.3, 0.7}, {1, 0}})};
    const auto r = transition_mse(t, reg_of(t));
    EXPECT_EQ(r.mse_plain, 0.0);
    EXPECT_EQ(r.mse_absorbing, 0.0);
}

TEST(TransitionMse, EntrywiseAverage) {
    const ActionMatrices truth{mat({{1, 0}, {0.2, 0.8}})};
    const auto r = transition_mse(truth, reg_of({mat({{0.5, 0.5}, {0.2, 0.8}})}));
    EXPECT_DOUBLE_EQ(r.mse_plain, 0.125);
    EXPECT_DOUBLE_EQ(r.mse_absorbing, 0.125);
}

TEST(TransitionMse, DiscountAugmentationMatchesExplicitConstruction) {
    const ActionMatrices truth{mat({{0.3, 0.7}, {1, 0}}), mat({{0.5, 0.5}, {0.1, 0.9}})};
    EstimatedModel est;
    est.t_hat = {mat({{0.25, 0.75}, {0.9, 0.1}}), mat({{0.6, 0.4}, {0, 1}})};
    est.r_hat = Matrix::Zero(2, 2);
    for (double eps : {0.0, 0.3, 1.0}) {
        const auto reg = discount_blend(est, eps, 0.9);
        double sq_plain = 0, sq_aug = 0;
        for (std::size_t a = 0; a < 2; ++a) {
            sq_plain += (truth[a] - reg.t_reg[a]).array().square().sum();
            sq_aug += (augment(truth[a], false) - augment(reg.t_reg[a], true)).array().square().sum();
        }
        const auto r = transition_mse(truth, reg);
        EXPECT_NEAR(r.mse_plain, sq_plain / 8.0, 1e-15);
        EXPECT_NEAR(r.mse_absorbing, sq_aug / 18.0, 1e-15);
    }
}

TEST(TransitionMse, FullDiscountClosedForm) {
    // eps = 1: every regularized row is (0, ..., 0 | 1); each true row contributes sum(p^2) + 1
    const ActionMatrices truth{mat({{0.3, 0.7}, {1, 0}})};
    EstimatedModel est;
    est.t_hat = truth;
    est.r_hat = Matrix::Zero(2, 1);
    const auto r = transition_mse(truth, discount_blend(est, 1.0, 0.9));
    EXPECT_NEAR(r.mse_absorbing, ((0.09 + 0.49 + 1) + (1 + 1)) / 9.0, 1e-15);
    EXPECT_NEAR(r.mse_plain, (0.09 + 0.49 + 1) / 4.0, 1e-15);
}

TEST(TransitionMse, ShapeMismatch) {
    const ActionMatrices truth{mat({{1, 0}, {0, 1}})};
    EXPECT_THROW(transition_mse(truth, reg_of({mat({{1}})})), ArgumentError);
    EXPECT_THROW(transition_mse({truth[0], truth[0]}, reg_of(truth)), ArgumentError);
}

TEST(TransitionMse, DirichletApproachesUniformMseForLargePriors) {
    Rng rng(6);
    const auto m = properties::random_mdp(rng, {5, 5, 2, 2, 0.9, false});
    const auto data = generate_dataset(m, DeterministicPolicy(5, 0), {10, 10, 0.0, {}}, 3);
    const auto counts = count(data, 5, 2);
    EstimatedModel uniform;
    uniform.t_hat.assign(2, Matrix::Constant(5, 5, 0.2));
    const double target = transition_mse(m.transition, reg_of(uniform.t_hat)).mse_plain;
    double prev = -1;
    for (double mag : {0.0, 1.0, 10.0, 100.0, 1e4, 1e8}) {
        const double v = transition_mse(m.transition, dirichlet_posterior_mean(counts, mag, Matrix::Zero(5, 2), 0.9))
                             .mse_plain;
        EXPECT_TRUE(std::isfinite(v));
        prev = v;
    }
    EXPECT_NEAR(prev, target, 1e-6);
}
