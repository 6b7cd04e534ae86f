#include "regmdp/mdp.hpp"
#include "regmdp/planning.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace regmdp;
using regmdp::test::mat;

namespace {

bool mentions(const std::vector<std::string>& report, const std::string& needle) {
    return std::any_of(report.begin(), report.end(),
                       [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

} // namespace

TEST(ValidateMdp, WellFormedHasEmptyReport) {
    EXPECT_TRUE(validate_mdp(test::two_state_mdp()).empty());
}

TEST(ValidateMdp, ReportsRowSum) {
    auto m = test::two_state_mdp();
    m.transition[0] = mat({{0.6, 0.6}, {0, 1}});
    const auto report = validate_mdp(m);
    ASSERT_EQ(report.size(), 1u);
    EXPECT_TRUE(mentions(report, "row 0 sums to 1.2")) << report[0];
}

TEST(ValidateMdp, ReportsGammaOutOfRange) {
    auto m = test::two_state_mdp();
    m.gamma = 1.0;
    EXPECT_TRUE(mentions(validate_mdp(m), "gamma out of range"));
}

TEST(ValidateMdp, ReportsNegativeEntriesAndBadStart) {
    auto m = test::two_state_mdp();
    m.transition[1] = mat({{-0.5, 1.5}, {1, 0}});
    m.start_dist << 0.7, 0.7;
    const auto report = validate_mdp(m);
    EXPECT_TRUE(mentions(report, "negative entry"));
    EXPECT_TRUE(mentions(report, "start_dist sums to"));
}

TEST(ValidateMdp, AbsorbingMustSelfLoopWithZeroReward) {
    auto m = test::two_state_mdp();
    m.absorbing = {1};
    // state 1 pays 1 and action 1 leaves it
    const auto report = validate_mdp(m);
    EXPECT_TRUE(mentions(report, "not a self-loop"));
    EXPECT_TRUE(mentions(report, "nonzero reward"));
}

TEST(ValidateMdp, ShapeMismatchDoesNotCrash) {
    auto m = test::two_state_mdp();
    m.transition.pop_back();
    m.reward_mean.resize(3, 2);
    EXPECT_FALSE(validate_mdp(m).empty());
}

TEST(RewardShift, ZeroIsIdentity) {
    const auto m = test::two_state_mdp();
    EXPECT_EQ(apply_reward_shift(m, 0.0), m);
}

TEST(RewardShift, SelfLoopValueRisesByGeometricSum) {
    TabularMdp m;
    m.n_states = 1;
    m.n_actions = 1;
    m.transition = {mat({{1}})};
    m.reward_mean = mat({{1}});
    m.reward_std = mat({{0}});
    m.gamma = 0.5;
    m.start_dist = uniform_distribution(1);
    const DeterministicPolicy pi(1, 0);
    const double before = policy_evaluation(PlanningProblem::from_mdp(m), pi)(0);
    const double after = policy_evaluation(PlanningProblem::from_mdp(apply_reward_shift(m, 1.0)), pi)(0);
    EXPECT_NEAR(before, 2.0, 1e-12);
    EXPECT_NEAR(after - before, 2.0, 1e-12); // x / (1 - gamma)
}

TEST(RewardShift, SkipsAbsorbingStates) {
    auto m = test::two_state_mdp();
    m.transition[1] = mat({{0, 1}, {0, 1}});
    m.reward_mean(1, 0) = m.reward_mean(1, 1) = 0.0;
    m.absorbing = {1};
    ASSERT_TRUE(validate_mdp(m).empty());
    const auto shifted = apply_reward_shift(m, 3.0);
    EXPECT_TRUE(validate_mdp(shifted).empty());
    EXPECT_DOUBLE_EQ(shifted.reward_mean(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(shifted.reward_mean(1, 0), 0.0);
}

TEST(RewardShift, OptimalPolicyUnchangedOnTwoStates) {
    const auto m = test::two_state_mdp();
    const auto base = policy_iteration(PlanningProblem::from_mdp(m));
    for (double x : {-7.0, -1.0, 0.5, 42.0}) {
        const auto shifted = policy_iteration(PlanningProblem::from_mdp(apply_reward_shift(m, x)));
        EXPECT_EQ(shifted.policy, base.policy) << "x = " << x;
    }
}
