#include "regmdp/data.hpp"
#include "regmdp/environments.hpp"
#include "regmdp/planning.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace regmdp;

namespace {

DeterministicPolicy optimal_for(const TabularMdp& m) { return policy_iteration(PlanningProblem::from_mdp(m)).policy; }

void expect_chained(const Trajectory& t) {
    for (std::size_t k = 1; k < t.size(); ++k) EXPECT_EQ(t[k].state, t[k - 1].next_state);
}

} // namespace

TEST(SampleTrajectory, FullyOptimalBehaviour) {
    const auto m = build_cliff_walk();
    const auto opt = optimal_for(m);
    CollectionConfig cfg{1, 200, 1.0, StartMode::uniform()};
    Rng rng(5);
    const auto t = sample_trajectory(m, opt, cfg, rng);
    ASSERT_EQ(t.size(), 200u);
    for (const auto& st : t) EXPECT_EQ(st.action, opt[st.state]);
    expect_chained(t);
}

TEST(SampleTrajectory, RandomBehaviourIsBalanced) {
    const auto m = test::two_state_mdp();
    CollectionConfig cfg{1, 10000, 0.0, StartMode::uniform()};
    Rng rng(11);
    const auto t = sample_trajectory(m, DeterministicPolicy(2, 0), cfg, rng);
    std::size_t ones = 0;
    for (const auto& st : t) ones += st.action;
    // binomial(1e4, 0.5) has sd 0.005; 0.02 is four sd
    EXPECT_NEAR(static_cast<double>(ones) / 1e4, 0.5, 0.02);
}

TEST(SampleTrajectory, SameSeedSameTrajectory) {
    const auto m = build_two_goals();
    const auto opt = optimal_for(m);
    CollectionConfig cfg{1, 50, 0.5, StartMode::uniform()};
    Rng a(77), b(77);
    EXPECT_EQ(sample_trajectory(m, opt, cfg, a), sample_trajectory(m, opt, cfg, b));
}

TEST(SampleTrajectory, AbsorbingStatesPayNothing) {
    const auto m = build_two_goals();
    CollectionConfig cfg{1, 30, 0.0, StartMode::fixed(11)};
    Rng rng(1);
    for (const auto& st : sample_trajectory(m, optimal_for(m), cfg, rng)) {
        EXPECT_EQ(st.state, 11u);
        EXPECT_EQ(st.next_state, 11u);
        EXPECT_EQ(st.reward, 0.0);
    }
}

TEST(SampleTrajectory, RewardNoiseMatchesConfiguredScale) {
    auto m = test::two_state_mdp();
    m.reward_std.setConstant(0.5);
    CollectionConfig cfg{1, 20000, 0.0, StartMode::uniform()};
    Rng rng(8);
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (const auto& st : sample_trajectory(m, DeterministicPolicy(2, 0), cfg, rng)) {
        if (st.state != 1) continue;
        const double d = st.reward - 1.0;
        sum += d;
        sq += d * d;
        ++n;
    }
    ASSERT_GT(n, 5000u);
    EXPECT_NEAR(sum / static_cast<double>(n), 0.0, 0.03);
    EXPECT_NEAR(std::sqrt(sq / static_cast<double>(n)), 0.5, 0.03);
}

TEST(GenerateDataset, StepTotals) {
    const auto m = builtin_mdp("grid");
    const auto opt = optimal_for(m);
    EXPECT_EQ(total_steps(generate_dataset(m, opt, {15, 10, 0.0, StartMode::uniform()}, 1)), 150u);
    const auto c = build_cliff_walk();
    EXPECT_EQ(total_steps(generate_dataset(c, optimal_for(c), {25, 20, 0.0, StartMode::uniform()}, 1)), 500u);
}

TEST(GenerateDataset, DeterministicInSeed) {
    const auto m = build_cliff_walk();
    const auto opt = optimal_for(m);
    const CollectionConfig cfg{25, 20, 0.5, StartMode::uniform()};
    EXPECT_EQ(generate_dataset(m, opt, cfg, 42), generate_dataset(m, opt, cfg, 42));
    EXPECT_NE(generate_dataset(m, opt, cfg, 42), generate_dataset(m, opt, cfg, 43));
}

TEST(GenerateDataset, ChainingAndStartModes) {
    const auto m = build_cliff_walk();
    const auto opt = optimal_for(m);
    for (const auto& t : generate_dataset(m, opt, {20, 20, 0.0, StartMode::fixed(cliff::kStart)}, 3)) {
        EXPECT_EQ(t.front().state, cliff::kStart);
        expect_chained(t);
    }
    const auto near = cliff::near_goal_states();
    for (const auto& t : generate_dataset(m, opt, {50, 5, 0.0, StartMode::set(near)}, 3))
        EXPECT_NE(std::find(near.begin(), near.end(), t.front().state), near.end());
}

TEST(GenerateDataset, RejectsBadConfig) {
    const auto m = build_two_goals();
    const auto opt = optimal_for(m);
    EXPECT_THROW(generate_dataset(m, opt, {0, 10, 0.0, {}}, 1), ValidationError);
    EXPECT_THROW(generate_dataset(m, opt, {1, 10, 1.5, {}}, 1), ValidationError);
    EXPECT_THROW(generate_dataset(m, opt, {1, 10, 0.0, StartMode::set({})}, 1), ValidationError);
    EXPECT_THROW(generate_dataset(m, opt, {1, 10, 0.0, StartMode::fixed(99)}, 1), ValidationError);
}

TEST(ChildSeed, DistinctAndStable) {
    EXPECT_EQ(child_seed(1, 0), child_seed(1, 0));
    EXPECT_NE(child_seed(1, 0), child_seed(1, 1));
    EXPECT_NE(child_seed(1, 0), child_seed(2, 0));
    // splitmix64 reference output for state 0 after one step
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(StartMode, Distribution) {
    const auto d = StartMode::set({1, 3}).distribution(4);
    EXPECT_DOUBLE_EQ(d(1), 0.5);
    EXPECT_DOUBLE_EQ(d(3), 0.5);
    EXPECT_DOUBLE_EQ(d(0), 0.0);
    EXPECT_DOUBLE_EQ(StartMode::uniform().distribution(4)(2), 0.25);
}

TEST(DatasetCsv, HeaderAndRows) {
    Dataset d{{{0, 1, 0.5, 2}, {2, 0, -1.0, 1}}};
    std::ostringstream os;
    write_dataset_csv(os, d, 7, true);
    EXPECT_EQ(os.str(), "replication,trajectory,step,state,action,reward,next_state\n"
                        "7,0,0,0,1,0.5,2\n"
                        "7,0,1,2,0,-1,1\n");
}
