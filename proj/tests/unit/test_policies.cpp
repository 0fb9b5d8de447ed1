#include <gtest/gtest.h>

#include "ehsc/policies.hpp"
#include "ehsc/rng.hpp"

namespace ehsc {
namespace {

DoParams do_params(double alpha, double eps) { return {{0.7}, {0.3}, {0.7}, alpha, eps}; }

TEST(Policies, DoLargeBufferUsesNominalValues) {
    const Action a = decide(do_params(0.5, 0.01), {10.0, 0.0, 0, 0}, 1.0);
    ASSERT_TRUE(a.d.has_value());
    EXPECT_DOUBLE_EQ(*a.d, 0.7);
    EXPECT_DOUBLE_EQ(a.ts, 0.3);
    EXPECT_DOUBLE_EQ(a.tt, 0.7);
}

TEST(Policies, DoSmallBufferSplitsShares) {
    const Action a = decide(do_params(0.5, 0.01), {0.4, 0.0, 0, 0}, 0.4);
    EXPECT_NEAR(a.ts, 0.19, 1e-15);
    EXPECT_NEAR(a.tt, 0.19, 1e-15);
}

TEST(Policies, DoClampsNegativeShares) {
    const Action a = decide(do_params(0.5, 0.01), {0.01, 0.0, 0, 0}, 0.01);
    EXPECT_EQ(a.ts, 0.0);
    EXPECT_EQ(a.tt, 0.0);
}

TEST(Policies, AnalogGreedySpendsArrival) {
    const Action a = decide(AnalogGreedyParams{}, {2.0, 0.0, 0, 0}, 1.3);
    EXPECT_FALSE(a.d.has_value());
    EXPECT_EQ(a.ts, 0.0);
    EXPECT_DOUBLE_EQ(a.tt, 1.3);
}

TEST(Policies, GreedyAndHybridRules) {
    GreedyParams g{QhTable(1, 1, 0.6), QhTable(1, 1, 0.25)};
    Action a = decide(g, {3.0, 0.0, 0, 0}, 2.0);
    EXPECT_DOUBLE_EQ(a.ts, 0.5);
    EXPECT_DOUBLE_EQ(a.tt, 1.5);
    a = decide(GreedyFixedParams{QhTable(1, 1, 0.6), 0.75}, {3.0, 0.0, 0, 0}, 2.0);
    EXPECT_DOUBLE_EQ(a.ts, 1.5);
    EXPECT_DOUBLE_EQ(a.tt, 0.5);
    a = decide(Hybrid1Params{{0.6}, {0.4}, 0.5}, {3.0, 0.0, 0, 0}, 2.0);
    EXPECT_DOUBLE_EQ(a.ts, 1.0);
    EXPECT_DOUBLE_EQ(a.tt, 0.4);
    a = decide(Hybrid2Params{{0.6}, {0.4}, 0.5}, {3.0, 0.0, 0, 0}, 2.0);
    EXPECT_DOUBLE_EQ(a.ts, 0.4);
    EXPECT_DOUBLE_EQ(a.tt, 1.0);
    a = decide(AnalogParams{QhTable(1, 1, 5.0), 0.01}, {3.0, 0.0, 0, 0}, 2.0);
    EXPECT_DOUBLE_EQ(a.tt, 2.99);
}

TEST(Policies, MissingStateThrows) {
    EXPECT_THROW(decide(do_params(0.5, 0.01), {1.0, 0.0, 1, 0}, 1.0), MissingState);
    EXPECT_THROW(decide(GreedyFixedParams{QhTable(1, 1, 0.6), 0.5}, {1.0, 0.0, 0, 2}, 1.0), MissingState);
}

TEST(Policies, ValidateParams) {
    EXPECT_NO_THROW(validate_params(do_params(0.5, 0.01), 1, 1));
    EXPECT_THROW(validate_params(do_params(1.0, 0.01), 1, 1), InvariantViolation);
    EXPECT_THROW(validate_params(do_params(0.5, 0.01), 2, 1), InvariantViolation);
    EXPECT_THROW(validate_params(GreedyFixedParams{QhTable(1, 1, 0.6), 1.5}, 1, 1), InvariantViolation);
}

TEST(Policies, ClassNamesRoundTrip) {
    for (auto cls : {PolicyClass::Do, PolicyClass::Greedy, PolicyClass::GreedyFixed, PolicyClass::Hybrid1,
                     PolicyClass::Hybrid2, PolicyClass::Analog, PolicyClass::AnalogGreedy}) {
        EXPECT_EQ(policy_class_from_string(to_string(cls)), cls);
    }
    EXPECT_FALSE(policy_class_from_string("bogus").has_value());
}

// Random states for every class: the action never exceeds the buffer.
TEST(Policies, EnergyFeasibilityProperty) {
    Rng rng(21);
    for (int i = 0; i < 2000; ++i) {
        const double arrival = rng.uniform(0.0, 3.0);
        const SlotState s{arrival + rng.uniform(0.0, 5.0), 0.0, static_cast<std::size_t>(rng.uniform01() * 2),
                          static_cast<std::size_t>(rng.uniform01() * 3)};
        const double alpha = rng.uniform(0.01, 0.99);
        QhTable d(2, 3, 0.7), al(2, 3), tt(2, 3);
        for (std::size_t q = 0; q < 2; ++q) {
            for (std::size_t h = 0; h < 3; ++h) {
                al.at(q, h) = rng.uniform01();
                tt.at(q, h) = rng.uniform(0.0, 4.0);
            }
        }
        const std::vector<double> v2{rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)};
        const std::vector<double> v3{rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)};
        const PolicyParams all[] = {DoParams{{0.7, 0.7}, v2, v3, alpha, 1e-3},
                                    GreedyParams{d, al},
                                    GreedyFixedParams{d, alpha},
                                    Hybrid1Params{{0.7, 0.7}, v3, alpha},
                                    Hybrid2Params{{0.7, 0.7}, v2, alpha},
                                    AnalogParams{tt, 1e-3},
                                    AnalogGreedyParams{}};
        for (const auto& p : all) {
            const Action a = decide(p, s, arrival);
            EXPECT_GE(a.ts, 0.0);
            EXPECT_GE(a.tt, 0.0);
            EXPECT_LE(a.ts + a.tt, s.energy);
        }
    }
}

TEST(Policies, DoSeparation) {
    const DoParams p{{0.7, 0.6}, {0.3, 0.9}, {0.2, 0.8, 1.5}, 0.4, 1e-3};
    Rng rng(22);
    for (int i = 0; i < 500; ++i) {
        const double e = rng.uniform(0.0, 4.0);
        for (std::size_t q = 0; q < 2; ++q) {
            const double ts = decide(p, {e, 0.0, q, 0}, 0.0).ts;
            for (std::size_t h = 1; h < 3; ++h) EXPECT_EQ(decide(p, {e, 0.0, q, h}, 0.0).ts, ts);
        }
        for (std::size_t h = 0; h < 3; ++h) {
            EXPECT_EQ(decide(p, {e, 0.0, 0, h}, 0.0).tt, decide(p, {e, 0.0, 1, h}, 0.0).tt);
        }
    }
}

} // namespace
} // namespace ehsc
