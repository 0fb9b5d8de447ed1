#include <gtest/gtest.h>

#include <sstream>

#include "ehsc/rng.hpp"
#include "ehsc/scheduling.hpp"

namespace ehsc {
namespace {

SensorSpec sensor(double pq, double ph) {
    return {GaussianIidSourceModel{}, SlotGeometry(100, 100),
            Environment{{0.6309573444801932, 1.0}, {pq, 1.0 - pq}, {3.5, 7.0}, {ph, 1.0 - ph}, UniformEnergy{0.0, 2.0}}};
}

MultiSensorSpec one(const SensorSpec& s, double d_bar) { return {{s}, {d_bar}, {}}; }

std::vector<std::vector<double>> constant_beta(std::size_t rows, std::vector<double> row) {
    return std::vector<std::vector<double>>(rows, row);
}

TEST(Scheduling, SingleSensorCheckerReducesToDo) {
    Rng rng(41);
    for (int i = 0; i < 50; ++i) {
        const SensorSpec s = sensor(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95));
        const double d_bar = rng.uniform(0.6, 0.95);
        const DoParams p{{rng.uniform(0.6, 1.0), rng.uniform(0.6, 1.0)},
                         {rng.uniform(0.05, 0.6), rng.uniform(0.05, 0.6)},
                         {rng.uniform(0.05, 0.6), rng.uniform(0.05, 0.6)},
                         rng.uniform(0.2, 0.8),
                         1e-3};
        const MultiReport m = check_multi({constant_beta(2, {1.0}), {p}, false}, one(s, d_bar));
        const FeasibilityReport d = check_do(p, s, d_bar);
        EXPECT_EQ(m.feasible, d.feasible);
        EXPECT_EQ(m.sensors[0].margins.rate, d.margins.rate);
        EXPECT_EQ(m.sensors[0].margins.energy_channel, d.margins.energy_channel);
    }
}

TEST(Scheduling, HalfSharesHalveTheChannelTerm) {
    const SensorSpec s = sensor(0.3, 0.3);
    const MultiSensorSpec two{{s, s}, {0.9, 0.9}, {}};
    const auto w = channel_weights(two, constant_beta(4, {0.5, 0.5}));
    for (std::size_t l = 0; l < 2; ++l) {
        for (std::size_t h = 0; h < 2; ++h) EXPECT_NEAR(w[l][h], 0.5 * s.env.h_pmf[h], 1e-15);
    }
    const DoParams p{{0.9, 0.9}, {0.2, 0.2}, {0.3, 0.6}, 0.5, 1e-3};
    double channel = 0.0;
    for (std::size_t h = 0; h < 2; ++h) {
        channel += s.env.h_pmf[h] * channel_rate_awgn(s.geometry, s.env.h_support[h], p.tt_per_h[h]);
    }
    const MultiReport m = check_multi({constant_beta(4, {0.5, 0.5}), {p, p}, true}, two);
    const double full = check_do(p, s, 0.9).margins.rate;
    for (std::size_t l = 0; l < 2; ++l) EXPECT_NEAR(full - m.sensors[l].margins.rate, 0.5 * channel, 1e-9 * channel);
}

TEST(Scheduling, BetaRowsMustSumToOne) {
    EXPECT_THROW(validate_beta(constant_beta(4, {0.5, 0.4}), 4, 2), InvariantViolation);
    EXPECT_THROW(validate_beta(constant_beta(3, {0.5, 0.5}), 4, 2), InvariantViolation);
    EXPECT_NO_THROW(validate_beta(constant_beta(4, {0.25, 0.75}), 4, 2));
}

TEST(Scheduling, SingleSensorSimulationMatchesRun) {
    const SensorSpec s = sensor(0.3, 0.3);
    const FeasibilityReport rep = synthesize_do(s, 0.9);
    ASSERT_TRUE(rep.feasible);
    const DoParams p = std::get<DoParams>(*rep.witness);
    const TdmaTrace t = simulate_tdma(one(s, 0.9), {constant_beta(2, {1.0}), {p}, false}, 20000, 77);
    const Trace r = run(s, p, 20000, 77);
    std::ostringstream a, b;
    write_trace_csv(a, t.sensors[0], s.env);
    write_trace_csv(b, r, s.env);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Scheduling, SingleSensorSweepMatchesRegionSweep) {
    TwoSensorSetup setup;
    setup.base = one(sensor(0.5, 0.5), 0.8);
    setup.axis1 = linear_grid(0.0, 1.0, 6);
    setup.axis2 = linear_grid(0.0, 1.0, 6);
    const ScheduleRegion r = region_sweep_two_sensors(setup);
    RegionSetup single;
    single.base = setup.base.sensors[0];
    single.kind = AxisKind::WorstProbability;
    single.axis1 = setup.axis1;
    single.axis2 = setup.axis2;
    single.d_bar = 0.8;
    const RegionGrid g = region_sweep(single, PolicyClass::Do);
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        EXPECT_EQ(r.opportunistic.points[i].feasible, g.points[i].feasible);
        EXPECT_EQ(r.outer.points[i].feasible, g.points[i].feasible);
    }
}

TEST(Scheduling, SymmetricSensorsAdmitEvenSplit) {
    // Each sensor needs the same channel share, so whenever some fixed split
    // works the even split works too.
    const SensorSpec s = sensor(0.5, 0.5);
    const MultiSensorSpec two{{s, s}, {0.9, 0.9}, {}};
    const MultiReport rep = synthesize_fixed_schedule(two);
    ASSERT_TRUE(rep.feasible);
    const std::vector<double> half{0.5 * s.env.h_pmf[0], 0.5 * s.env.h_pmf[1]};
    const FeasibilityReport even = DoSearch(s, 0.9).synthesize(half);
    ASSERT_TRUE(even.feasible);
    const DoParams p = std::get<DoParams>(*even.witness);
    EXPECT_TRUE(check_multi({constant_beta(4, {0.5, 0.5}), {p, p}, true}, two).feasible);
}

TEST(Scheduling, OpportunisticContainsFixedAndSimulates) {
    const MultiSensorSpec two{{sensor(0.3, 0.2), sensor(0.1, 0.1)}, {0.8, 0.8}, {}};
    const MultiReport fixed = synthesize_fixed_schedule(two);
    const MultiReport opp = synthesize_schedule(two);
    if (fixed.feasible) EXPECT_TRUE(opp.feasible);
    ASSERT_TRUE(opp.feasible);
    const TdmaTrace t = simulate_tdma(two, *opp.witness, 1'000'000, 5);
    const auto joint = two.joint_pmf();
    for (std::size_t l = 0; l < 2; ++l) {
        double expected = 0.0;
        for (std::size_t j = 0; j < joint.size(); ++j) expected += joint[j] * opp.witness->beta[j][l];
        const double share = static_cast<double>(t.scheduled_slots[l]) / 1e6;
        EXPECT_NEAR(share, expected, 0.01 * std::max(expected, 1e-3) + 1e-3);
        EXPECT_NE(stability_estimate(t.sensors[l]).verdict, Verdict::Unstable);
        EXPECT_LE(t.sensors[l].summary.mean_distortion, 0.8 * 1.01);
    }
}

TEST(Scheduling, StarvedSensorNeedsMaximalDistortion) {
    SensorSpec dead = sensor(0.5, 0.5);
    dead.env.energy = DiscreteEnergy{{0.0}, {1.0}};
    const MultiSensorSpec tight{{sensor(0.5, 0.5), dead}, {0.9, 0.8}, {}};
    EXPECT_FALSE(synthesize_schedule(tight).feasible);
}

TEST(Scheduling, SpecValidation) {
    MultiSensorSpec s{{sensor(0.5, 0.5), sensor(0.5, 0.5)}, {0.8}, {}};
    EXPECT_THROW(s.validate(), SpecError);
    s.d_bar = {0.8, 0.8};
    s.joint_h_pmf = {0.25, 0.25, 0.25, 0.2};
    EXPECT_THROW(s.validate(), SpecError);
    s.joint_h_pmf = {0.5, 0.0, 0.0, 0.5};
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.joint_state(2), (std::vector<std::size_t>{1, 0}));
}

} // namespace
} // namespace ehsc
