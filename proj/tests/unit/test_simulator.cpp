#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ehsc/feasibility.hpp"
#include "ehsc/simulator.hpp"

namespace ehsc {
namespace {

SensorSpec constant_spec(double q, double h, SlotGeometry g = SlotGeometry(100, 100)) {
    return {GaussianIidSourceModel{}, g, Environment{{q}, {1.0}, {h}, {1.0}, UniformEnergy{0.0, 2.0}}};
}

TEST(Simulator, StepEnergyArithmetic) {
    const SensorSpec spec = constant_spec(10.0, 10.0);
    const StepResult r = step(spec, {2.0, 0.0, 0, 0}, Action{0.9, 1.0, 1.0}, {1.0, 0, 0});
    EXPECT_DOUBLE_EQ(r.next.energy, 1.0);
}

TEST(Simulator, StepServesBeforeProducing) {
    // h chosen so that g = 150 bits at tt = 1; d chosen so that f = 40 bits at ts = 1.
    SensorSpec spec = constant_spec(1.0, std::pow(2.0, 1.5) - 1.0);
    const double mmse = 0.5, f1 = 0.4;
    const double d = mmse + 0.5 / std::pow(2.0, f1);
    const StepResult r = step(spec, {2.0, 100.0, 0, 0}, Action{d, 1.0, 1.0}, {0.0, 0, 0});
    EXPECT_NEAR(r.record.capacity, 150.0, 1e-9);
    EXPECT_NEAR(r.record.bits_in, 40.0, 1e-9);
    EXPECT_DOUBLE_EQ(r.record.bits_out, 100.0);
    EXPECT_NEAR(r.next.queue_bits, 40.0, 1e-9);
}

TEST(Simulator, IdleStepOnlyAddsArrivals) {
    const SensorSpec spec = constant_spec(10.0, 10.0);
    const StepResult r = step(spec, {0.7, 0.0, 0, 0}, Action{1.0, 0.0, 0.0}, {0.4, 0, 0});
    EXPECT_DOUBLE_EQ(r.next.energy, 1.1);
    EXPECT_EQ(r.next.queue_bits, 0.0);
    EXPECT_TRUE(r.record.skipped);
}

TEST(Simulator, StepRejectsOverspend) {
    const SensorSpec spec = constant_spec(10.0, 10.0);
    EXPECT_THROW(step(spec, {1.0, 0.0, 0, 0}, Action{0.9, 0.6, 0.5}, {0.0, 0, 0}), EnergyViolation);
}

TEST(Simulator, RunIsDeterministic) {
    const SensorSpec spec = constant_spec(10.0, 10.0);
    const DoParams p{{0.8}, {0.45}, {0.45}, 0.5, 1e-3};
    const Trace a = run(spec, p, 5000, 3), b = run(spec, p, 5000, 3);
    std::ostringstream sa, sb;
    write_trace_csv(sa, a, spec.env);
    write_trace_csv(sb, b, spec.env);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(a.records.size(), 5000u);
    EXPECT_THROW(run(spec, p, 0, 3), SpecError);
}

TEST(Simulator, TraceCsvHeader) {
    const SensorSpec spec = constant_spec(10.0, 10.0);
    const Trace t = run(spec, DoParams{{0.8}, {0.45}, {0.45}, 0.5, 1e-3}, 3, 1);
    std::ostringstream s;
    write_trace_csv(s, t, spec.env);
    EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "slot,energy,queue_bits,q,h,d,ts,tt,bits_in,bits_out,distortion");
}

Trace synthetic(double in, double cap, std::size_t n) {
    Trace t;
    t.seed = 5;
    double x = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        SlotRecord r;
        r.state.queue_bits = x;
        r.bits_in = in;
        r.capacity = cap;
        r.bits_out = std::min(x, cap);
        t.records.push_back(r);
        x = x - r.bits_out + in;
    }
    return t;
}

TEST(Simulator, StabilityVerdicts) {
    EXPECT_EQ(stability_estimate(synthetic(2.0, 1.0, 20000)).verdict, Verdict::Unstable);
    EXPECT_EQ(stability_estimate(synthetic(0.0, 1.0, 20000)).verdict, Verdict::Stable);
    EXPECT_EQ(stability_estimate(synthetic(1.0, 1.0, 20000)).verdict, Verdict::Inconclusive);
    EXPECT_THROW(stability_estimate(synthetic(1.0, 1.0, 100)), TooShort);
}

TEST(Simulator, CertifiedDoWitnessIsStableWithNominalAverages) {
    const SensorSpec spec{GaussianIidSourceModel{}, SlotGeometry(100, 100),
                          Environment{{1.0, 10.0}, {0.5, 0.5}, {1.0, 10.0}, {0.5, 0.5}, UniformEnergy{0.0, 2.0}}};
    const FeasibilityReport rep = synthesize_do(spec, 0.8);
    ASSERT_TRUE(rep.feasible);
    const auto& p = std::get<DoParams>(*rep.witness);
    const Trace t = run(spec, p, 1'000'000, 17);
    EXPECT_EQ(stability_estimate(t).verdict, Verdict::Stable);
    for (std::size_t q = 0; q < 2; ++q) {
        EXPECT_NEAR(t.summary.mean_ts_given_q[q], p.ts_per_q[q], 0.02 * p.ts_per_q[q]);
    }
    const double nominal = 0.5 * (p.d_per_q[0] + p.d_per_q[1]);
    EXPECT_NEAR(t.summary.mean_distortion, nominal, 0.01 * nominal);
    const InvariantReport inv = check_invariants(t.records, t.initial_energy);
    EXPECT_TRUE(inv.ok());
}

TEST(Simulator, BatchSerialMatchesParallel) {
    std::vector<RunJob> jobs;
    for (int i = 0; i < 6; ++i) {
        jobs.push_back({constant_spec(5.0 + i, 10.0), DoParams{{0.8}, {0.45}, {0.45}, 0.5, 1e-3}, 20000,
                        static_cast<std::uint64_t>(i)});
    }
    const auto a = run_batch(jobs, false), b = run_batch(jobs, true);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].summary.mean_queue, b[i].summary.mean_queue);
        EXPECT_EQ(a[i].summary.mean_distortion, b[i].summary.mean_distortion);
        EXPECT_EQ(a[i].stability.verdict, b[i].stability.verdict);
    }
}

TEST(Simulator, InvariantCheckerCatchesOverspend) {
    std::vector<SlotRecord> recs(2);
    recs[0].state.energy = 1.0;
    recs[0].arrival = 1.0;
    recs[0].action = Action{1.0, 0.6, 0.6};
    EXPECT_FALSE(check_invariants(recs, 0.0).ok());
}

} // namespace
} // namespace ehsc
