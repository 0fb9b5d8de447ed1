// TDMA scheduling of several sensors sharing one access point: feasibility
// of opportunistic and fixed schedules, synthesis, two-sensor region sweeps
// and joint simulation.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ehsc/feasibility.hpp"
#include "ehsc/region.hpp"
#include "ehsc/simulator.hpp"

namespace ehsc {

struct MultiSensorSpec {
    std::vector<SensorSpec> sensors;
    std::vector<double> d_bar; // per sensor
    /// Joint channel pmf over the product of the per-sensor supports, the
    /// last sensor varying fastest. Empty means independent channels.
    std::vector<double> joint_h_pmf;

    /// Throws SpecError on size mismatches, an unnormalized joint pmf or
    /// marginals that disagree with the sensors' channel pmfs (1e-10).
    void validate() const;
    std::size_t n_sensors() const { return sensors.size(); }
    std::size_t n_joint() const;
    /// Per-sensor channel indices of joint state j.
    std::vector<std::size_t> joint_state(std::size_t j) const;
    /// joint_h_pmf, or the product of the marginals when it is empty.
    std::vector<double> joint_pmf() const;
};

/// beta[j][l] is the probability of scheduling sensor l in joint channel
/// state j. A fixed schedule has identical rows.
struct SchedulePolicy {
    std::vector<std::vector<double>> beta;
    std::vector<DoParams> sensors;
    bool fixed = false;
};

/// Throws InvariantViolation unless beta has n_joint rows of n_sensors
/// probabilities summing to 1 (1e-12).
void validate_beta(const std::vector<std::vector<double>>& beta, std::size_t n_joint, std::size_t n_sensors);

/// Share of slots in which sensor l holds the channel, per channel state of
/// that sensor: sum over joint states with h(l) = h_l of Pr(h) beta_l^h.
std::vector<std::vector<double>> channel_weights(const MultiSensorSpec& spec,
                                                 const std::vector<std::vector<double>>& beta);

struct MultiReport {
    bool feasible = false;
    std::optional<SchedulePolicy> witness; // present iff feasible
    std::vector<FeasibilityReport> sensors;
};

MultiReport check_multi(const SchedulePolicy& policy, const MultiSensorSpec& spec);

struct ScheduleOptions {
    SynthOptions synth;
    std::size_t beta_levels = 11;           // simplex grid per joint state
    std::size_t max_candidates = 4'000'000; // SpecError beyond this many beta tables
};

/// Opportunistic schedules: every beta table on the simplex grid, fixed
/// tables first, so that any fixed witness is found here too.
MultiReport synthesize_schedule(const MultiSensorSpec& spec, const ScheduleOptions& opt = {});
MultiReport synthesize_fixed_schedule(const MultiSensorSpec& spec, const ScheduleOptions& opt = {});

struct TdmaTrace {
    std::vector<Trace> sensors;
    std::vector<std::size_t> scheduled_slots; // per sensor
};

/// Unscheduled sensors keep harvesting and compressing; only their
/// transmission energy is forced to zero. With one sensor the trace equals
/// simulator::run for the same seed.
TdmaTrace simulate_tdma(const MultiSensorSpec& spec, const SchedulePolicy& policy, std::size_t horizon,
                        std::uint64_t seed);

/// Sweep of sensor 1's worst-state probabilities (p_w^q on axis1, p_w^h on
/// axis2, worst state listed first); the remaining sensors stay fixed.
/// Requires two-state supports for sensor 1 and independent channels.
struct TwoSensorSetup {
    MultiSensorSpec base;
    std::vector<double> axis1;
    std::vector<double> axis2;
};

struct ScheduleRegion {
    RegionGrid opportunistic;
    RegionGrid fixed;
    RegionGrid outer; // sensor 1 alone
};

MultiSensorSpec multi_spec_at(const TwoSensorSetup& setup, double pq, double ph);

ScheduleRegion region_sweep_two_sensors(const TwoSensorSetup& setup, const ScheduleOptions& opt = {},
                                        bool parallel = true);

} // namespace ehsc
