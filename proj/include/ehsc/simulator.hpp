// Slot-by-slot simulation of the coupled energy buffer and data queue.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ehsc/models.hpp"
#include "ehsc/policies.hpp"
#include "ehsc/rng.hpp"

namespace ehsc {

struct SlotArrivals {
    double energy = 0.0;
    std::size_t q = 0;
    std::size_t h = 0;
};

struct SlotRecord {
    SlotState state; // pre-decision state of the slot
    Action action;
    double arrival = 0.0;  // harvest of this slot, included in state.energy
    double bits_in = 0.0;  // produced by the source encoder
    double bits_out = 0.0; // removed from the queue
    double capacity = 0.0; // g(h, tt), the offered service
    double distortion = 0.0;
    bool skipped = false; // source encoder could not run; d_max accrued
};

struct StepResult {
    SlotState next;
    SlotRecord record;
};

/// One slot: serve the queue, append the produced bits, spend the energy and
/// add the next slot's harvest. Throws EnergyViolation if ts + tt exceeds
/// the buffer.
StepResult step(const SensorSpec& spec, const SlotState& state, const Action& action, const SlotArrivals& next);

struct TraceSummary {
    std::size_t slots = 0;
    double mean_distortion = 0.0;
    double mean_queue = 0.0;
    double mean_ts = 0.0;
    double mean_tt = 0.0;
    double mean_bits_in = 0.0;
    double mean_bits_out = 0.0;
    double mean_capacity = 0.0;
    std::size_t skipped_slots = 0;
    std::vector<double> mean_ts_given_q;
    std::vector<double> mean_tt_given_h;
    std::vector<std::size_t> count_q;
    std::vector<std::size_t> count_h;
    double final_energy = 0.0;
    double final_queue = 0.0;
};

struct Trace {
    std::uint64_t seed = 0;
    double initial_energy = 0.0;
    std::vector<SlotRecord> records;
    TraceSummary summary;
};

/// Draws (E, q, h) for one sensor from independent named streams.
class ArrivalSampler {
public:
    ArrivalSampler(const Environment& env, std::uint64_t seed, std::uint64_t stream_base = 0);
    SlotArrivals draw();
    double draw_energy();
    std::size_t draw_q();

private:
    const Environment* env_;
    Rng energy_rng_;
    Rng q_rng_;
    Rng h_rng_;
};

/// Deterministic given the seed. Buffers start empty; each slot applies the
/// harvest, observes (q, h), decides and steps. Invariants are verified on
/// the finished trace.
Trace run(const SensorSpec& spec, const PolicyParams& params, std::size_t horizon, std::uint64_t seed);

TraceSummary summarize(const std::vector<SlotRecord>& records, std::size_t n_q, std::size_t n_h);

/// Exact energy conservation (cumulative consumption never exceeds initial
/// energy plus cumulative harvest) and nonnegativity of every buffer.
struct InvariantReport {
    bool nonnegative = true;
    bool per_slot_budget = true;
    bool conservation = true;
    double consumed = 0.0;  // approximate totals for reporting
    double harvested = 0.0;
    bool ok() const { return nonnegative && per_slot_budget && conservation; }
};

InvariantReport check_invariants(const std::vector<SlotRecord>& records, double initial_energy);

/// Process-wide count of traces whose invariants were verified, and of
/// those that failed.
struct InvariantTally {
    std::uint64_t checked = 0;
    std::uint64_t failed = 0;
};

InvariantTally invariant_tally();
void record_invariant_check(bool ok);

enum class Verdict { Stable, Unstable, Inconclusive };

const char* to_string(Verdict v);

struct StabilityOptions {
    double confidence = 0.99;
    double growth_ratio = 1.05;
    std::size_t blocks = 200;
    std::size_t resamples = 2000;
};

struct StabilityVerdict {
    Verdict verdict = Verdict::Inconclusive;
    double drift_estimate = 0.0; // mean(bits_in - capacity) over the second half
    double drift_ci_lo = 0.0;
    double drift_ci_hi = 0.0;
    double first_half_mean_queue = 0.0;
    double second_half_mean_queue = 0.0;
    double tail_fraction = 0.0; // slots whose queue lies in the top decile of its range
};

/// Empirical surrogate for queue stability. Needs at least 10^4 slots.
StabilityVerdict stability_estimate(const Trace& trace, const StabilityOptions& options = {});

/// CSV export: slot,energy,queue_bits,q,h,d,ts,tt,bits_in,bits_out,distortion
void write_trace_csv(std::ostream& out, const Trace& trace, const Environment& env);

struct RunJob {
    SensorSpec spec;
    PolicyParams params;
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
};

struct RunOutcome {
    TraceSummary summary;
    StabilityVerdict stability;
    InvariantReport invariants;
};

/// Runs independent jobs; the OpenMP path and the serial path give identical
/// results.
std::vector<RunOutcome> run_batch(const std::vector<RunJob>& jobs, bool parallel = true);

} // namespace ehsc
