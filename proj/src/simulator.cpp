#include "ehsc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>

#include "ehsc/csv.hpp"
#include "ehsc/exact.hpp"
#include "ehsc/parallel.hpp"
#include "ehsc/rng.hpp"

namespace ehsc {

namespace {

double produce(const SensorSpec& spec, const SlotState& s, const Action& a, SlotRecord& rec) {
    const double d_max = source_d_max(spec.source);
    if (!a.d) {
        rec.distortion = d_max;
        const double q = spec.env.q_support[s.q];
        const double h = spec.env.h_support[s.h];
        try {
            rec.distortion = analog_mmse(spec.geometry, a.tt, q, h, d_max);
        } catch (const std::domain_error&) {
            rec.skipped = true;
        }
        return 0.0;
    }
    try {
        const double bits = source_rate(spec.source, spec.geometry, *a.d, a.ts, spec.env.q_support[s.q]);
        rec.distortion = *a.d;
        return bits;
    } catch (const std::domain_error&) {
        rec.skipped = true;
        rec.distortion = d_max;
        return 0.0;
    }
}

std::atomic<std::uint64_t> g_checked{0};
std::atomic<std::uint64_t> g_failed{0};

} // namespace

void record_invariant_check(bool ok) {
    g_checked.fetch_add(1, std::memory_order_relaxed);
    if (!ok) g_failed.fetch_add(1, std::memory_order_relaxed);
}

InvariantTally invariant_tally() { return {g_checked.load(), g_failed.load()}; }

StepResult step(const SensorSpec& spec, const SlotState& state, const Action& action, const SlotArrivals& next) {
    if (!(action.ts >= 0.0) || !(action.tt >= 0.0) || !exact::sum_at_most(action.ts, action.tt, state.energy)) {
        throw EnergyViolation("action spends more energy than the buffer holds");
    }
    StepResult out;
    SlotRecord& rec = out.record;
    rec.state = state;
    rec.action = action;

    const bool analog = !action.d.has_value();
    rec.capacity = analog ? 0.0 : rate::channel(spec.geometry, spec.env.h_support[state.h], action.tt);
    rec.bits_out = std::min(state.queue_bits, rec.capacity);
    rec.bits_in = produce(spec, state, action, rec);

    const double after_service = rec.bits_out == state.queue_bits ? 0.0 : state.queue_bits - rec.bits_out;
    out.next.queue_bits = std::max(after_service, 0.0) + rec.bits_in;

    // Rounded toward -inf so the stored energy never exceeds the exact residual.
    const double residual = std::max(exact::sub_down(exact::sub_down(state.energy, action.ts), action.tt), 0.0);
    out.next.energy = exact::add_down(residual, next.energy);
    out.next.q = next.q;
    out.next.h = next.h;
    return out;
}

ArrivalSampler::ArrivalSampler(const Environment& env, std::uint64_t seed, std::uint64_t stream_base)
    : env_(&env), energy_rng_(seed, stream_base), q_rng_(seed, stream_base + 1), h_rng_(seed, 2) {}

double ArrivalSampler::draw_energy() {
    if (const auto* u = std::get_if<UniformEnergy>(&env_->energy)) return energy_rng_.uniform(u->lo, u->hi);
    const auto& d = std::get<DiscreteEnergy>(env_->energy);
    return d.values[energy_rng_.categorical(d.probs)];
}

std::size_t ArrivalSampler::draw_q() { return q_rng_.categorical(env_->q_pmf); }

SlotArrivals ArrivalSampler::draw() {
    SlotArrivals a;
    a.energy = draw_energy();
    a.q = draw_q();
    a.h = h_rng_.categorical(env_->h_pmf);
    return a;
}

Trace run(const SensorSpec& spec, const PolicyParams& params, std::size_t horizon, std::uint64_t seed) {
    if (horizon == 0) throw SpecError("horizon must be at least one slot");
    spec.validate();
    validate_params(params, spec.env.n_q(), spec.env.n_h());

    Trace trace;
    trace.seed = seed;
    trace.records.reserve(horizon);
    ArrivalSampler sampler(spec.env, seed);

    SlotArrivals cur = sampler.draw();
    SlotState s;
    s.energy = cur.energy;
    s.q = cur.q;
    s.h = cur.h;
    for (std::size_t k = 0; k < horizon; ++k) {
        const Action a = decide(params, s, cur.energy);
        const SlotArrivals next = sampler.draw();
        StepResult r = step(spec, s, a, next);
        r.record.arrival = cur.energy;
        trace.records.push_back(r.record);
        s = r.next;
        cur = next;
    }
    trace.summary = summarize(trace.records, spec.env.n_q(), spec.env.n_h());
    trace.summary.final_energy = s.energy;
    trace.summary.final_queue = s.queue_bits;

    const InvariantReport inv = check_invariants(trace.records, trace.initial_energy);
    record_invariant_check(inv.ok());
    if (!inv.ok()) throw InvariantViolation("energy conservation or nonnegativity violated in simulated trace");
    return trace;
}

TraceSummary summarize(const std::vector<SlotRecord>& records, std::size_t n_q, std::size_t n_h) {
    TraceSummary s;
    s.slots = records.size();
    s.mean_ts_given_q.assign(n_q, 0.0);
    s.mean_tt_given_h.assign(n_h, 0.0);
    s.count_q.assign(n_q, 0);
    s.count_h.assign(n_h, 0);
    for (const auto& r : records) {
        s.mean_distortion += r.distortion;
        s.mean_queue += r.state.queue_bits;
        s.mean_ts += r.action.ts;
        s.mean_tt += r.action.tt;
        s.mean_bits_in += r.bits_in;
        s.mean_bits_out += r.bits_out;
        s.mean_capacity += r.capacity;
        if (r.skipped) ++s.skipped_slots;
        if (r.state.q < n_q) {
            s.mean_ts_given_q[r.state.q] += r.action.ts;
            ++s.count_q[r.state.q];
        }
        if (r.state.h < n_h) {
            s.mean_tt_given_h[r.state.h] += r.action.tt;
            ++s.count_h[r.state.h];
        }
    }
    if (s.slots > 0) {
        const double n = static_cast<double>(s.slots);
        for (double* v : {&s.mean_distortion, &s.mean_queue, &s.mean_ts, &s.mean_tt, &s.mean_bits_in,
                          &s.mean_bits_out, &s.mean_capacity}) {
            *v /= n;
        }
    }
    for (std::size_t i = 0; i < n_q; ++i) {
        if (s.count_q[i] > 0) s.mean_ts_given_q[i] /= static_cast<double>(s.count_q[i]);
    }
    for (std::size_t i = 0; i < n_h; ++i) {
        if (s.count_h[i] > 0) s.mean_tt_given_h[i] /= static_cast<double>(s.count_h[i]);
    }
    return s;
}

InvariantReport check_invariants(const std::vector<SlotRecord>& records, double initial_energy) {
    InvariantReport rep;
    exact::ExactAccumulator consumed;
    exact::ExactAccumulator harvested;
    harvested.add(initial_energy);
    for (const auto& r : records) {
        if (!(r.state.energy >= 0.0) || !(r.state.queue_bits >= 0.0) || !(r.action.ts >= 0.0) ||
            !(r.action.tt >= 0.0) || !(r.arrival >= 0.0)) {
            rep.nonnegative = false;
        }
        if (!exact::sum_at_most(r.action.ts, r.action.tt, r.state.energy)) rep.per_slot_budget = false;
        harvested.add(r.arrival);
        consumed.add(r.action.ts);
        consumed.add(r.action.tt);
        if (compare(consumed, harvested) > 0) rep.conservation = false;
    }
    rep.consumed = consumed.approx();
    rep.harvested = harvested.approx();
    return rep;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    default: return "inconclusive";
    }
}

StabilityVerdict stability_estimate(const Trace& trace, const StabilityOptions& options) {
    const auto& recs = trace.records;
    const std::size_t n = recs.size();
    if (n < 10000) throw TooShort("stability estimate needs at least 10^4 slots");

    StabilityVerdict v;
    const std::size_t half = n / 2;
    double q1 = 0.0, q2 = 0.0, qmin = recs[0].state.queue_bits, qmax = qmin;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = recs[k].state.queue_bits;
        (k < half ? q1 : q2) += x;
        qmin = std::min(qmin, x);
        qmax = std::max(qmax, x);
    }
    v.first_half_mean_queue = q1 / static_cast<double>(half);
    v.second_half_mean_queue = q2 / static_cast<double>(n - half);
    if (qmax > qmin) {
        const double level = qmin + 0.9 * (qmax - qmin);
        const auto top = std::count_if(recs.begin(), recs.end(),
                                       [&](const SlotRecord& r) { return r.state.queue_bits >= level; });
        v.tail_fraction = static_cast<double>(top) / static_cast<double>(n);
    }

    const std::size_t m = n - half;
    const std::size_t blocks = std::clamp<std::size_t>(options.blocks, 1, m);
    const std::size_t block_len = m / blocks;
    std::vector<double> block_means(blocks, 0.0);
    double total = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        double acc = 0.0;
        for (std::size_t k = half + b * block_len; k < half + (b + 1) * block_len; ++k) {
            acc += recs[k].bits_in - recs[k].capacity;
        }
        block_means[b] = acc / static_cast<double>(block_len);
        total += acc;
    }
    v.drift_estimate = total / static_cast<double>(blocks * block_len);

    Rng rng(trace.seed, 0xB007);
    std::vector<double> boot(options.resamples);
    for (auto& mean : boot) {
        double acc = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            acc += block_means[std::min<std::size_t>(static_cast<std::size_t>(rng.uniform01() * blocks), blocks - 1)];
        }
        mean = acc / static_cast<double>(blocks);
    }
    std::sort(boot.begin(), boot.end());
    const double tail = 0.5 * (1.0 - options.confidence);
    const auto pick = [&](double p) {
        const auto i = static_cast<std::size_t>(std::floor(p * static_cast<double>(boot.size() - 1)));
        return boot[std::min(i, boot.size() - 1)];
    };
    v.drift_ci_lo = pick(tail);
    v.drift_ci_hi = pick(1.0 - tail);

    const bool empty_queue = qmax == 0.0;
    const bool no_growth = v.second_half_mean_queue <= options.growth_ratio * v.first_half_mean_queue;
    if (empty_queue || (v.drift_ci_hi < 0.0 && no_growth)) {
        v.verdict = Verdict::Stable;
    } else if (v.drift_ci_lo > 0.0) {
        v.verdict = Verdict::Unstable;
    }
    return v;
}

void write_trace_csv(std::ostream& out, const Trace& trace, const Environment& env) {
    out << "slot,energy,queue_bits,q,h,d,ts,tt,bits_in,bits_out,distortion\n";
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const auto& r = trace.records[k];
        csv::Row row(out);
        row << k << r.state.energy << r.state.queue_bits << env.q_support[r.state.q] << env.h_support[r.state.h];
        if (r.action.d) {
            row << *r.action.d;
        } else {
            row.empty();
        }
        row << r.action.ts << r.action.tt << r.bits_in << r.bits_out << r.distortion;
    }
}

std::vector<RunOutcome> run_batch(const std::vector<RunJob>& jobs, bool parallel) {
    std::vector<RunOutcome> out(jobs.size());
    const auto one = [&](std::size_t i) {
        const Trace t = run(jobs[i].spec, jobs[i].params, jobs[i].horizon, jobs[i].seed);
        out[i].summary = t.summary;
        out[i].invariants = check_invariants(t.records, t.initial_energy);
        if (t.records.size() >= 10000) out[i].stability = stability_estimate(t);
    };
    for_each_index(jobs.size(), parallel, one);
    return out;
}

} // namespace ehsc
