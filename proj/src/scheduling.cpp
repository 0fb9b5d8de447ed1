#include "ehsc/scheduling.hpp"

#include <cmath>
#include <limits>

#include "ehsc/parallel.hpp"
#include "ehsc/rng.hpp"

namespace ehsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Table = std::vector<std::vector<double>>;

// Points of the probability simplex in n_sensors dimensions with step 1/(levels-1).
std::vector<std::vector<double>> simplex_grid(std::size_t n_sensors, std::size_t levels) {
    if (levels < 2) throw SpecError("beta grid needs at least two levels");
    const std::size_t k = levels - 1;
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> parts(n_sensors, 0);
    const auto rec = [&](auto&& self, std::size_t l, std::size_t left) -> void {
        if (l + 1 == n_sensors) {
            parts[l] = left;
            std::vector<double> p(n_sensors);
            for (std::size_t i = 0; i < n_sensors; ++i) p[i] = static_cast<double>(parts[i]) / static_cast<double>(k);
            out.push_back(std::move(p));
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            parts[l] = v;
            self(self, l + 1, left - v);
        }
    };
    rec(rec, 0, k);
    return out;
}

class ScheduleSearch {
public:
    ScheduleSearch(const MultiSensorSpec& spec, std::vector<const DoSearch*> searches, const ScheduleOptions& opt)
        : spec_(spec), searches_(std::move(searches)), opt_(opt), points_(simplex_grid(spec.n_sensors(), opt.beta_levels)) {}

    MultiReport fixed() {
        reset();
        for (const auto& p : points_) {
            const Table t(spec_.n_joint(), p);
            if (screen(t)) {
                MultiReport r = certify(t, true);
                if (r.feasible) return r;
            }
        }
        return certify(best_, true);
    }

    MultiReport opportunistic() {
        MultiReport r = fixed();
        return r.feasible ? r : all_tables();
    }

    MultiReport all_tables() {
        reset();
        const std::size_t n_j = spec_.n_joint(), n_p = points_.size();
        double total = 1.0;
        for (std::size_t j = 0; j < n_j; ++j) total *= static_cast<double>(n_p);
        if (total > static_cast<double>(opt_.max_candidates)) throw SpecError("too many schedule candidates");
        std::vector<std::size_t> digit(n_j, 0);
        Table t(n_j, points_[0]);
        while (true) {
            if (screen(t)) {
                MultiReport c = certify(t, false);
                if (c.feasible) return c;
            }
            std::size_t j = 0;
            while (j < n_j && ++digit[j] == n_p) {
                digit[j] = 0;
                t[j] = points_[0];
                ++j;
            }
            if (j == n_j) break;
            t[j] = points_[digit[j]];
        }
        return certify(best_, false);
    }

private:
    void reset() {
        best_score_ = -kInf;
        best_ = Table(spec_.n_joint(), points_[0]);
    }

    // True when every sensor has a positive grid margin; tracks the table
    // with the largest worst-sensor margin for the refinement fallback.
    bool screen(const Table& t) {
        const auto w = channel_weights(spec_, t);
        double worst = kInf;
        for (std::size_t l = 0; l < w.size(); ++l) {
            worst = std::min(worst, searches_[l]->grid_margin(w[l]));
            if (worst <= kRateSlack && worst <= best_score_) return false;
        }
        if (worst > best_score_) {
            best_score_ = worst;
            best_ = t;
        }
        return worst > kRateSlack;
    }

    MultiReport certify(const Table& t, bool is_fixed) const {
        const auto w = channel_weights(spec_, t);
        SchedulePolicy policy;
        policy.beta = t;
        policy.fixed = is_fixed;
        MultiReport failed;
        bool all = true;
        for (std::size_t l = 0; l < w.size(); ++l) {
            FeasibilityReport r = searches_[l]->synthesize(w[l]);
            if (r.witness) {
                policy.sensors.push_back(std::get<DoParams>(*r.witness));
            } else {
                all = false;
            }
            failed.sensors.push_back(std::move(r));
        }
        if (!all) return failed;
        return check_multi(policy, spec_);
    }

    const MultiSensorSpec& spec_;
    std::vector<const DoSearch*> searches_;
    ScheduleOptions opt_;
    std::vector<std::vector<double>> points_;
    double best_score_ = -kInf;
    Table best_;
};

std::vector<DoSearch> build_searches(const MultiSensorSpec& spec, const SynthOptions& opt) {
    std::vector<DoSearch> out;
    out.reserve(spec.n_sensors());
    for (std::size_t l = 0; l < spec.n_sensors(); ++l) out.emplace_back(spec.sensors[l], spec.d_bar[l], opt);
    return out;
}

std::vector<const DoSearch*> pointers(const std::vector<DoSearch>& v) {
    std::vector<const DoSearch*> out;
    for (const auto& s : v) out.push_back(&s);
    return out;
}

} // namespace

std::size_t MultiSensorSpec::n_joint() const {
    std::size_t n = 1;
    for (const auto& s : sensors) n *= s.env.n_h();
    return n;
}

std::vector<std::size_t> MultiSensorSpec::joint_state(std::size_t j) const {
    std::vector<std::size_t> idx(sensors.size());
    for (std::size_t l = sensors.size(); l-- > 0;) {
        const std::size_t n = sensors[l].env.n_h();
        idx[l] = j % n;
        j /= n;
    }
    return idx;
}

std::vector<double> MultiSensorSpec::joint_pmf() const {
    if (!joint_h_pmf.empty()) return joint_h_pmf;
    std::vector<double> pmf(n_joint());
    for (std::size_t j = 0; j < pmf.size(); ++j) {
        const auto idx = joint_state(j);
        double p = 1.0;
        for (std::size_t l = 0; l < sensors.size(); ++l) p *= sensors[l].env.h_pmf[idx[l]];
        pmf[j] = p;
    }
    return pmf;
}

void MultiSensorSpec::validate() const {
    if (sensors.empty()) throw SpecError("at least one sensor is required");
    if (d_bar.size() != sensors.size()) throw SpecError("one distortion target per sensor is required");
    for (const auto& s : sensors) s.validate();
    if (joint_h_pmf.empty()) return;
    if (joint_h_pmf.size() != n_joint()) throw SpecError("joint channel pmf has the wrong size");
    double total = 0.0;
    for (double p : joint_h_pmf) {
        if (!(p >= 0.0)) throw SpecError("joint channel pmf has a negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-10) throw SpecError("joint channel pmf does not sum to 1");
    std::vector<std::vector<double>> marg(sensors.size());
    for (std::size_t l = 0; l < sensors.size(); ++l) marg[l].assign(sensors[l].env.n_h(), 0.0);
    for (std::size_t j = 0; j < joint_h_pmf.size(); ++j) {
        const auto idx = joint_state(j);
        for (std::size_t l = 0; l < sensors.size(); ++l) marg[l][idx[l]] += joint_h_pmf[j];
    }
    for (std::size_t l = 0; l < sensors.size(); ++l) {
        for (std::size_t h = 0; h < marg[l].size(); ++h) {
            if (std::abs(marg[l][h] - sensors[l].env.h_pmf[h]) > 1e-10) {
                throw SpecError("joint channel pmf disagrees with a sensor's channel pmf");
            }
        }
    }
}

void validate_beta(const std::vector<std::vector<double>>& beta, std::size_t n_joint, std::size_t n_sensors) {
    if (beta.size() != n_joint) throw InvariantViolation("schedule needs one row per joint channel state");
    for (const auto& row : beta) {
        if (row.size() != n_sensors) throw InvariantViolation("schedule row has the wrong number of sensors");
        double total = 0.0;
        for (double b : row) {
            if (!(b >= 0.0 && b <= 1.0)) throw InvariantViolation("schedule probability outside [0, 1]");
            total += b;
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvariantViolation("schedule row does not sum to 1");
    }
}

std::vector<std::vector<double>> channel_weights(const MultiSensorSpec& spec,
                                                 const std::vector<std::vector<double>>& beta) {
    const auto pmf = spec.joint_pmf();
    std::vector<std::vector<double>> w(spec.n_sensors());
    for (std::size_t l = 0; l < w.size(); ++l) w[l].assign(spec.sensors[l].env.n_h(), 0.0);
    for (std::size_t j = 0; j < pmf.size(); ++j) {
        const auto idx = spec.joint_state(j);
        for (std::size_t l = 0; l < w.size(); ++l) w[l][idx[l]] += pmf[j] * beta[j][l];
    }
    return w;
}

MultiReport check_multi(const SchedulePolicy& policy, const MultiSensorSpec& spec) {
    spec.validate();
    validate_beta(policy.beta, spec.n_joint(), spec.n_sensors());
    if (policy.sensors.size() != spec.n_sensors()) throw InvariantViolation("one DO parameter set per sensor is required");
    const auto w = channel_weights(spec, policy.beta);
    MultiReport rep;
    rep.feasible = true;
    for (std::size_t l = 0; l < spec.n_sensors(); ++l) {
        rep.sensors.push_back(check_do_weighted(policy.sensors[l], spec.sensors[l], spec.d_bar[l], w[l]));
        rep.feasible = rep.feasible && rep.sensors.back().feasible;
    }
    if (rep.feasible) rep.witness = policy;
    return rep;
}

MultiReport synthesize_schedule(const MultiSensorSpec& spec, const ScheduleOptions& opt) {
    spec.validate();
    const auto searches = build_searches(spec, opt.synth);
    return ScheduleSearch(spec, pointers(searches), opt).opportunistic();
}

MultiReport synthesize_fixed_schedule(const MultiSensorSpec& spec, const ScheduleOptions& opt) {
    spec.validate();
    const auto searches = build_searches(spec, opt.synth);
    return ScheduleSearch(spec, pointers(searches), opt).fixed();
}

TdmaTrace simulate_tdma(const MultiSensorSpec& spec, const SchedulePolicy& policy, std::size_t horizon,
                        std::uint64_t seed) {
    if (horizon == 0) throw SpecError("horizon must be at least one slot");
    spec.validate();
    validate_beta(policy.beta, spec.n_joint(), spec.n_sensors());
    const std::size_t n = spec.n_sensors();
    if (policy.sensors.size() != n) throw InvariantViolation("one DO parameter set per sensor is required");
    std::vector<PolicyParams> params;
    for (std::size_t l = 0; l < n; ++l) {
        validate_params(policy.sensors[l], spec.sensors[l].env.n_q(), spec.sensors[l].env.n_h());
        params.emplace_back(policy.sensors[l]);
    }

    std::vector<ArrivalSampler> samplers;
    for (std::size_t l = 0; l < n; ++l) samplers.emplace_back(spec.sensors[l].env, seed, 3 * l);
    Rng channel_rng(seed, 2);
    Rng schedule_rng(seed, 1000);
    const auto joint = spec.joint_pmf();

    TdmaTrace out;
    out.sensors.resize(n);
    out.scheduled_slots.assign(n, 0);
    std::vector<SlotArrivals> cur(n), next(n);
    const auto draw = [&](std::vector<SlotArrivals>& a) {
        for (std::size_t l = 0; l < n; ++l) {
            a[l].energy = samplers[l].draw_energy();
            a[l].q = samplers[l].draw_q();
        }
        const auto idx = spec.joint_state(channel_rng.categorical(joint));
        for (std::size_t l = 0; l < n; ++l) a[l].h = idx[l];
    };
    draw(cur);
    std::vector<SlotState> s(n);
    for (std::size_t l = 0; l < n; ++l) {
        s[l].energy = cur[l].energy;
        s[l].q = cur[l].q;
        s[l].h = cur[l].h;
        out.sensors[l].seed = seed;
        out.sensors[l].records.reserve(horizon);
    }
    std::vector<std::size_t> h_idx(n);
    for (std::size_t k = 0; k < horizon; ++k) {
        for (std::size_t l = 0; l < n; ++l) h_idx[l] = s[l].h;
        std::size_t j = 0;
        for (std::size_t l = 0; l < n; ++l) j = j * spec.sensors[l].env.n_h() + h_idx[l];
        const std::size_t tau = schedule_rng.categorical(policy.beta[j]);
        ++out.scheduled_slots[tau];
        draw(next);
        for (std::size_t l = 0; l < n; ++l) {
            Action a = decide(params[l], s[l], cur[l].energy);
            if (l != tau) a.tt = 0.0;
            StepResult r = step(spec.sensors[l], s[l], a, next[l]);
            r.record.arrival = cur[l].energy;
            out.sensors[l].records.push_back(r.record);
            s[l] = r.next;
        }
        cur.swap(next);
    }
    for (std::size_t l = 0; l < n; ++l) {
        Trace& t = out.sensors[l];
        const auto& env = spec.sensors[l].env;
        t.summary = summarize(t.records, env.n_q(), env.n_h());
        t.summary.final_energy = s[l].energy;
        t.summary.final_queue = s[l].queue_bits;
        const InvariantReport inv = check_invariants(t.records, t.initial_energy);
        record_invariant_check(inv.ok());
        if (!inv.ok()) throw InvariantViolation("energy conservation or nonnegativity violated in simulated trace");
    }
    return out;
}

MultiSensorSpec multi_spec_at(const TwoSensorSetup& setup, double pq, double ph) {
    MultiSensorSpec m = setup.base;
    if (m.sensors.empty()) throw SpecError("sweep needs at least one sensor");
    if (!m.joint_h_pmf.empty()) throw SpecError("sweeps assume independent channels");
    auto& env = m.sensors[0].env;
    if (env.n_q() != 2 || env.n_h() != 2) throw SpecError("sweeps need two-state supports for sensor 1");
    env.q_pmf = {pq, 1.0 - pq};
    env.h_pmf = {ph, 1.0 - ph};
    return m;
}

ScheduleRegion region_sweep_two_sensors(const TwoSensorSetup& setup, const ScheduleOptions& opt, bool parallel) {
    const std::size_t n1 = setup.axis1.size(), n2 = setup.axis2.size();
    ScheduleRegion out;
    for (RegionGrid* g : {&out.opportunistic, &out.fixed, &out.outer}) {
        g->axis1 = setup.axis1;
        g->axis2 = setup.axis2;
        g->points.resize(n1 * n2);
    }
    if (n1 == 0 || n2 == 0) return out;
    const MultiSensorSpec probe = multi_spec_at(setup, setup.axis1[0], setup.axis2[0]);
    probe.validate();
    // Sensors other than the first do not change across the sweep.
    std::vector<DoSearch> others;
    for (std::size_t l = 1; l < probe.n_sensors(); ++l) others.emplace_back(probe.sensors[l], probe.d_bar[l], opt.synth);

    for_each_index(n1, parallel, [&](std::size_t i) {
        const MultiSensorSpec row_spec = multi_spec_at(setup, setup.axis1[i], setup.axis2[0]);
        const DoSearch first(row_spec.sensors[0], row_spec.d_bar[0], opt.synth);
        std::vector<const DoSearch*> searches{&first};
        for (const auto& s : others) searches.push_back(&s);
        for (std::size_t j = 0; j < n2; ++j) {
            const MultiSensorSpec m = multi_spec_at(setup, setup.axis1[i], setup.axis2[j]);
            ScheduleSearch search(m, searches, opt);
            const MultiReport fx = search.fixed();
            const MultiReport op = fx.feasible ? fx : search.all_tables();
            const FeasibilityReport ob = first.synthesize(m.sensors[0].env.h_pmf);
            const auto fill = [&](RegionGrid& g, bool feasible, const Margins& margins) {
                g.points[i * n2 + j] = {setup.axis1[i], setup.axis2[j], feasible, margins};
            };
            fill(out.fixed, fx.feasible, fx.sensors.empty() ? Margins{} : fx.sensors[0].margins);
            fill(out.opportunistic, op.feasible, op.sensors.empty() ? Margins{} : op.sensors[0].margins);
            fill(out.outer, ob.feasible, ob.margins);
        }
    });
    return out;
}

} // namespace ehsc
