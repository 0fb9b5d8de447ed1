// Acceptance run: one PASS/FAIL line per criterion. `--criterion n` runs a
// single criterion; the exit status is nonzero when any selected one fails.
#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ehsc/config.hpp"
#include "ehsc/feasibility.hpp"
#include "ehsc/mdp.hpp"
#include "ehsc/models.hpp"
#include "ehsc/region.hpp"
#include "ehsc/rng.hpp"
#include "ehsc/scheduling.hpp"
#include "ehsc/simulator.hpp"

namespace ehsc {
namespace {
#include "frozen/model_values.inc"

struct DoCase {
    int n, m;
    double q, h, d_bar, e_hi;
    bool grid, loose;
};

const DoCase kDoCases[] = {
#include "frozen/do_oracle_cases.inc"
};

struct EnumCase {
    double gamma;
    int queue;
    std::size_t h;
    double value, d;
    int ts, tt;
};

const EnumCase kEnumCases[] = {
#include "frozen/mdp_oracle_cases.inc"
};

// Pinned tolerances.
constexpr double kModelRel = 1e-9;
constexpr double kWaterfillAbs = 1e-8;
constexpr double kKktSlack = 1e-9;
constexpr int kMaxOracleDisagreements = 5;
constexpr double kDistortionRel = 0.01;
constexpr double kContractionSlack = 1e-12;
constexpr double kEnumValueAbs = 1e-9;
constexpr double kCurveSlack = 1e-9;
constexpr std::size_t kWitnessHorizon = 1'000'000;
constexpr std::size_t kTallyHorizon = 100'000;

struct Result {
    bool pass = true;
    std::string detail;
};

class Detail {
public:
    template <class T> Detail& operator<<(const T& x) {
        if (!first_) os_ << ", ";
        first_ = false;
        os_ << x;
        return *this;
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
    bool first_ = true;
};

std::string kv(const std::string& k, double v) {
    std::ostringstream os;
    os << k << '=' << v;
    return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Result models_oracle() {
    const GaussianIidSourceModel iid{};
    const GaussMarkovSourceModel markov{};
    const SlotGeometry g(100, 100);
    const double errs[] = {
        rel(estimation_mmse(1.0, 1.0), kIidMmse),
        rel(source_rate_gaussian_iid(iid, g, 0.75, 0.25, 1.0), kIidRate),
        rel(source_rate_gauss_markov(markov, SlotGeometry(64, 64), 0.5, 0.2, 0.5), kMarkovRate),
        rel(channel_rate_awgn(g, 7.0, 0.5), kChannelRate),
        rel(analog_mmse(g, 1.0, 1.0, 3.0, 1.0), kAnalogMmse),
        rel(distortion_bounds(markov, g, 0.5, 0.11).hi, kMarkovBoundTs011),
        rel(distortion_bounds(markov, g, 0.5, 0.2).hi, kMarkovBoundTs02),
    };
    const double worst = *std::max_element(std::begin(errs), std::end(errs));
    Detail d;
    d << kv("values", std::size(errs)) << kv("max_rel_err", worst) << kv("tol", kModelRel);
    return {worst <= kModelRel, d.str()};
}

double mean_rate(const std::vector<double>& h, const std::vector<double>& p, const std::vector<double>& t) {
    double r = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) r += p[i] * std::log2(1.0 + h[i] * t[i]);
    return r;
}

Result waterfilling() {
    const auto t = waterfill({1.0, 4.0}, {0.5, 0.5}, 1.0);
    const double hand_err =
        std::max({std::abs(t[0] - 0.625), std::abs(t[1] - 1.375), std::abs(t[0] + 1.0 - 1.625)});
    Rng rng(31);
    int bad = 0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 5);
        std::vector<double> h(n), p(n);
        for (std::size_t k = 0; k < n; ++k) {
            h[k] = std::pow(10.0, rng.uniform(-1.0, 2.0));
            p[k] = rng.uniform(0.05, 1.0);
        }
        const double total = std::accumulate(p.begin(), p.end(), 0.0);
        for (auto& x : p) x /= total;
        const double budget = rng.uniform(0.01, 3.0);
        const auto w = waterfill(h, p, budget);
        bool ok = std::abs(std::inner_product(p.begin(), p.end(), w.begin(), 0.0) - budget) <= kKktSlack;
        const double base = mean_rate(h, p, w);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) continue;
                for (double delta : {1e-3, 1e-2}) {
                    if (w[b] < delta / p[b]) continue;
                    auto u = w;
                    u[a] += delta / p[a];
                    u[b] -= delta / p[b];
                    ok = ok && mean_rate(h, p, u) <= base + kKktSlack;
                }
            }
        }
        bad += !ok;
    }
    Detail d;
    d << kv("hand_err", hand_err) << kv("kkt_failures", bad) << "instances=100";
    return {hand_err <= kWaterfillAbs && bad == 0, d.str()};
}

SensorSpec single(double q, double h, double e_hi, SlotGeometry g) {
    return {GaussianIidSourceModel{}, g, Environment{{q}, {1.0}, {h}, {1.0}, UniformEnergy{0.0, e_hi}}};
}

Result do_oracle() {
    int disagreements = 0, off_boundary = 0;
    for (const auto& c : kDoCases) {
        const bool ours = synthesize_do(single(c.q, c.h, c.e_hi, SlotGeometry(c.n, c.m)), c.d_bar).feasible;
        if (ours == c.grid) continue;
        ++disagreements;
        off_boundary += c.grid == c.loose;
    }
    Detail d;
    d << kv("instances", std::size(kDoCases)) << kv("disagreements", disagreements)
      << kv("away_from_boundary", off_boundary) << kv("limit", kMaxOracleDisagreements);
    return {disagreements <= kMaxOracleDisagreements && off_boundary == 0, d.str()};
}

struct Witness {
    SensorSpec spec;
    PolicyParams params;
    double d_bar;
};

// Random two-state sensors with certified witnesses, `per_class` for each
// digital class.
std::vector<Witness> certified_witnesses(std::size_t per_class, std::uint64_t seed) {
    const PolicyClass classes[] = {PolicyClass::Do, PolicyClass::Greedy, PolicyClass::GreedyFixed,
                                   PolicyClass::Hybrid1, PolicyClass::Hybrid2};
    std::vector<Witness> out;
    Rng rng(seed);
    for (auto cls : classes) {
        std::size_t found = 0;
        for (int attempt = 0; attempt < 5000 && found < per_class; ++attempt) {
            const double q0 = std::pow(10.0, rng.uniform(-1.0, 1.0)), q1 = q0 * std::pow(10.0, rng.uniform(0.0, 2.0));
            const double h0 = std::pow(10.0, rng.uniform(-1.0, 1.0)), h1 = h0 * std::pow(10.0, rng.uniform(0.0, 2.0));
            const double pq = rng.uniform(0.05, 0.95), ph = rng.uniform(0.05, 0.95);
            const SensorSpec spec{GaussianIidSourceModel{}, SlotGeometry(100, 100),
                                  Environment{{q0, q1}, {pq, 1.0 - pq}, {h0, h1}, {ph, 1.0 - ph},
                                              UniformEnergy{0.0, 2.0}}};
            const double d_bar = rng.uniform(0.6, 0.95);
            const FeasibilityReport rep = synthesize(cls, spec, d_bar);
            if (!rep.feasible) continue;
            out.push_back({spec, *rep.witness, d_bar});
            ++found;
        }
    }
    return out;
}

Result checker_simulator() {
    const auto witnesses = certified_witnesses(10, 4);
    std::vector<RunJob> jobs;
    for (std::size_t i = 0; i < witnesses.size(); ++i) {
        jobs.push_back({witnesses[i].spec, witnesses[i].params, kWitnessHorizon, 1000 + i});
    }
    const auto outcomes = run_batch(jobs, true);
    int unstable = 0, inconclusive = 0, over = 0;
    double worst = -INFINITY;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        unstable += outcomes[i].stability.verdict == Verdict::Unstable;
        inconclusive += outcomes[i].stability.verdict == Verdict::Inconclusive;
        const double excess = outcomes[i].summary.mean_distortion / witnesses[i].d_bar - 1.0;
        worst = std::max(worst, excess);
        over += excess > kDistortionRel;
    }
    Detail d;
    d << kv("witnesses", witnesses.size()) << kv("slots_each", kWitnessHorizon) << kv("unstable", unstable)
      << kv("inconclusive", inconclusive) << kv("over_distortion", over) << kv("max_rel_excess", worst);
    return {witnesses.size() == 50 && unstable == 0 && over == 0, d.str()};
}

Result fig2() {
    bool pass = true;
    Detail d;
    for (const char* name : {"fig2a", "fig2b", "fig2c"}) {
        const ExperimentConfig c = load_preset(name);
        const RegionSetup setup = region_setup(*c.region);
        const double b = setup.base.geometry.bandwidth_ratio();
        const RegionGrid dop = region_sweep(setup, PolicyClass::Do);
        std::size_t sub_violations = 0;
        for (auto cls : {PolicyClass::Greedy, PolicyClass::Hybrid1, PolicyClass::Hybrid2}) {
            sub_violations += extra_points(region_sweep(setup, cls), dop);
        }
        const RegionGrid analog = region_sweep(setup, PolicyClass::Analog);
        const std::size_t do_not_analog = extra_points(dop, analog);
        pass = pass && sub_violations == 0;
        if (std::abs(b - 1.0) < 1e-12) {
            pass = pass && do_not_analog == 0;
        } else {
            pass = pass && do_not_analog >= 1;
        }
        d << std::string(name) + ": b=" + std::to_string(b).substr(0, 5) +
                 " subclass_outside_do=" + std::to_string(sub_violations) +
                 " do_not_analog=" + std::to_string(do_not_analog);
    }
    return {pass, d.str()};
}

Result fig3() {
    const RegionSetup a = region_setup(*load_preset("fig3a").region);
    const RegionSetup b = region_setup(*load_preset("fig3b").region);
    const RegionGrid da = region_sweep(a, PolicyClass::Do), db = region_sweep(b, PolicyClass::Do);
    const std::size_t extra = extra_points(db, da), missing = extra_points(da, db);
    std::size_t sub = 0;
    for (const RegionSetup* s : {&a, &b}) {
        sub += extra_points(region_sweep(*s, PolicyClass::GreedyFixed), region_sweep(*s, PolicyClass::Greedy));
    }
    Detail d;
    d << kv("do_a", da.feasible_count()) << kv("do_b", db.feasible_count()) << kv("b_extra", extra)
      << kv("a_not_b", missing) << kv("sub2_outside_sub1", sub);
    return {extra >= 1 && missing == 0 && sub == 0, d.str()};
}

DiscreteSpec reduced(double gamma) {
    DiscreteSpec s;
    s.queue_max = 3;
    s.battery_max = 0;
    s.energy_values = {1};
    s.energy_pmf = {1.0};
    s.q_support = {0.1};
    s.q_pmf = {1.0};
    s.h_support = {1.0, 10.0};
    s.h_pmf = {0.5, 0.5};
    s.d_levels = {0.55, 1.0};
    s.ts_levels = {0, 1};
    s.tt_levels = {0, 1};
    s.gamma = gamma;
    s.lambda = 0.5;
    return s;
}

Result mdp() {
    double worst_ratio = 0.0;
    bool contraction = true;
    for (const DiscreteSpec& spec : {DiscreteSpec{}, load_preset("fig4").tradeoff->spec}) {
        const DelayDistortionMdp m = build_mdp(spec);
        for (double lambda : {0.3, 0.5, 0.9}) {
            const SolvedPolicy sol = value_iteration(m.mdp, lambda);
            for (std::size_t i = 1; i < sol.residuals.size(); ++i) {
                if (sol.residuals[i - 1] > 1e-8) worst_ratio = std::max(worst_ratio, sol.residuals[i] / sol.residuals[i - 1] / lambda);
                contraction = contraction && sol.residuals[i] <= lambda * sol.residuals[i - 1] + kContractionSlack;
            }
        }
    }
    int enum_mismatch = 0, enum_seen = 0;
    for (double gamma : {0.2, 0.5, 0.8}) {
        const DiscreteSpec spec = reduced(gamma);
        const DelayDistortionMdp m = build_mdp(spec);
        const SolvedPolicy sol = value_iteration(m.mdp, spec.lambda);
        for (const auto& c : kEnumCases) {
            if (c.gamma != gamma) continue;
            ++enum_seen;
            const std::size_t s = m.index({0, 0, c.queue, 0, c.h});
            const ActionLabel& l = m.labels[s][sol.action[s]];
            enum_mismatch += std::abs(sol.value[s] - c.value) > kEnumValueAbs || l.d != c.d || l.ts != c.ts || l.tt != c.tt;
        }
    }
    int myopic_mismatch = 0;
    const DelayDistortionMdp m = build_mdp(DiscreteSpec{});
    const SolvedPolicy sol = value_iteration(m.mdp, 0.0);
    for (std::size_t s = 0; s < m.mdp.size(); ++s) {
        double best = INFINITY;
        for (const auto& a : m.mdp.actions[s]) best = std::min(best, a.cost);
        myopic_mismatch += sol.value[s] != best;
    }
    Detail d;
    d << kv("max_ratio_over_lambda", worst_ratio) << kv("enum_states", enum_seen)
      << kv("enum_mismatches", enum_mismatch) << kv("myopic_mismatches", myopic_mismatch);
    return {contraction && enum_seen == 24 && enum_mismatch == 0 && myopic_mismatch == 0, d.str()};
}

Result fig4() {
    const TradeoffConfig t = *load_preset("fig4").tradeoff;
    const auto gammas = t.gamma.values();
    bool pass = true;
    Detail d;
    for (const auto& [tag, spec] : tradeoff_cases(t)) {
        const auto joint = tradeoff_curve(spec, gammas);
        const auto sep = separable_tradeoff_curve(spec, gammas);
        int dominated = 0, queue_breaks = 0, distortion_breaks = 0;
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            dominated += sep[i].avg_queue < joint[i].avg_queue - kCurveSlack &&
                         sep[i].avg_distortion < joint[i].avg_distortion - kCurveSlack;
            if (i == 0) continue;
            queue_breaks += joint[i].avg_queue < joint[i - 1].avg_queue - kCurveSlack;
            distortion_breaks += joint[i].avg_distortion > joint[i - 1].avg_distortion + kCurveSlack;
        }
        pass = pass && dominated == 0 && queue_breaks == 0 && distortion_breaks == 0;
        d << tag.substr(1) + ": separable_dominates=" + std::to_string(dominated) +
                 " queue_decreases=" + std::to_string(queue_breaks) +
                 " distortion_increases=" + std::to_string(distortion_breaks);
    }
    return {pass, d.str()};
}

// Largest feasible index along axis1 in column j, or -1.
int boundary(const RegionGrid& g, std::size_t j) {
    int last = -1;
    for (std::size_t i = 0; i < g.axis1.size(); ++i) {
        if (g.at(i, j).feasible) last = static_cast<int>(i);
    }
    return last;
}

Result fig5() {
    const ScheduleConfig s = *load_preset("fig5").schedule;
    ScheduleOptions opt;
    opt.beta_levels = s.beta_levels;
    std::vector<ScheduleRegion> cases;
    for (std::size_t k = 0; k < s.sensor2_worst.size(); ++k) {
        cases.push_back(region_sweep_two_sensors(schedule_setup(s, k), opt));
    }
    std::size_t chain = 0;
    for (const auto& r : cases) chain += extra_points(r.opportunistic, r.outer) + extra_points(r.fixed, r.opportunistic);
    const std::size_t grown = extra_points(cases[1].opportunistic, cases[0].opportunistic) +
                              extra_points(cases[1].fixed, cases[0].fixed);
    const bool shrinks = grown == 0 && cases[1].opportunistic.feasible_count() + cases[1].fixed.feasible_count() <
                                           cases[0].opportunistic.feasible_count() + cases[0].fixed.feasible_count();
    // Circle marker: sensor 2 at p_w^h = 0.1, sensor 1 always in its worst channel.
    std::size_t circle = 0;
    while (circle < s.sensor2_worst.size() && s.sensor2_worst[circle].second != 0.1) ++circle;
    const RegionGrid& opp = cases.at(circle).opportunistic;
    const std::size_t column = opp.axis2.size() - 1;
    const int b_do = boundary(opp, column), b_fixed = boundary(cases[circle].fixed, column);
    Detail d;
    d << kv("grid", opp.axis1.size()) << kv("chain_violations", chain) << kv("points_added_by_worse_sensor2", grown)
      << kv("do_boundary", b_do) << kv("fixed_boundary", b_fixed);
    return {chain == 0 && shrinks && std::abs(b_do - b_fixed) <= 1 && b_do >= 0, d.str()};
}

// Traces of every class over the Fig. 3 probability grid plus TDMA traces;
// every one is checked as it is produced.
Result invariants() {
    const RegionSetup setup = region_setup(*load_preset("fig3a").region);
    std::vector<RunJob> jobs;
    for (std::size_t i = 0; i < setup.axis1.size(); i += 4) {
        for (std::size_t j = 0; j < setup.axis2.size(); j += 4) {
            const SensorSpec spec = spec_at(setup, setup.axis1[i], setup.axis2[j]);
            for (auto cls : {PolicyClass::Do, PolicyClass::Greedy, PolicyClass::GreedyFixed, PolicyClass::Hybrid1,
                             PolicyClass::Hybrid2, PolicyClass::Analog}) {
                const FeasibilityReport rep = synthesize(cls, spec, setup.d_bar);
                if (rep.feasible) jobs.push_back({spec, *rep.witness, kTallyHorizon, 7 + jobs.size()});
            }
            jobs.push_back({spec, AnalogGreedyParams{}, kTallyHorizon, 7 + jobs.size()});
        }
    }
    std::string error;
    try {
        run_batch(jobs, true);
        const TwoSensorSetup two = schedule_setup(*load_preset("fig5").schedule, 0);
        for (double p : {0.1, 0.5, 0.9}) {
            const MultiSensorSpec spec = multi_spec_at(two, p, p);
            const MultiReport rep = synthesize_schedule(spec);
            if (rep.feasible) simulate_tdma(spec, *rep.witness, kTallyHorizon, 11);
        }
    } catch (const InvariantViolation& e) {
        error = e.what();
    }
    const InvariantTally tally = invariant_tally();
    Detail d;
    d << kv("traces_checked", tally.checked) << kv("failed", tally.failed);
    if (!error.empty()) d << error;
    return {tally.failed == 0 && tally.checked > 0 && error.empty(), d.str()};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Result()> run;
};

} // namespace
} // namespace ehsc

int main(int argc, char** argv) {
    using namespace ehsc;
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(0, 10));
    CLI11_PARSE(app, argc, argv);

    const Criterion criteria[] = {
        {1, "model values match the frozen oracle", models_oracle},
        {2, "water-filling hand case and KKT perturbations", waterfilling},
        {3, "DO synthesis matches the exhaustive-grid oracle", do_oracle},
        {4, "certified witnesses simulate stably within the distortion bound", checker_simulator},
        {5, "single-state region properties", fig2},
        {6, "two-state probability region properties", fig3},
        {7, "value iteration contraction, enumeration and myopic identity", mdp},
        {8, "joint trade-off dominates separable and is monotone", fig4},
        {9, "two-sensor containment, shrinkage and near-coincidence", fig5},
        {10, "trace conservation and nonnegativity", invariants},
    };
    bool all = true;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s C%d %s  (%s; %.1f s)\n", r.pass ? "PASS" : "FAIL", c.id, c.name, r.detail.c_str(), secs);
        std::fflush(stdout);
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
