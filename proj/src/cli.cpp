#include "ehsc/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ehsc/csv.hpp"

namespace ehsc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

fs::path write_json(const fs::path& dir, const std::string& name, const json& j) {
    const fs::path p = dir / name;
    auto f = open_out(p);
    f << j.dump(2) << '\n';
    return p;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json margins_json(const Margins& m) {
    return {{"rate", finite_or_null(m.rate)},
            {"distortion", finite_or_null(m.distortion)},
            {"energy_source", finite_or_null(m.energy_source)},
            {"energy_channel", finite_or_null(m.energy_channel)}};
}

json table_json(const QhTable& t) {
    json rows = json::array();
    for (std::size_t q = 0; q < t.n_q(); ++q) {
        json row = json::array();
        for (std::size_t h = 0; h < t.n_h(); ++h) row.push_back(t.at(q, h));
        rows.push_back(row);
    }
    return rows;
}

json params_json(const PolicyParams& params) {
    json j = {{"class", std::string(to_string(policy_class(params)))}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DoParams>) {
                j.update({{"d_per_q", p.d_per_q},
                          {"ts_per_q", p.ts_per_q},
                          {"tt_per_h", p.tt_per_h},
                          {"alpha", p.alpha},
                          {"epsilon", p.epsilon}});
            } else if constexpr (std::is_same_v<T, GreedyParams>) {
                j.update({{"d_per_qh", table_json(p.d_per_qh)}, {"alpha_per_qh", table_json(p.alpha_per_qh)}});
            } else if constexpr (std::is_same_v<T, GreedyFixedParams>) {
                j.update({{"d_per_qh", table_json(p.d_per_qh)}, {"alpha", p.alpha}});
            } else if constexpr (std::is_same_v<T, Hybrid1Params>) {
                j.update({{"d_per_q", p.d_per_q}, {"tt_per_h", p.tt_per_h}, {"alpha", p.alpha}});
            } else if constexpr (std::is_same_v<T, Hybrid2Params>) {
                j.update({{"d_per_q", p.d_per_q}, {"ts_per_q", p.ts_per_q}, {"alpha", p.alpha}});
            } else if constexpr (std::is_same_v<T, AnalogParams>) {
                j.update({{"tt_per_qh", table_json(p.tt_per_qh)}, {"epsilon", p.epsilon}});
            }
        },
        params);
    return j;
}

// Ten equal-width bins over the finite rate margins of a grid.
json margin_histogram(const RegionGrid& g) {
    std::vector<double> v;
    for (const auto& p : g.points) {
        if (std::isfinite(p.margins.rate)) v.push_back(p.margins.rate);
    }
    json h = {{"bins", 10}, {"finite", v.size()}};
    if (v.empty()) return h;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    std::vector<std::size_t> counts(10, 0);
    const double width = (*hi - *lo) / 10.0;
    for (double x : v) {
        const auto b = width > 0.0 ? std::min<std::size_t>(static_cast<std::size_t>((x - *lo) / width), 9) : 0;
        ++counts[b];
    }
    h["lo"] = *lo;
    h["hi"] = *hi;
    h["counts"] = counts;
    return h;
}

json header_json(const ExperimentConfig& c) {
    return {{"kind", std::string(to_string(c.kind))}, {"seed", c.seed}, {"config_hash", config_hash(c)}};
}

class Checks {
public:
    explicit Checks(std::ostream& log) : log_(log) {}
    void add(const std::string& name, bool ok, const std::string& detail = "") {
        log_ << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) log_ << "  (" << detail << ")";
        log_ << '\n';
        failed_ = failed_ || !ok;
    }
    bool failed() const { return failed_; }

private:
    std::ostream& log_;
    bool failed_ = false;
};

void validate_region(const std::string& name, const RegionConfig& cfg, std::size_t horizon, std::uint64_t seed,
                     bool parallel, Checks& checks) {
    const RegionSetup setup = region_setup(cfg);
    std::map<PolicyClass, RegionGrid> grids;
    for (auto cls : cfg.classes) grids[cls] = region_sweep(setup, cls, {}, parallel);
    bool margins_ok = true;
    for (const auto& [cls, g] : grids) {
        for (const auto& p : g.points) margins_ok = margins_ok && (p.feasible == margins_feasible(p.margins));
    }
    checks.add(name + ": verdicts agree with margins", margins_ok);
    const auto contain = [&](PolicyClass outer, PolicyClass inner) {
        if (!grids.count(outer) || !grids.count(inner)) return;
        checks.add(name + ": " + std::string(to_string(outer)) + " contains " + std::string(to_string(inner)),
                   contains(grids[outer], grids[inner]));
    };
    for (auto cls : {PolicyClass::Greedy, PolicyClass::GreedyFixed, PolicyClass::Hybrid1, PolicyClass::Hybrid2}) {
        contain(PolicyClass::Do, cls);
    }
    contain(PolicyClass::Greedy, PolicyClass::GreedyFixed);

    // Simulate the first certified DO witness.
    if (grids.count(PolicyClass::Do)) {
        const RegionGrid& g = grids[PolicyClass::Do];
        for (const auto& p : g.points) {
            if (!p.feasible) continue;
            const SensorSpec spec = spec_at(setup, p.axis1, p.axis2);
            const FeasibilityReport rep = synthesize_do(spec, cfg.d_bar);
            const Trace t = run(spec, *rep.witness, horizon, seed);
            const StabilityVerdict v = stability_estimate(t);
            std::ostringstream d;
            d << "verdict " << to_string(v.verdict) << ", mean distortion " << t.summary.mean_distortion;
            checks.add(name + ": simulated DO witness not unstable and within distortion",
                       v.verdict != Verdict::Unstable && t.summary.mean_distortion <= cfg.d_bar * 1.01, d.str());
            break;
        }
    }
}

void validate_tradeoff(const std::string& name, const TradeoffConfig& cfg, bool parallel, Checks& checks) {
    for (const auto& [tag, spec] : tradeoff_cases(cfg)) {
        const DelayDistortionMdp m = build_mdp(spec);
        double worst_row = 0.0;
        for (const auto& acts : m.mdp.actions) {
            for (const auto& a : acts) {
                double total = 0.0;
                for (const auto& t : a.next) total += t.p;
                worst_row = std::max(worst_row, std::abs(total - 1.0));
            }
        }
        checks.add(name + tag + ": transition rows sum to 1", worst_row <= 1e-12);
        const SolvedPolicy sol = value_iteration(m.mdp, spec.lambda, 1e-10, parallel);
        bool contraction = true;
        for (std::size_t i = 1; i < sol.residuals.size(); ++i) {
            contraction = contraction && sol.residuals[i] <= spec.lambda * sol.residuals[i - 1] + 1e-12;
        }
        checks.add(name + tag + ": value-iteration residuals contract", contraction && sol.residual < 1e-10);
        const auto pi = stationary_distribution(m.mdp, sol.action, m.initial_distribution());
        double pv = 0.0, pc = 0.0;
        for (std::size_t s = 0; s < pi.size(); ++s) {
            pv += pi[s] * sol.value[s];
            pc += pi[s] * m.mdp.actions[s][sol.action[s]].cost;
        }
        checks.add(name + tag + ": stationary cost matches discounted value", std::abs((1.0 - spec.lambda) * pv - pc) < 1e-6);
        const auto curve = tradeoff_curve(spec, cfg.gamma.values(), parallel);
        bool converged = true;
        for (const auto& p : curve) converged = converged && p.residual < 1e-10;
        checks.add(name + tag + ": trade-off solves converged", converged);
    }
}

void validate_schedule(const std::string& name, const ScheduleConfig& cfg, bool parallel, Checks& checks) {
    const std::size_t cases = std::max<std::size_t>(cfg.sensor2_worst.size(), 1);
    for (std::size_t k = 0; k < cases; ++k) {
        ScheduleOptions opt;
        opt.beta_levels = cfg.beta_levels;
        const ScheduleRegion r = region_sweep_two_sensors(schedule_setup(cfg, k), opt, parallel);
        const std::string tag = name + " case " + std::to_string(k);
        checks.add(tag + ": opportunistic contains fixed", contains(r.opportunistic, r.fixed));
        checks.add(tag + ": outer bound contains opportunistic", contains(r.outer, r.opportunistic));
    }
}

} // namespace

void apply_resolution(ExperimentConfig& c, std::size_t n) {
    if (n == 0) throw ConfigError("--resolution must be positive");
    if (c.region) c.region->axis1.n = c.region->axis2.n = n;
    if (c.schedule) c.schedule->axis1.n = c.schedule->axis2.n = n;
    if (c.tradeoff) c.tradeoff->gamma.n = n;
    if (c.validate) {
        if (n < 2) throw ConfigError("--resolution must be at least 2 for validate");
        c.validate->resolution = n;
    }
    if (c.simulate) throw ConfigError("--resolution does not apply to simulate");
}

CommandOutput cmd_region(const ExperimentConfig& c, const fs::path& out, bool parallel) {
    if (!c.region) throw ConfigError("region section is missing");
    const RegionConfig& r = *c.region;
    fs::create_directories(out);
    CommandOutput res;
    const RegionSetup setup = region_setup(r);
    json summary = header_json(c);
    summary["resolution"] = {r.axis1.n, r.axis2.n};
    summary["axes"] = r.axes == AxisKind::Snr ? "snr" : "probability";
    summary["d_bar"] = r.d_bar;
    json classes = json::array();
    for (auto cls : r.classes) {
        const RegionGrid g = region_sweep(setup, cls, {}, parallel);
        const fs::path p = out / ("region_" + std::string(to_string(cls)) + ".csv");
        auto f = open_out(p);
        write_region_csv(f, g);
        res.files.push_back(p);
        classes.push_back({{"class", std::string(to_string(cls))},
                           {"feasible_points", g.feasible_count()},
                           {"total_points", g.points.size()},
                           {"rate_margin_histogram", margin_histogram(g)},
                           {"file", p.filename().string()}});
    }
    summary["classes"] = classes;
    res.files.push_back(write_json(out, "summary.json", summary));
    return res;
}

CommandOutput cmd_tradeoff(const ExperimentConfig& c, const fs::path& out, bool parallel) {
    if (!c.tradeoff) throw ConfigError("tradeoff section is missing");
    const TradeoffConfig& t = *c.tradeoff;
    fs::create_directories(out);
    CommandOutput res;
    json summary = header_json(c);
    json curves = json::array();
    const auto gammas = t.gamma.values();
    for (const auto& [tag, spec] : tradeoff_cases(t)) {
        const auto emit = [&](const std::string& method, const std::vector<TradeoffPoint>& pts) {
            const fs::path p = out / ("tradeoff" + tag + "_" + method + ".csv");
            auto f = open_out(p);
            write_tradeoff_csv(f, pts);
            res.files.push_back(p);
            json pj = json::array();
            for (const auto& x : pts) pj.push_back({x.avg_queue, x.avg_distortion});
            curves.push_back({{"method", method},
                              {"energy_pmf", spec.energy_pmf},
                              {"file", p.filename().string()},
                              {"points", pj}});
        };
        if (t.joint) emit("joint", tradeoff_curve(spec, gammas, parallel));
        if (t.separable) emit("separable", separable_tradeoff_curve(spec, gammas, parallel));
    }
    summary["curves"] = curves;
    res.files.push_back(write_json(out, "summary.json", summary));
    return res;
}

CommandOutput cmd_simulate(const ExperimentConfig& c, const fs::path& out, bool) {
    if (!c.simulate) throw ConfigError("simulate section is missing");
    const SimulateConfig& s = *c.simulate;
    fs::create_directories(out);
    CommandOutput res;
    json summary = header_json(c);
    const FeasibilityReport rep = synthesize(s.policy, s.sensor, s.d_bar);
    summary["feasible"] = rep.feasible;
    summary["margins"] = margins_json(rep.margins);
    if (!rep.feasible) {
        res.exit_code = kExitValidation;
        res.files.push_back(write_json(out, "summary.json", summary));
        return res;
    }
    const Trace trace = run(s.sensor, *rep.witness, s.horizon, c.seed);
    summary["witness"] = params_json(*rep.witness);
    summary["slots"] = trace.summary.slots;
    summary["mean_distortion"] = trace.summary.mean_distortion;
    summary["mean_queue_bits"] = trace.summary.mean_queue;
    summary["mean_ts"] = trace.summary.mean_ts;
    summary["mean_tt"] = trace.summary.mean_tt;
    summary["skipped_slots"] = trace.summary.skipped_slots;
    const InvariantReport inv = check_invariants(trace.records, trace.initial_energy);
    summary["invariants"] = {{"nonnegative", inv.nonnegative},
                             {"per_slot_budget", inv.per_slot_budget},
                             {"conservation", inv.conservation}};
    if (trace.records.size() >= 10000) {
        const StabilityVerdict v = stability_estimate(trace);
        summary["stability"] = {{"verdict", to_string(v.verdict)},
                                {"drift", v.drift_estimate},
                                {"drift_ci", {v.drift_ci_lo, v.drift_ci_hi}},
                                {"tail_fraction", v.tail_fraction}};
    }
    const fs::path p = out / "trace.csv";
    {
        auto f = open_out(p);
        f << "# seed=" << c.seed << "\n# config_hash=" << config_hash(c) << '\n';
        Trace head;
        head.seed = trace.seed;
        head.records.assign(trace.records.begin(),
                            trace.records.begin() + static_cast<std::ptrdiff_t>(std::min(s.trace_rows, trace.records.size())));
        write_trace_csv(f, head, s.sensor.env);
    }
    res.files.push_back(p);
    res.files.push_back(write_json(out, "summary.json", summary));
    return res;
}

CommandOutput cmd_schedule(const ExperimentConfig& c, const fs::path& out, bool parallel) {
    if (!c.schedule) throw ConfigError("schedule section is missing");
    const ScheduleConfig& s = *c.schedule;
    fs::create_directories(out);
    CommandOutput res;
    json summary = header_json(c);
    json cases = json::array();
    ScheduleOptions opt;
    opt.beta_levels = s.beta_levels;
    const std::size_t n = std::max<std::size_t>(s.sensor2_worst.size(), 1);
    for (std::size_t k = 0; k < n; ++k) {
        const ScheduleRegion r = region_sweep_two_sensors(schedule_setup(s, k), opt, parallel);
        json entry;
        if (k < s.sensor2_worst.size()) entry["sensor2_worst"] = {s.sensor2_worst[k].first, s.sensor2_worst[k].second};
        for (const auto& [label, grid] : {std::pair<std::string, const RegionGrid*>{"opportunistic", &r.opportunistic},
                                          {"fixed", &r.fixed},
                                          {"outer", &r.outer}}) {
            const fs::path p = out / ("schedule_case" + std::to_string(k) + "_" + label + ".csv");
            auto f = open_out(p);
            write_region_csv(f, *grid);
            res.files.push_back(p);
            entry[label] = {{"feasible_points", grid->feasible_count()}, {"file", p.filename().string()}};
        }
        entry["fixed_within_opportunistic"] = contains(r.opportunistic, r.fixed);
        entry["opportunistic_within_outer"] = contains(r.outer, r.opportunistic);
        cases.push_back(entry);
    }
    summary["cases"] = cases;
    res.files.push_back(write_json(out, "summary.json", summary));
    return res;
}

CommandOutput cmd_validate(const ExperimentConfig& c, const fs::path& out, bool parallel, std::ostream& log) {
    const ValidateConfig v = c.validate.value_or(ValidateConfig{});
    std::vector<std::string> names = v.presets;
    if (names.empty()) {
        for (const auto& n : preset_names()) {
            if (load_preset(n).kind != ExperimentKind::Validate) names.push_back(n);
        }
    }
    Checks checks(log);
    for (const auto& name : names) {
        ExperimentConfig p;
        try {
            p = load_preset(name);
            checks.add(name + ": parses", true);
        } catch (const ConfigError& e) {
            checks.add(name + ": parses", false, e.what());
            continue;
        }
        const json canon = to_json(p);
        checks.add(name + ": JSON round trip", to_json(parse_config(canon.dump())) == canon);
        checks.add(name + ": YAML round trip", to_json(parse_config(to_yaml(p))) == canon);
        if (p.kind != ExperimentKind::Simulate) apply_resolution(p, v.resolution);
        try {
            switch (p.kind) {
            case ExperimentKind::Region: validate_region(name, *p.region, v.horizon, c.seed, parallel, checks); break;
            case ExperimentKind::Tradeoff: validate_tradeoff(name, *p.tradeoff, parallel, checks); break;
            case ExperimentKind::Schedule: validate_schedule(name, *p.schedule, parallel, checks); break;
            case ExperimentKind::Simulate: {
                SimulateConfig s = *p.simulate;
                s.horizon = std::min(s.horizon, v.horizon);
                const FeasibilityReport rep = synthesize(s.policy, s.sensor, s.d_bar);
                checks.add(name + ": witness certified", rep.feasible);
                if (rep.feasible) {
                    const Trace t = run(s.sensor, *rep.witness, s.horizon, p.seed);
                    const StabilityVerdict sv = stability_estimate(t);
                    checks.add(name + ": simulated witness not unstable", sv.verdict != Verdict::Unstable,
                               to_string(sv.verdict));
                }
                break;
            }
            case ExperimentKind::Validate: break;
            }
        } catch (const InvariantViolation& e) {
            checks.add(name + ": invariants", false, e.what());
        }
    }
    const InvariantTally tally = invariant_tally();
    checks.add("trace invariants", tally.failed == 0,
               std::to_string(tally.checked) + " traces checked, " + std::to_string(tally.failed) + " failed");
    (void)out;
    CommandOutput res;
    res.exit_code = checks.failed() ? kExitValidation : kExitOk;
    return res;
}

CommandOutput execute(const ExperimentConfig& c, const fs::path& out, bool parallel, std::ostream& log) {
    switch (c.kind) {
    case ExperimentKind::Region: return cmd_region(c, out, parallel);
    case ExperimentKind::Tradeoff: return cmd_tradeoff(c, out, parallel);
    case ExperimentKind::Simulate: return cmd_simulate(c, out, parallel);
    case ExperimentKind::Schedule: return cmd_schedule(c, out, parallel);
    case ExperimentKind::Validate: return cmd_validate(c, out, parallel, log);
    }
    return {};
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Energy-harvesting sensor policies: regions, trade-offs, simulation and scheduling"};
    app.require_subcommand(1);
    std::string config_path, preset, out_dir;
    std::uint64_t seed = 0;
    std::size_t resolution = 0, jobs = 0;
    const auto add_flags = [&](CLI::App* sub) {
        auto* cfg = sub->add_option("--config", config_path, "YAML or JSON experiment file");
        auto* pre = sub->add_option("--preset", preset, "shipped preset name");
        cfg->excludes(pre);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->add_option("--resolution", resolution, "grid points per axis / gamma points");
        sub->add_option("--jobs", jobs, "OpenMP threads; 1 selects the serial path");
    };
    for (std::string_view name : {"region", "tradeoff", "simulate", "schedule", "validate"}) {
        add_flags(app.add_subcommand(std::string(name), "run a " + std::string(name) + " experiment"));
    }
    app.add_subcommand("presets", "list shipped presets");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "presets") {
        for (const auto& n : preset_names()) std::cout << n << '\n';
        return kExitOk;
    }
    try {
        ExperimentConfig config;
        if (!config_path.empty()) {
            config = load_config(config_path);
        } else if (!preset.empty()) {
            config = load_preset(preset);
        } else if (command == "validate") {
            config.kind = ExperimentKind::Validate;
            config.validate = ValidateConfig{};
        } else {
            throw ConfigError("one of --config or --preset is required");
        }
        if (std::string(to_string(config.kind)) != command) {
            throw ConfigError("config kind '" + std::string(to_string(config.kind)) + "' does not match subcommand '" +
                              command + "'");
        }
        if (app.get_subcommands().front()->count("--seed")) config.seed = seed;
        if (resolution) apply_resolution(config, resolution);
        if (!out_dir.empty()) config.output = out_dir;
        if (jobs) omp_set_num_threads(static_cast<int>(jobs));
        const bool parallel = jobs != 1;
        const CommandOutput res = execute(config, config.output, parallel, std::cout);
        for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
        if (config.kind == ExperimentKind::Simulate) {
            std::cout << "seed " << config.seed << " config " << config_hash(config) << '\n';
        }
        if (res.exit_code == kExitValidation && config.kind == ExperimentKind::Simulate) {
            std::cerr << "no certified witness for this configuration\n";
        }
        return res.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SpecError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

} // namespace ehsc
