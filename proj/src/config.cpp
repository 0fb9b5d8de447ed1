#include "ehsc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ehsc/csv.hpp"
#include "presets_table.hpp"

namespace ehsc {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Text to JSON
// ---------------------------------------------------------------------------

using LineMap = std::map<std::string, int>;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

json yaml_scalar(const YAML::Node& n) {
    const std::string& s = n.Scalar();
    if (n.Tag() == "!") return s; // quoted
    if (s.empty() || s == "~" || s == "null") return nullptr;
    if (s == "true") return true;
    if (s == "false") return false;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    std::uint64_t u = 0;
    if (auto r = std::from_chars(b, e, u); r.ec == std::errc{} && r.ptr == e) return u;
    std::int64_t i = 0;
    if (auto r = std::from_chars(b, e, i); r.ec == std::errc{} && r.ptr == e) return i;
    double d = 0.0;
    if (auto r = std::from_chars(b, e, d); r.ec == std::errc{} && r.ptr == e) return d;
    if (s == ".inf" || s == "inf") return std::numeric_limits<double>::infinity();
    return s;
}

json yaml_to_json(const YAML::Node& n, const std::string& path, LineMap& lines) {
    lines[path] = n.Mark().line + 1;
    switch (n.Type()) {
    case YAML::NodeType::Map: {
        json obj = json::object();
        for (const auto& kv : n) {
            const std::string key = kv.first.as<std::string>();
            obj[key] = yaml_to_json(kv.second, join(path, key), lines);
        }
        return obj;
    }
    case YAML::NodeType::Sequence: {
        json arr = json::array();
        std::size_t i = 0;
        for (const auto& item : n) {
            arr.push_back(yaml_to_json(item, path + "[" + std::to_string(i) + "]", lines));
            ++i;
        }
        return arr;
    }
    case YAML::NodeType::Scalar: return yaml_scalar(n);
    default: return nullptr;
    }
}

// ---------------------------------------------------------------------------
// JSON to structs
// ---------------------------------------------------------------------------

class Reader {
public:
    Reader(const json& j, std::string path, const LineMap* lines) : j_(j), path_(std::move(path)), lines_(lines) {
        if (!j_.is_object()) fail(path_, "expected a mapping");
    }

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        std::string where = path.empty() ? "<root>" : path;
        if (lines_) {
            // A missing key has no line of its own; report its enclosing mapping.
            std::string probe = path;
            auto it = lines_->find(probe);
            while (it == lines_->end() && probe.find('.') != std::string::npos) {
                probe.erase(probe.rfind('.'));
                it = lines_->find(probe);
            }
            if (it != lines_->end()) where += " (line " + std::to_string(it->second) + ")";
        }
        throw ConfigError(where + ": " + msg);
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail(join(path_, key), "required key is missing");
        return j_.at(key);
    }

    std::string path(const std::string& key) const { return join(path_, key); }

    double number(const std::string& key) { return to_number(at(key), path(key)); }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::size_t count(const std::string& key) { return to_count(at(key), path(key)); }
    std::size_t count(const std::string& key, std::size_t fallback) { return has(key) ? count(key) : fallback; }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            fail(path(key), "expected a nonnegative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = at(key);
        if (!v.is_boolean()) fail(path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) fail(path(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }

    std::vector<double> numbers(const std::string& key) {
        const json& v = at(key);
        if (!v.is_array()) fail(path(key), "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_number(v[i], path(key) + "[" + std::to_string(i) + "]"));
        return out;
    }

    std::vector<int> integers(const std::string& key) {
        const json& v = at(key);
        if (!v.is_array()) fail(path(key), "expected a list of integers");
        std::vector<int> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer()) fail(path(key) + "[" + std::to_string(i) + "]", "expected an integer");
            out.push_back(v[i].get<int>());
        }
        return out;
    }

    Reader child(const std::string& key) { return Reader(at(key), path(key), lines_); }

    const LineMap* lines() const { return lines_; }

    void done() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) fail(join(path_, key), "unknown key");
        }
    }

private:
    double to_number(const json& v, const std::string& p) const {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf" || s == ".inf") return std::numeric_limits<double>::infinity();
        }
        fail(p, "expected a number");
    }

    std::size_t to_count(const json& v, const std::string& p) const {
        if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            return v.get<std::size_t>();
        }
        fail(p, "expected a nonnegative integer");
    }

    const json& j_;
    std::string path_;
    const LineMap* lines_;
    std::set<std::string> seen_;
};

template <class F> auto checked(const Reader& r, const std::string& path, F&& f) {
    try {
        return f();
    } catch (const SpecError& e) {
        r.fail(path, e.what());
    } catch (const DomainError& e) {
        r.fail(path, e.what());
    } catch (const InvariantViolation& e) {
        r.fail(path, e.what());
    }
}

GridSpec read_grid(Reader r) {
    GridSpec g;
    g.lo = r.number("lo");
    g.hi = r.number("hi");
    g.n = r.count("n");
    const std::string scale = r.string("scale", "linear");
    if (scale == "log") {
        g.log = true;
    } else if (scale != "linear") {
        r.fail(r.path("scale"), "expected log or linear");
    }
    if (g.n == 0) r.fail(r.path("n"), "grid needs at least one point");
    if (g.log && !(g.lo > 0.0 && g.hi > 0.0)) r.fail(r.path("lo"), "log grid bounds must be positive");
    r.done();
    return g;
}

SourceModel read_source(Reader r) {
    const std::string model = r.string("model");
    SourceModel out;
    if (model == "gaussian_iid") {
        GaussianIidSourceModel m;
        m.d_max = r.number("d_max", m.d_max);
        m.ts_max = r.number("ts_max", m.ts_max);
        m.zeta = r.number("zeta", m.zeta);
        m.eta = r.number("eta", m.eta);
        out = m;
    } else if (model == "gauss_markov") {
        GaussMarkovSourceModel m;
        m.d_max = r.number("d_max", m.d_max);
        m.zeta = r.number("zeta", m.zeta);
        m.nu = r.number("nu", m.nu);
        out = m;
    } else {
        r.fail(r.path("model"), "expected gaussian_iid or gauss_markov");
    }
    r.done();
    checked(r, "", [&] {
        std::visit([](const auto& m) { m.validate(); }, out);
        return 0;
    });
    return out;
}

SlotGeometry read_geometry(Reader r) {
    const double n = r.number("channel_uses");
    const double m = r.number("source_samples");
    r.done();
    if (n != std::floor(n) || m != std::floor(m)) r.fail("", "slot geometry must be integral");
    return checked(r, "", [&] { return SlotGeometry(static_cast<int>(n), static_cast<int>(m)); });
}

std::pair<std::vector<double>, std::vector<double>> read_law(Reader r) {
    auto support = r.numbers("support");
    std::vector<double> pmf;
    if (r.has("pmf")) {
        pmf = r.numbers("pmf");
    } else {
        pmf.assign(support.size(), support.empty() ? 0.0 : 1.0 / static_cast<double>(support.size()));
    }
    r.done();
    return {std::move(support), std::move(pmf)};
}

EnergyDistribution read_energy(Reader r) {
    const std::string kind = r.string("distribution");
    EnergyDistribution out;
    if (kind == "uniform") {
        out = UniformEnergy{r.number("lo"), r.number("hi")};
    } else if (kind == "discrete") {
        out = DiscreteEnergy{r.numbers("values"), r.numbers("probs")};
    } else {
        r.fail(r.path("distribution"), "expected uniform or discrete");
    }
    r.done();
    return out;
}

SensorSpec read_sensor(Reader r) {
    SensorSpec s;
    if (r.has("source")) s.source = read_source(r.child("source"));
    if (r.has("geometry")) s.geometry = read_geometry(r.child("geometry"));
    s.env.energy = r.has("energy") ? read_energy(r.child("energy")) : EnergyDistribution{UniformEnergy{}};
    s.env.q_support = {1.0};
    s.env.q_pmf = {1.0};
    s.env.h_support = {1.0};
    s.env.h_pmf = {1.0};
    if (r.has("q")) std::tie(s.env.q_support, s.env.q_pmf) = read_law(r.child("q"));
    if (r.has("h")) std::tie(s.env.h_support, s.env.h_pmf) = read_law(r.child("h"));
    r.done();
    checked(r, "", [&] {
        s.validate();
        return 0;
    });
    return s;
}

DiscreteSpec read_discrete(Reader r) {
    DiscreteSpec s;
    s.queue_max = static_cast<int>(r.count("queue_max", static_cast<std::size_t>(s.queue_max)));
    s.battery_max = static_cast<int>(r.count("battery_max", static_cast<std::size_t>(s.battery_max)));
    if (r.has("energy")) {
        Reader e = r.child("energy");
        s.energy_values = e.integers("values");
        s.energy_pmf = e.has("probs") ? e.numbers("probs")
                                      : std::vector<double>(s.energy_values.size(),
                                                            1.0 / static_cast<double>(std::max<std::size_t>(
                                                                      s.energy_values.size(), 1)));
        e.done();
    }
    if (r.has("q")) std::tie(s.q_support, s.q_pmf) = read_law(r.child("q"));
    if (r.has("h")) std::tie(s.h_support, s.h_pmf) = read_law(r.child("h"));
    if (r.has("d_levels")) s.d_levels = r.numbers("d_levels");
    if (r.has("ts_levels")) s.ts_levels = r.integers("ts_levels");
    if (r.has("tt_levels")) s.tt_levels = r.integers("tt_levels");
    s.gamma = r.number("gamma", s.gamma);
    s.lambda = r.number("lambda", s.lambda);
    if (r.has("source")) s.source = read_source(r.child("source"));
    if (r.has("geometry")) s.geometry = read_geometry(r.child("geometry"));
    r.done();
    checked(r, "", [&] {
        s.validate();
        return 0;
    });
    return s;
}

PolicyClass read_class(const Reader& r, const json& v, const std::string& path) {
    if (!v.is_string()) r.fail(path, "expected a policy class name");
    const auto cls = policy_class_from_string(v.get<std::string>());
    if (!cls) r.fail(path, "unknown policy class '" + v.get<std::string>() + "'");
    return *cls;
}

double probability(const Reader& r, double p, const std::string& path) {
    if (!(p >= 0.0 && p <= 1.0)) r.fail(path, "expected a probability in [0, 1]");
    return p;
}

RegionConfig read_region(Reader r) {
    RegionConfig c;
    c.d_bar = r.number("d_bar");
    const std::string axes = r.string("axes", "snr");
    if (axes == "probability") {
        c.axes = AxisKind::WorstProbability;
    } else if (axes != "snr") {
        r.fail(r.path("axes"), "expected snr or probability");
    }
    c.axis1 = read_grid(r.child("axis1"));
    c.axis2 = read_grid(r.child("axis2"));
    if (r.has("classes")) {
        const json& v = r.at("classes");
        if (!v.is_array() || v.empty()) r.fail(r.path("classes"), "expected a nonempty list");
        for (std::size_t i = 0; i < v.size(); ++i) {
            c.classes.push_back(read_class(r, v[i], r.path("classes") + "[" + std::to_string(i) + "]"));
        }
    } else {
        for (int i = 0; i <= static_cast<int>(PolicyClass::AnalogGreedy); ++i) {
            c.classes.push_back(static_cast<PolicyClass>(i));
        }
    }
    c.sensor = read_sensor(r.child("sensor"));
    if (c.axes == AxisKind::WorstProbability && (c.sensor.env.n_q() != 2 || c.sensor.env.n_h() != 2)) {
        r.fail(r.path("sensor"), "probability sweeps need two-state q and h supports");
    }
    r.done();
    return c;
}

TradeoffConfig read_tradeoff(Reader r) {
    TradeoffConfig c;
    c.spec = read_discrete(r.child("mdp"));
    if (r.has("energy_worst")) {
        c.energy_worst = r.numbers("energy_worst");
        for (std::size_t i = 0; i < c.energy_worst.size(); ++i) {
            probability(r, c.energy_worst[i], r.path("energy_worst") + "[" + std::to_string(i) + "]");
        }
    }
    if (!c.energy_worst.empty() && c.spec.energy_values.size() != 2) {
        r.fail(r.path("energy_worst"), "needs exactly two energy values");
    }
    if (r.has("gamma")) c.gamma = read_grid(r.child("gamma"));
    c.joint = r.boolean("joint", c.joint);
    c.separable = r.boolean("separable", c.separable);
    r.done();
    return c;
}

SimulateConfig read_simulate(Reader r) {
    SimulateConfig c;
    c.policy = read_class(r, r.at("policy"), r.path("policy"));
    c.d_bar = r.number("d_bar");
    c.horizon = r.count("horizon", c.horizon);
    c.trace_rows = r.count("trace_rows", c.trace_rows);
    c.sensor = read_sensor(r.child("sensor"));
    if (c.horizon == 0) r.fail(r.path("horizon"), "horizon must be positive");
    r.done();
    return c;
}

ScheduleConfig read_schedule(Reader r) {
    ScheduleConfig c;
    c.d_bar = r.numbers("d_bar");
    const json& sensors = r.at("sensors");
    if (!sensors.is_array() || sensors.empty()) r.fail(r.path("sensors"), "expected a nonempty list of sensors");
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        c.sensors.push_back(read_sensor(Reader(sensors[i], r.path("sensors") + "[" + std::to_string(i) + "]", r.lines())));
    }
    if (c.d_bar.size() != c.sensors.size()) r.fail(r.path("d_bar"), "one distortion target per sensor is required");
    if (r.has("sensor2_worst")) {
        const json& v = r.at("sensor2_worst");
        const std::string p = r.path("sensor2_worst");
        if (!v.is_array()) r.fail(p, "expected a list of [p_q, p_h] pairs");
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string pi = p + "[" + std::to_string(i) + "]";
            if (!v[i].is_array() || v[i].size() != 2 || !v[i][0].is_number() || !v[i][1].is_number()) {
                r.fail(pi, "expected [p_q, p_h]");
            }
            c.sensor2_worst.emplace_back(probability(r, v[i][0].get<double>(), pi),
                                         probability(r, v[i][1].get<double>(), pi));
        }
        if (!c.sensor2_worst.empty() && c.sensors.size() < 2) r.fail(p, "needs a second sensor");
    }
    for (std::size_t l = 0; l < c.sensors.size(); ++l) {
        if (c.sensors[l].env.n_q() != 2 || c.sensors[l].env.n_h() != 2) {
            if (l == 0 || !c.sensor2_worst.empty()) {
                r.fail(r.path("sensors") + "[" + std::to_string(l) + "]", "sweeps need two-state q and h supports");
            }
        }
    }
    if (r.has("axis1")) c.axis1 = read_grid(r.child("axis1"));
    if (r.has("axis2")) c.axis2 = read_grid(r.child("axis2"));
    c.beta_levels = r.count("beta_levels", c.beta_levels);
    if (c.beta_levels < 2) r.fail(r.path("beta_levels"), "at least two levels are required");
    r.done();
    return c;
}

ValidateConfig read_validate(Reader r) {
    ValidateConfig c;
    if (r.has("presets")) {
        const json& v = r.at("presets");
        if (!v.is_array()) r.fail(r.path("presets"), "expected a list of preset names");
        const auto names = preset_names();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string pi = r.path("presets") + "[" + std::to_string(i) + "]";
            if (!v[i].is_string()) r.fail(pi, "expected a preset name");
            const auto name = v[i].get<std::string>();
            if (std::find(names.begin(), names.end(), name) == names.end()) r.fail(pi, "unknown preset '" + name + "'");
            c.presets.push_back(name);
        }
    }
    c.resolution = r.count("resolution", c.resolution);
    c.horizon = r.count("horizon", c.horizon);
    if (c.resolution < 2) r.fail(r.path("resolution"), "resolution must be at least 2");
    if (c.horizon < 10000) r.fail(r.path("horizon"), "stability checks need at least 10000 slots");
    r.done();
    return c;
}

constexpr std::array<std::string_view, 5> kKindNames{"region", "tradeoff", "simulate", "schedule", "validate"};

ExperimentConfig read_config(const json& root, const LineMap* lines) {
    Reader r(root, "", lines);
    ExperimentConfig c;
    const std::string kind = r.string("kind");
    const auto it = std::find(kKindNames.begin(), kKindNames.end(), kind);
    if (it == kKindNames.end()) r.fail("kind", "expected one of region, tradeoff, simulate, schedule, validate");
    c.kind = static_cast<ExperimentKind>(it - kKindNames.begin());
    c.seed = r.u64("seed", c.seed);
    c.output = r.string("output", c.output);
    for (std::string_view other : kKindNames) {
        if (other != kind && r.has(std::string(other))) {
            r.fail(std::string(other), "section does not match kind '" + kind + "'");
        }
    }
    switch (c.kind) {
    case ExperimentKind::Region: c.region = read_region(r.child("region")); break;
    case ExperimentKind::Tradeoff: c.tradeoff = read_tradeoff(r.child("tradeoff")); break;
    case ExperimentKind::Simulate: c.simulate = read_simulate(r.child("simulate")); break;
    case ExperimentKind::Schedule: c.schedule = read_schedule(r.child("schedule")); break;
    case ExperimentKind::Validate:
        c.validate = r.has("validate") ? read_validate(r.child("validate")) : ValidateConfig{};
        break;
    }
    r.done();
    return c;
}

// ---------------------------------------------------------------------------
// Structs to JSON
// ---------------------------------------------------------------------------

json grid_json(const GridSpec& g) {
    return {{"lo", g.lo}, {"hi", g.hi}, {"n", g.n}, {"scale", g.log ? "log" : "linear"}};
}

json source_json(const SourceModel& s) {
    if (const auto* m = std::get_if<GaussianIidSourceModel>(&s)) {
        return {{"model", "gaussian_iid"}, {"d_max", m->d_max}, {"ts_max", m->ts_max}, {"zeta", m->zeta},
                {"eta", m->eta}};
    }
    const auto& m = std::get<GaussMarkovSourceModel>(s);
    return {{"model", "gauss_markov"}, {"d_max", m.d_max}, {"zeta", m.zeta}, {"nu", m.nu}};
}

json geometry_json(const SlotGeometry& g) {
    return {{"channel_uses", g.channel_uses_per_slot()}, {"source_samples", g.source_samples_per_slot()}};
}

json law_json(const std::vector<double>& support, const std::vector<double>& pmf) {
    return {{"support", support}, {"pmf", pmf}};
}

json sensor_json(const SensorSpec& s) {
    json e;
    if (const auto* u = std::get_if<UniformEnergy>(&s.env.energy)) {
        e = {{"distribution", "uniform"}, {"lo", u->lo}, {"hi", u->hi}};
    } else {
        const auto& d = std::get<DiscreteEnergy>(s.env.energy);
        e = {{"distribution", "discrete"}, {"values", d.values}, {"probs", d.probs}};
    }
    return {{"source", source_json(s.source)},
            {"geometry", geometry_json(s.geometry)},
            {"energy", e},
            {"q", law_json(s.env.q_support, s.env.q_pmf)},
            {"h", law_json(s.env.h_support, s.env.h_pmf)}};
}

json discrete_json(const DiscreteSpec& s) {
    return {{"queue_max", s.queue_max},
            {"battery_max", s.battery_max},
            {"energy", {{"values", s.energy_values}, {"probs", s.energy_pmf}}},
            {"q", law_json(s.q_support, s.q_pmf)},
            {"h", law_json(s.h_support, s.h_pmf)},
            {"d_levels", s.d_levels},
            {"ts_levels", s.ts_levels},
            {"tt_levels", s.tt_levels},
            {"gamma", s.gamma},
            {"lambda", s.lambda},
            {"source", source_json(s.source)},
            {"geometry", geometry_json(s.geometry)}};
}

// ---------------------------------------------------------------------------
// JSON to YAML
// ---------------------------------------------------------------------------

void emit(YAML::Emitter& out, const json& v) {
    switch (v.type()) {
    case json::value_t::object:
        out << YAML::BeginMap;
        for (const auto& [key, value] : v.items()) {
            out << YAML::Key << key << YAML::Value;
            emit(out, value);
        }
        out << YAML::EndMap;
        break;
    case json::value_t::array: {
        const bool flat = std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_primitive(); });
        if (flat) out << YAML::Flow;
        out << YAML::BeginSeq;
        for (const auto& x : v) emit(out, x);
        out << YAML::EndSeq;
        break;
    }
    case json::value_t::string: out << YAML::DoubleQuoted << v.get<std::string>(); break;
    case json::value_t::boolean: out << (v.get<bool>() ? "true" : "false"); break;
    case json::value_t::number_unsigned: out << std::to_string(v.get<std::uint64_t>()); break;
    case json::value_t::number_integer: out << std::to_string(v.get<std::int64_t>()); break;
    case json::value_t::number_float: out << csv::format(v.get<double>()); break;
    default: out << YAML::Null; break;
    }
}

} // namespace

std::string_view to_string(ExperimentKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::vector<double> GridSpec::values() const { return log ? log_grid(lo, hi, n) : linear_grid(lo, hi, n); }

ExperimentConfig parse_config(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        json root;
        try {
            root = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON: ") + e.what());
        }
        return read_config(root, nullptr);
    }
    YAML::Node node;
    try {
        node = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError("invalid YAML (line " + std::to_string(e.mark.line + 1) + "): " + e.msg);
    }
    LineMap lines;
    const json root = yaml_to_json(node, "", lines);
    return read_config(root, &lines);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

json to_json(const ExperimentConfig& c) {
    json j = {{"kind", std::string(to_string(c.kind))}, {"seed", c.seed}, {"output", c.output}};
    if (c.region) {
        const auto& r = *c.region;
        json classes = json::array();
        for (auto cls : r.classes) classes.push_back(std::string(to_string(cls)));
        j["region"] = {{"d_bar", r.d_bar},
                       {"axes", r.axes == AxisKind::Snr ? "snr" : "probability"},
                       {"axis1", grid_json(r.axis1)},
                       {"axis2", grid_json(r.axis2)},
                       {"classes", classes},
                       {"sensor", sensor_json(r.sensor)}};
    }
    if (c.tradeoff) {
        const auto& t = *c.tradeoff;
        j["tradeoff"] = {{"mdp", discrete_json(t.spec)},
                         {"energy_worst", t.energy_worst},
                         {"gamma", grid_json(t.gamma)},
                         {"joint", t.joint},
                         {"separable", t.separable}};
    }
    if (c.simulate) {
        const auto& s = *c.simulate;
        j["simulate"] = {{"policy", std::string(to_string(s.policy))},
                         {"d_bar", s.d_bar},
                         {"horizon", s.horizon},
                         {"trace_rows", s.trace_rows},
                         {"sensor", sensor_json(s.sensor)}};
    }
    if (c.schedule) {
        const auto& s = *c.schedule;
        json sensors = json::array();
        for (const auto& x : s.sensors) sensors.push_back(sensor_json(x));
        json worst = json::array();
        for (const auto& [pq, ph] : s.sensor2_worst) worst.push_back({pq, ph});
        j["schedule"] = {{"d_bar", s.d_bar},         {"sensors", sensors},
                         {"sensor2_worst", worst},   {"axis1", grid_json(s.axis1)},
                         {"axis2", grid_json(s.axis2)}, {"beta_levels", s.beta_levels}};
    }
    if (c.validate) {
        const auto& v = *c.validate;
        j["validate"] = {{"presets", v.presets}, {"resolution", v.resolution}, {"horizon", v.horizon}};
    }
    return j;
}

std::string to_yaml(const ExperimentConfig& config) {
    YAML::Emitter out;
    emit(out, to_json(config));
    return std::string(out.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
    nlohmann::json j = to_json(config);
    j.erase("output");
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : detail::preset_table()) out.emplace_back(p.name);
    return out;
}

std::string_view preset_text(std::string_view name) {
    for (const auto& p : detail::preset_table()) {
        if (p.name == name) return p.text;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig load_preset(std::string_view name) {
    try {
        return parse_config(preset_text(name));
    } catch (const ConfigError& e) {
        throw ConfigError("preset " + std::string(name) + ": " + e.what());
    }
}

RegionSetup region_setup(const RegionConfig& r) {
    RegionSetup s;
    s.base = r.sensor;
    s.kind = r.axes;
    s.axis1 = r.axis1.values();
    s.axis2 = r.axis2.values();
    s.d_bar = r.d_bar;
    return s;
}

std::vector<std::pair<std::string, DiscreteSpec>> tradeoff_cases(const TradeoffConfig& t) {
    std::vector<std::pair<std::string, DiscreteSpec>> out;
    if (t.energy_worst.empty()) {
        out.emplace_back("", t.spec);
        return out;
    }
    for (double p : t.energy_worst) {
        DiscreteSpec s = t.spec;
        s.energy_pmf = {p, 1.0 - p};
        out.emplace_back("_pw" + csv::format(p), s);
    }
    return out;
}

TwoSensorSetup schedule_setup(const ScheduleConfig& c, std::size_t k) {
    TwoSensorSetup s;
    s.base.sensors = c.sensors;
    s.base.d_bar = c.d_bar;
    if (k < c.sensor2_worst.size()) {
        auto& env = s.base.sensors[1].env;
        env.q_pmf = {c.sensor2_worst[k].first, 1.0 - c.sensor2_worst[k].first};
        env.h_pmf = {c.sensor2_worst[k].second, 1.0 - c.sensor2_worst[k].second};
    }
    s.axis1 = c.axis1.values();
    s.axis2 = c.axis2.values();
    return s;
}

} // namespace ehsc
