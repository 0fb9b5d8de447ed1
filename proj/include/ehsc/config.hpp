// Experiment configuration: YAML or JSON text, converted to one JSON tree
// and validated in a single pass. Unknown keys are rejected.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ehsc/mdp.hpp"
#include "ehsc/region.hpp"
#include "ehsc/scheduling.hpp"

namespace ehsc {

enum class ExperimentKind { Region, Tradeoff, Simulate, Schedule, Validate };

std::string_view to_string(ExperimentKind kind);

/// n points from lo to hi, log- or linearly spaced.
struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 21;
    bool log = false;

    std::vector<double> values() const;
};

struct RegionConfig {
    SensorSpec sensor;
    AxisKind axes = AxisKind::Snr;
    GridSpec axis1;
    GridSpec axis2;
    double d_bar = 0.8;
    std::vector<PolicyClass> classes;
};

struct TradeoffConfig {
    DiscreteSpec spec;
    /// Probabilities of the lower energy arrival; one curve pair each.
    std::vector<double> energy_worst{0.1, 0.9};
    GridSpec gamma{0.0, 1.0, 21, false};
    bool joint = true;
    bool separable = true;
};

struct SimulateConfig {
    SensorSpec sensor;
    PolicyClass policy = PolicyClass::Do;
    double d_bar = 0.8;
    std::size_t horizon = 100000;
    std::size_t trace_rows = 10000; // leading slots written to trace.csv
};

struct ScheduleConfig {
    std::vector<SensorSpec> sensors;
    std::vector<double> d_bar;
    /// Fixed (p_w^q, p_w^h) of sensor 2, one sweep per entry.
    std::vector<std::pair<double, double>> sensor2_worst;
    GridSpec axis1{0.0, 1.0, 21, false};
    GridSpec axis2{0.0, 1.0, 21, false};
    std::size_t beta_levels = 11;
};

struct ValidateConfig {
    std::vector<std::string> presets; // empty means every shipped preset
    std::size_t resolution = 6;
    std::size_t horizon = 20000;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Region;
    std::uint64_t seed = 1;
    std::string output = "out";
    std::optional<RegionConfig> region;
    std::optional<TradeoffConfig> tradeoff;
    std::optional<SimulateConfig> simulate;
    std::optional<ScheduleConfig> schedule;
    std::optional<ValidateConfig> validate;
};

/// Throws ConfigError naming the offending key (and its line for YAML).
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON form; parse_config(to_json(c).dump()) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);
std::string to_yaml(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical JSON without the output directory, as
/// 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Shipped presets, compiled in from presets/*.yaml.
std::vector<std::string> preset_names();
ExperimentConfig load_preset(std::string_view name);
std::string_view preset_text(std::string_view name);

/// Library inputs described by each section.
RegionSetup region_setup(const RegionConfig& r);
/// One spec per energy_worst entry, tagged "_pw<p>"; a single untagged spec
/// when the list is empty.
std::vector<std::pair<std::string, DiscreteSpec>> tradeoff_cases(const TradeoffConfig& t);
/// Sweep setup with sensor 2 fixed at sensor2_worst[k].
TwoSensorSetup schedule_setup(const ScheduleConfig& c, std::size_t k);

} // namespace ehsc
