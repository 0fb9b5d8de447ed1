// Stationary energy-management policy classes and the per-slot decision rule.
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "ehsc/errors.hpp"

namespace ehsc {

/// Dynamic per-slot state. q and h index the environment supports.
struct SlotState {
    double energy = 0.0;     // available energy, arrivals of this slot included
    double queue_bits = 0.0; // data queue length
    std::size_t q = 0;
    std::size_t h = 0;
};

/// Per-slot decision. `d` is empty for analog transmission, whose
/// distortion follows from the receiver MMSE.
struct Action {
    std::optional<double> d;
    double ts = 0.0;
    double tt = 0.0;
};

/// Values indexed by (observation state, channel state), row-major in q.
class QhTable {
public:
    QhTable() = default;
    QhTable(std::size_t n_q, std::size_t n_h, double fill = 0.0) : n_q_(n_q), n_h_(n_h), values_(n_q * n_h, fill) {}
    QhTable(std::size_t n_q, std::size_t n_h, std::vector<double> values);

    std::size_t n_q() const { return n_q_; }
    std::size_t n_h() const { return n_h_; }
    double& at(std::size_t q, std::size_t h) { return values_[q * n_h_ + h]; }
    double at(std::size_t q, std::size_t h) const { return values_[q * n_h_ + h]; }
    bool covers(std::size_t q, std::size_t h) const { return q < n_q_ && h < n_h_; }
    const std::vector<double>& values() const { return values_; }

    friend bool operator==(const QhTable&, const QhTable&) = default;

private:
    std::size_t n_q_ = 0;
    std::size_t n_h_ = 0;
    std::vector<double> values_;
};

// alpha is the channel share of the buffer in DoParams and the hybrids,
// and the source share of each arrival in the greedy classes.

struct DoParams {
    std::vector<double> d_per_q;
    std::vector<double> ts_per_q;
    std::vector<double> tt_per_h;
    double alpha = 0.5;
    double epsilon = 1e-3;
    friend bool operator==(const DoParams&, const DoParams&) = default;
};

struct GreedyParams {
    QhTable d_per_qh;
    QhTable alpha_per_qh;
    friend bool operator==(const GreedyParams&, const GreedyParams&) = default;
};

struct GreedyFixedParams {
    QhTable d_per_qh;
    double alpha = 0.5;
    friend bool operator==(const GreedyFixedParams&, const GreedyFixedParams&) = default;
};

/// Buffer used for the channel encoder only.
struct Hybrid1Params {
    std::vector<double> d_per_q;
    std::vector<double> tt_per_h;
    double alpha = 0.5;
    friend bool operator==(const Hybrid1Params&, const Hybrid1Params&) = default;
};

/// Buffer used for the source encoder only.
struct Hybrid2Params {
    std::vector<double> d_per_q;
    std::vector<double> ts_per_q;
    double alpha = 0.5;
    friend bool operator==(const Hybrid2Params&, const Hybrid2Params&) = default;
};

struct AnalogParams {
    QhTable tt_per_qh;
    double epsilon = 1e-3;
    friend bool operator==(const AnalogParams&, const AnalogParams&) = default;
};

struct AnalogGreedyParams {
    friend bool operator==(const AnalogGreedyParams&, const AnalogGreedyParams&) = default;
};

using PolicyParams = std::variant<DoParams, GreedyParams, GreedyFixedParams, Hybrid1Params, Hybrid2Params,
                                  AnalogParams, AnalogGreedyParams>;

enum class PolicyClass { Do, Greedy, GreedyFixed, Hybrid1, Hybrid2, Analog, AnalogGreedy };

PolicyClass policy_class(const PolicyParams& params);
std::string_view to_string(PolicyClass cls);
std::optional<PolicyClass> policy_class_from_string(std::string_view name);
bool is_analog(PolicyClass cls);

/// Default epsilon: 1e-3 of the mean energy arrival.
inline double default_epsilon(double mean_energy) { return 1e-3 * mean_energy; }

/// Maps the current state to an action. `arrival_energy` is this slot's
/// harvest, already included in `state.energy`. The result always satisfies
/// ts + tt <= state.energy in exact arithmetic.
Action decide(const PolicyParams& params, const SlotState& state, double arrival_energy);

/// Throws InvariantViolation when parameter ranges are invalid
/// (alpha, nonnegative energies) or maps do not match the support sizes.
void validate_params(const PolicyParams& params, std::size_t n_q, std::size_t n_h);

} // namespace ehsc
