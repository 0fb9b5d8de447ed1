#include "ehsc/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "ehsc/exact.hpp"

namespace ehsc {

namespace {

double clamp0(double x) { return x > 0.0 ? x : 0.0; }

double lookup(const std::vector<double>& map, std::size_t idx, const char* what) {
    if (idx >= map.size()) throw MissingState(std::string(what) + " map does not cover state " + std::to_string(idx));
    return map[idx];
}

double lookup(const QhTable& table, std::size_t q, std::size_t h, const char* what) {
    if (!table.covers(q, h)) {
        throw MissingState(std::string(what) + " table does not cover state (" + std::to_string(q) + ", " +
                           std::to_string(h) + ")");
    }
    return table.at(q, h);
}

// Shrinks tt (then ts) by ulps until ts + tt <= budget holds exactly.
Action fit(Action a, double budget) {
    budget = clamp0(budget);
    a.ts = std::min(clamp0(a.ts), budget);
    a.tt = std::min(clamp0(a.tt), clamp0(budget - a.ts));
    while (!exact::sum_at_most(a.ts, a.tt, budget)) {
        if (a.tt > 0.0) {
            a.tt = clamp0(std::nextafter(a.tt, 0.0));
        } else {
            a.ts = clamp0(std::nextafter(a.ts, 0.0));
        }
    }
    return a;
}

void check_alpha_open(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvariantViolation("alpha must lie in (0, 1)");
}

void check_unit(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvariantViolation("alpha must lie in [0, 1]");
}

void check_nonneg(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!(x >= 0.0)) throw InvariantViolation(std::string(what) + " must be nonnegative");
    }
}

void check_size(const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) throw InvariantViolation(std::string(what) + " does not match the support size");
}

void check_table(const QhTable& t, std::size_t n_q, std::size_t n_h, const char* what) {
    if (t.n_q() != n_q || t.n_h() != n_h) throw InvariantViolation(std::string(what) + " has the wrong shape");
}

} // namespace

QhTable::QhTable(std::size_t n_q, std::size_t n_h, std::vector<double> values)
    : n_q_(n_q), n_h_(n_h), values_(std::move(values)) {
    if (values_.size() != n_q * n_h) throw InvariantViolation("QhTable size mismatch");
}

PolicyClass policy_class(const PolicyParams& params) { return static_cast<PolicyClass>(params.index()); }

namespace {
constexpr std::array<std::string_view, 7> kClassNames{"do", "greedy", "greedy_fixed", "hybrid1",
                                                      "hybrid2", "analog", "analog_greedy"};
}

std::string_view to_string(PolicyClass cls) { return kClassNames[static_cast<std::size_t>(cls)]; }

std::optional<PolicyClass> policy_class_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kClassNames.size(); ++i) {
        if (kClassNames[i] == name) return static_cast<PolicyClass>(i);
    }
    return std::nullopt;
}

bool is_analog(PolicyClass cls) { return cls == PolicyClass::Analog || cls == PolicyClass::AnalogGreedy; }

Action decide(const PolicyParams& params, const SlotState& s, double arrival) {
    const double avail = s.energy;
    Action a;
    if (const auto* p = std::get_if<DoParams>(&params)) {
        a.d = lookup(p->d_per_q, s.q, "distortion");
        a.ts = clamp0(std::min((1.0 - p->alpha) * avail - p->epsilon, lookup(p->ts_per_q, s.q, "source energy")));
        a.tt = clamp0(std::min(p->alpha * avail - p->epsilon, lookup(p->tt_per_h, s.h, "transmit energy")));
    } else if (const auto* p = std::get_if<GreedyParams>(&params)) {
        const double alpha = lookup(p->alpha_per_qh, s.q, s.h, "alpha");
        a.d = lookup(p->d_per_qh, s.q, s.h, "distortion");
        a.ts = alpha * arrival;
        a.tt = arrival - a.ts;
    } else if (const auto* p = std::get_if<GreedyFixedParams>(&params)) {
        a.d = lookup(p->d_per_qh, s.q, s.h, "distortion");
        a.ts = p->alpha * arrival;
        a.tt = arrival - a.ts;
    } else if (const auto* p = std::get_if<Hybrid1Params>(&params)) {
        a.d = lookup(p->d_per_q, s.q, "distortion");
        a.ts = (1.0 - p->alpha) * arrival;
        a.tt = clamp0(std::min(p->alpha * avail, lookup(p->tt_per_h, s.h, "transmit energy")));
    } else if (const auto* p = std::get_if<Hybrid2Params>(&params)) {
        a.d = lookup(p->d_per_q, s.q, "distortion");
        a.ts = clamp0(std::min((1.0 - p->alpha) * avail, lookup(p->ts_per_q, s.q, "source energy")));
        a.tt = p->alpha * arrival;
    } else if (const auto* p = std::get_if<AnalogParams>(&params)) {
        a.tt = clamp0(std::min(avail - p->epsilon, lookup(p->tt_per_qh, s.q, s.h, "transmit energy")));
    } else {
        a.tt = arrival;
    }
    return fit(a, avail);
}

void validate_params(const PolicyParams& params, std::size_t n_q, std::size_t n_h) {
    if (const auto* p = std::get_if<DoParams>(&params)) {
        check_size(p->d_per_q, n_q, "d_per_q");
        check_size(p->ts_per_q, n_q, "ts_per_q");
        check_size(p->tt_per_h, n_h, "tt_per_h");
        check_nonneg(p->ts_per_q, "ts_per_q");
        check_nonneg(p->tt_per_h, "tt_per_h");
        check_alpha_open(p->alpha);
        if (!(p->epsilon >= 0.0)) throw InvariantViolation("epsilon must be nonnegative");
    } else if (const auto* p = std::get_if<GreedyParams>(&params)) {
        check_table(p->d_per_qh, n_q, n_h, "d_per_qh");
        check_table(p->alpha_per_qh, n_q, n_h, "alpha_per_qh");
        for (double a : p->alpha_per_qh.values()) check_unit(a);
    } else if (const auto* p = std::get_if<GreedyFixedParams>(&params)) {
        check_table(p->d_per_qh, n_q, n_h, "d_per_qh");
        check_unit(p->alpha);
    } else if (const auto* p = std::get_if<Hybrid1Params>(&params)) {
        check_size(p->d_per_q, n_q, "d_per_q");
        check_size(p->tt_per_h, n_h, "tt_per_h");
        check_nonneg(p->tt_per_h, "tt_per_h");
        check_alpha_open(p->alpha);
    } else if (const auto* p = std::get_if<Hybrid2Params>(&params)) {
        check_size(p->d_per_q, n_q, "d_per_q");
        check_size(p->ts_per_q, n_q, "ts_per_q");
        check_nonneg(p->ts_per_q, "ts_per_q");
        check_alpha_open(p->alpha);
    } else if (const auto* p = std::get_if<AnalogParams>(&params)) {
        check_table(p->tt_per_qh, n_q, n_h, "tt_per_qh");
        check_nonneg(p->tt_per_qh.values(), "tt_per_qh");
        if (!(p->epsilon >= 0.0)) throw InvariantViolation("epsilon must be nonnegative");
    }
}

} // namespace ehsc
