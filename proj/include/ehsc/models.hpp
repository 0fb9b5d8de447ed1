// Rate-distortion-energy source models, the AWGN channel rate, analog
// transmission MMSE and the stochastic environment of a single sensor.
//
// Rates are in bits per slot, energies in Joule per channel use, and all
// logarithms are base 2.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ehsc/errors.hpp"

namespace ehsc {

/// N channel uses and M source samples per slot; b = N / M.
class SlotGeometry {
public:
    SlotGeometry(int channel_uses_per_slot, int source_samples_per_slot);

    int channel_uses_per_slot() const { return channel_uses_; }
    int source_samples_per_slot() const { return source_samples_; }
    double bandwidth_ratio() const { return ratio_; }

private:
    int channel_uses_;
    int source_samples_;
    double ratio_;
};

/// Example-1 model: i.i.d. Gaussian source observed through AWGN, with a
/// processor-dependent rate-energy multiplier.
struct GaussianIidSourceModel {
    double d_max = 1.0;
    double ts_max = 1.0;
    double zeta = 1.0;
    double eta = 1.5;

    void validate() const;
};

/// Example-2 model: first-order Gauss-Markov source with transform coding
/// whose size scales with the compression energy.
struct GaussMarkovSourceModel {
    double d_max = 1.0;
    double zeta = 1.0;
    double nu = 0.1;

    void validate() const;
};

using SourceModel = std::variant<GaussianIidSourceModel, GaussMarkovSourceModel>;

double source_d_max(const SourceModel& model);

struct UniformEnergy {
    double lo = 0.0;
    double hi = 2.0;
};

struct DiscreteEnergy {
    std::vector<double> values;
    std::vector<double> probs;
};

using EnergyDistribution = std::variant<UniformEnergy, DiscreteEnergy>;

/// Observation, channel and harvesting laws. Q, H and E are drawn
/// independently of each other and i.i.d. across slots.
struct Environment {
    std::vector<double> q_support;
    std::vector<double> q_pmf;
    std::vector<double> h_support;
    std::vector<double> h_pmf;
    EnergyDistribution energy = UniformEnergy{};

    void validate() const;
    double mean_energy() const;
    std::size_t n_q() const { return q_support.size(); }
    std::size_t n_h() const { return h_support.size(); }
};

/// Full static description of one sensor.
struct SensorSpec {
    SourceModel source = GaussianIidSourceModel{};
    SlotGeometry geometry{100, 100};
    Environment env;

    void validate() const;
};

// ---------------------------------------------------------------------------
// Rate functions (throwing; preconditions checked)
// ---------------------------------------------------------------------------

/// Estimation MMSE of the Example-1 observation, (1/d_max + q)^-1.
double estimation_mmse(double d_max, double q);

double source_rate_gaussian_iid(const GaussianIidSourceModel& model, const SlotGeometry& geom, double d,
                                double ts, double q);

double source_rate_gauss_markov(const GaussMarkovSourceModel& model, const SlotGeometry& geom, double d,
                                double ts, double q);

double source_rate(const SourceModel& model, const SlotGeometry& geom, double d, double ts, double q);

double channel_rate_awgn(const SlotGeometry& geom, double h, double tt);

/// Receiver MMSE of uncoded (analog) transmission.
double analog_mmse(const SlotGeometry& geom, double tt, double q, double h, double d_max);

/// Distortions with finite nonnegative rate: the interval (lo, hi].
struct DistortionRange {
    double lo;
    double hi;
};

DistortionRange distortion_bounds(const SourceModel& model, const SlotGeometry& geom, double q, double ts);

// ---------------------------------------------------------------------------
// Non-throwing evaluators used by the optimizers: +inf outside the domain.
// ---------------------------------------------------------------------------

namespace rate {

/// log2((d_max - m)/(d - m)) clamped at 0; +inf for d <= m.
double gaussian_iid_distortion_term(double d_max, double mmse, double d) noexcept;

/// zeta * max[(b ts / ts_max)^(-1/eta), 1]; +inf for ts <= 0.
double gaussian_iid_energy_term(const GaussianIidSourceModel& model, double b, double ts) noexcept;

/// Source rate or +inf; a zero distortion term yields 0 bits for any ts.
double source_or_inf(const SourceModel& model, const SlotGeometry& geom, double d, double ts, double q) noexcept;

double channel(const SlotGeometry& geom, double h, double tt) noexcept;

double analog(const SlotGeometry& geom, double tt, double q, double h, double d_max) noexcept;

} // namespace rate

// ---------------------------------------------------------------------------
// Expectations over the harvesting law
// ---------------------------------------------------------------------------

/// E[ f(E) ] using exact sums for discrete laws and 64-point Gauss-Legendre
/// for the uniform law.
template <class F> double expect_over_energy(const EnergyDistribution& dist, F&& f);

/// E[ zeta * max[(b * scale * E / ts_max)^(-1/eta), 1] ], closed form for the
/// uniform law.
double expected_gaussian_iid_energy_term(const GaussianIidSourceModel& model, double b, double scale,
                                         const EnergyDistribution& dist);

/// E[ g^h(scale * E) ], closed form for the uniform law.
double expected_channel_rate(const SlotGeometry& geom, double h, double scale, const EnergyDistribution& dist);

/// E[ f^q(d, scale * E) ].
double expected_source_rate(const SourceModel& model, const SlotGeometry& geom, double d, double scale, double q,
                            const EnergyDistribution& dist);

} // namespace ehsc

#include "ehsc/quadrature.hpp"

namespace ehsc {

template <class F> double expect_over_energy(const EnergyDistribution& dist, F&& f) {
    if (const auto* u = std::get_if<UniformEnergy>(&dist)) {
        if (u->hi == u->lo) return f(u->lo);
        return quadrature::integrate(f, u->lo, u->hi) / (u->hi - u->lo);
    }
    const auto& d = std::get<DiscreteEnergy>(dist);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (d.probs[i] > 0.0) acc += d.probs[i] * f(d.values[i]);
    }
    return acc;
}

} // namespace ehsc
