#include "ehsc/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace ehsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log2_ratio_clamped(double num, double den) { return std::max(std::log2(num / den), 0.0); }

void check_pmf(const std::vector<double>& support, const std::vector<double>& pmf, const char* what) {
    if (support.empty()) throw DomainError(std::string(what) + " support is empty");
    if (support.size() != pmf.size()) throw DomainError(std::string(what) + " pmf size does not match support");
    double total = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0)) throw DomainError(std::string(what) + " pmf has a negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError(std::string(what) + " pmf does not sum to 1");
}

// (1+u) ln(1+u) - u, accurate for small u.
double xlog1p_minus(double u) {
    if (std::abs(u) < 1e-3) {
        double term = u * u;
        double acc = 0.0;
        for (int n = 2; n < 9; ++n) {
            acc += ((n % 2 == 0) ? 1.0 : -1.0) * term / (n * (n - 1.0));
            term *= u;
        }
        return acc;
    }
    return (1.0 + u) * std::log1p(u) - u;
}

} // namespace

SlotGeometry::SlotGeometry(int channel_uses_per_slot, int source_samples_per_slot)
    : channel_uses_(channel_uses_per_slot), source_samples_(source_samples_per_slot) {
    if (channel_uses_ <= 0 || source_samples_ <= 0) throw DomainError("slot geometry needs positive N and M");
    ratio_ = static_cast<double>(channel_uses_) / static_cast<double>(source_samples_);
}

void GaussianIidSourceModel::validate() const {
    if (!(d_max > 0.0)) throw DomainError("d_max must be positive");
    if (!(ts_max > 0.0)) throw DomainError("ts_max must be positive");
    if (!(zeta >= 1.0)) throw DomainError("zeta must be at least 1");
    if (!(eta >= 1.0 && eta <= 3.0)) throw DomainError("eta must lie in [1, 3]");
}

void GaussMarkovSourceModel::validate() const {
    if (!(d_max > 0.0)) throw DomainError("d_max must be positive");
    if (!(zeta >= 1.0)) throw DomainError("zeta must be at least 1");
    if (!(nu >= 0.0)) throw DomainError("nu must be nonnegative");
}

double source_d_max(const SourceModel& model) {
    return std::visit([](const auto& m) { return m.d_max; }, model);
}

void Environment::validate() const {
    check_pmf(q_support, q_pmf, "observation");
    check_pmf(h_support, h_pmf, "channel");
    for (double h : h_support) {
        if (!(h >= 0.0)) throw DomainError("channel SNR must be nonnegative");
    }
    if (const auto* u = std::get_if<UniformEnergy>(&energy)) {
        if (!(u->lo >= 0.0) || !(u->hi >= u->lo)) throw DomainError("uniform energy law needs 0 <= lo <= hi");
    } else {
        const auto& d = std::get<DiscreteEnergy>(energy);
        check_pmf(d.values, d.probs, "energy");
        for (double e : d.values) {
            if (!(e >= 0.0)) throw DomainError("energy values must be nonnegative");
        }
    }
}

double Environment::mean_energy() const {
    if (const auto* u = std::get_if<UniformEnergy>(&energy)) return 0.5 * (u->lo + u->hi);
    const auto& d = std::get<DiscreteEnergy>(energy);
    return std::inner_product(d.values.begin(), d.values.end(), d.probs.begin(), 0.0);
}

void SensorSpec::validate() const {
    std::visit([](const auto& m) { m.validate(); }, source);
    env.validate();
    const bool markov = std::holds_alternative<GaussMarkovSourceModel>(source);
    for (double q : env.q_support) {
        if (markov && !(q >= 0.0 && q < 1.0)) throw DomainError("correlation coefficient must lie in [0, 1)");
        if (!markov && !(q >= 0.0)) throw DomainError("observation SNR must be nonnegative");
    }
}

double estimation_mmse(double d_max, double q) { return 1.0 / (1.0 / d_max + q); }

namespace {

double markov_bound(const GaussMarkovSourceModel& m, double b, double ts, double q) {
    return m.zeta * m.d_max * std::pow(1.0 - q * q, (ts - m.nu / b) / ts);
}

// Exactly zero from the positivity bound upwards.
double markov_bits_per_sample(const GaussMarkovSourceModel& m, double b, double d, double ts, double q) {
    if (d >= markov_bound(m, b, ts, q)) return 0.0;
    const double v = std::log2(m.zeta * m.d_max / d) + std::log2(1.0 - q * q) * (ts - m.nu / b) / ts;
    return std::max(v, 0.0);
}

} // namespace

double source_rate_gaussian_iid(const GaussianIidSourceModel& model, const SlotGeometry& geom, double d, double ts,
                                double q) {
    model.validate();
    if (!(q >= 0.0)) throw DomainError("observation SNR must be nonnegative");
    if (!(ts >= 0.0)) throw DomainError("source energy must be nonnegative");
    const double mmse = estimation_mmse(model.d_max, q);
    if (!(d > mmse)) throw DomainError("distortion at or below the estimation MMSE");
    if (d > model.d_max) throw DomainError("distortion above d_max");
    if (ts == 0.0) throw RateInfinite("zero source energy");
    const double f1 = log2_ratio_clamped(model.d_max - mmse, d - mmse);
    const double f2 = rate::gaussian_iid_energy_term(model, geom.bandwidth_ratio(), ts);
    return geom.source_samples_per_slot() * f1 * f2;
}

double source_rate_gauss_markov(const GaussMarkovSourceModel& model, const SlotGeometry& geom, double d, double ts,
                                double q) {
    model.validate();
    const double b = geom.bandwidth_ratio();
    if (!(q >= 0.0 && q < 1.0)) throw DomainError("correlation coefficient must lie in [0, 1)");
    if (!(ts > model.nu / b)) throw DomainError("source energy at or below nu / b");
    if (!(d > 0.0)) throw DomainError("distortion must be positive");
    return geom.source_samples_per_slot() * markov_bits_per_sample(model, b, d, ts, q);
}

double source_rate(const SourceModel& model, const SlotGeometry& geom, double d, double ts, double q) {
    if (const auto* iid = std::get_if<GaussianIidSourceModel>(&model)) {
        return source_rate_gaussian_iid(*iid, geom, d, ts, q);
    }
    return source_rate_gauss_markov(std::get<GaussMarkovSourceModel>(model), geom, d, ts, q);
}

double channel_rate_awgn(const SlotGeometry& geom, double h, double tt) {
    if (!(h >= 0.0) || !(tt >= 0.0)) throw DomainError("channel rate needs h >= 0 and tt >= 0");
    return rate::channel(geom, h, tt);
}

double analog_mmse(const SlotGeometry& geom, double tt, double q, double h, double d_max) {
    if (!(tt >= 0.0) || !(q > 0.0) || !(h >= 0.0) || !(d_max > 0.0)) {
        throw DomainError("analog MMSE needs tt >= 0, q > 0, h >= 0, d_max > 0");
    }
    return rate::analog(geom, tt, q, h, d_max);
}

DistortionRange distortion_bounds(const SourceModel& model, const SlotGeometry& geom, double q, double ts) {
    if (const auto* iid = std::get_if<GaussianIidSourceModel>(&model)) {
        if (!(ts > 0.0)) throw DomainError("source energy must be positive");
        if (!(q >= 0.0)) throw DomainError("observation SNR must be nonnegative");
        return {estimation_mmse(iid->d_max, q), iid->d_max};
    }
    const auto& gm = std::get<GaussMarkovSourceModel>(model);
    const double b = geom.bandwidth_ratio();
    if (!(ts > gm.nu / b)) throw DomainError("source energy at or below nu / b");
    if (!(q >= 0.0 && q < 1.0)) throw DomainError("correlation coefficient must lie in [0, 1)");
    return {0.0, markov_bound(gm, b, ts, q)};
}

namespace rate {

double gaussian_iid_distortion_term(double d_max, double mmse, double d) noexcept {
    if (!(d > mmse)) return kInf;
    return log2_ratio_clamped(d_max - mmse, d - mmse);
}

double gaussian_iid_energy_term(const GaussianIidSourceModel& model, double b, double ts) noexcept {
    if (!(ts > 0.0)) return kInf;
    return model.zeta * std::max(std::pow(b * ts / model.ts_max, -1.0 / model.eta), 1.0);
}

double source_or_inf(const SourceModel& model, const SlotGeometry& geom, double d, double ts, double q) noexcept {
    const double m = geom.source_samples_per_slot();
    if (const auto* iid = std::get_if<GaussianIidSourceModel>(&model)) {
        const double t1 = gaussian_iid_distortion_term(iid->d_max, estimation_mmse(iid->d_max, q), d);
        if (t1 == 0.0) return 0.0;
        return m * t1 * gaussian_iid_energy_term(*iid, geom.bandwidth_ratio(), ts);
    }
    const auto& gm = std::get<GaussMarkovSourceModel>(model);
    const double floor_ts = gm.nu / geom.bandwidth_ratio();
    if (!(ts > floor_ts) || !(d > 0.0)) return kInf;
    return m * markov_bits_per_sample(gm, geom.bandwidth_ratio(), d, ts, q);
}

double channel(const SlotGeometry& geom, double h, double tt) noexcept {
    return geom.channel_uses_per_slot() * std::log1p(h * tt) / std::numbers::ln2;
}

double analog(const SlotGeometry& geom, double tt, double q, double h, double d_max) noexcept {
    const double b = geom.bandwidth_ratio();
    if (b >= 1.0) return 1.0 / (b * tt * q * h / (b * tt * q + q + 1.0) + 1.0 / d_max);
    return b / (tt * q * h / (tt * q + q + 1.0) + 1.0 / d_max) + (1.0 - b) * d_max;
}

} // namespace rate

double expected_gaussian_iid_energy_term(const GaussianIidSourceModel& model, double b, double scale,
                                         const EnergyDistribution& dist) {
    if (!(scale > 0.0)) return kInf;
    const auto* u = std::get_if<UniformEnergy>(&dist);
    if (u == nullptr || u->hi == u->lo) {
        return expect_over_energy(dist, [&](double e) { return rate::gaussian_iid_energy_term(model, b, scale * e); });
    }
    // (c x)^(-p) below x* = 1/c, flat 1 above.
    const double c = b * scale / model.ts_max;
    const double p = 1.0 / model.eta;
    const double knee = 1.0 / c;
    double integral = std::max(u->hi - std::max(u->lo, knee), 0.0);
    if (u->lo < knee) {
        const double top = std::min(u->hi, knee);
        if (p == 1.0) {
            if (u->lo == 0.0) return kInf;
            integral += (std::log(top) - std::log(u->lo)) / c;
        } else {
            integral += std::pow(c, -p) * (std::pow(top, 1.0 - p) - std::pow(u->lo, 1.0 - p)) / (1.0 - p);
        }
    }
    return model.zeta * integral / (u->hi - u->lo);
}

double expected_channel_rate(const SlotGeometry& geom, double h, double scale, const EnergyDistribution& dist) {
    const auto* u = std::get_if<UniformEnergy>(&dist);
    if (u == nullptr || u->hi == u->lo) {
        return expect_over_energy(dist, [&](double e) { return rate::channel(geom, h, scale * e); });
    }
    const double k = h * scale;
    if (k <= 0.0) return 0.0;
    const double antider = (xlog1p_minus(k * u->hi) - xlog1p_minus(k * u->lo)) / k;
    return geom.channel_uses_per_slot() * antider / (std::numbers::ln2 * (u->hi - u->lo));
}

double expected_source_rate(const SourceModel& model, const SlotGeometry& geom, double d, double scale, double q,
                            const EnergyDistribution& dist) {
    if (const auto* iid = std::get_if<GaussianIidSourceModel>(&model)) {
        const double t1 = rate::gaussian_iid_distortion_term(iid->d_max, estimation_mmse(iid->d_max, q), d);
        if (t1 == 0.0) return 0.0;
        if (t1 == kInf) return kInf;
        return geom.source_samples_per_slot() * t1 *
               expected_gaussian_iid_energy_term(*iid, geom.bandwidth_ratio(), scale, dist);
    }
    return expect_over_energy(dist, [&](double e) { return rate::source_or_inf(model, geom, d, scale * e, q); });
}

} // namespace ehsc
