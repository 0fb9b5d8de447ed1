#include "ehsc/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

namespace ehsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

template <class F> double golden_argmax(F&& f, double lo, double hi, int iters = 80) {
    double a = lo, b = hi;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = f(x1);
        }
    }
    return f1 >= f2 ? x1 : x2;
}

template <class F> double golden_argmin(F&& f, double lo, double hi, int iters = 80) {
    return golden_argmax([&](double x) { return -f(x); }, lo, hi, iters);
}

/// Smallest multiplier lambda >= 0 (to bisection accuracy) with total(lambda)
/// <= target, for total nonincreasing in lambda. Returns nullopt if none.
template <class Total> std::optional<double> multiplier(Total&& total, double target) {
    if (total(0.0) <= target) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (total(hi) > target) {
        hi *= 8.0;
        if (++guard > 400 || !std::isfinite(hi)) return std::nullopt;
    }
    double lo = hi / 8.0;
    if (guard == 0) {
        lo = 1.0;
        while (lo > 1e-300 && total(lo) <= target) lo /= 8.0;
        if (total(lo) <= target) return lo;
        hi = lo * 8.0;
    }
    for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-14; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (total(mid) <= target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

// Source rate as a function of the distortion, other arguments fixed.
struct DistortionCurve {
    enum class Kind { Product, Log, Generic, Infinite } kind = Kind::Infinite;
    double c = 0.0, m = 0.0, top = 0.0; // Product: c * log2((top - m)/(D - m)), zero above top
    double scale = 0.0, a = 0.0;        // Log: scale * (a - log2 D), zero above 2^a
    std::function<double(double)> fn;   // Generic: convex nonincreasing on (m, top]

    double eval(double d) const {
        switch (kind) {
        case Kind::Product: {
            if (!(d > m)) return kInf;
            const double t = std::max(std::log2((top - m) / (d - m)), 0.0);
            return t == 0.0 ? 0.0 : c * t;
        }
        case Kind::Log: return d > 0.0 ? scale * std::max(a - std::log2(d), 0.0) : kInf;
        case Kind::Generic: return fn(d);
        default: return kInf;
        }
    }
    double floor() const { return kind == Kind::Log ? 0.0 : m; }
    double ceiling() const { return kind == Kind::Log ? std::exp2(a) : top; }

    double respond(double nu) const {
        switch (kind) {
        case Kind::Product: {
            if (nu <= 0.0 || !std::isfinite(c)) return top;
            const double d = m + c / (nu * std::numbers::ln2);
            return std::clamp(d, std::nextafter(m, kInf), top);
        }
        case Kind::Log: {
            const double hi = std::exp2(a);
            if (nu <= 0.0) return hi;
            return std::clamp(scale / (nu * std::numbers::ln2), std::numeric_limits<double>::min(), hi);
        }
        case Kind::Generic: {
            if (nu <= 0.0) return top;
            const double lo = m + 1e-12 * (top - m);
            return golden_argmin([&](double d) { return fn(d) + nu * d; }, lo, top, 100);
        }
        default: return top;
        }
    }
};

// Source rate as a function of the compression energy, distortion fixed.
struct EnergyCurve {
    enum class Kind { Power, Markov } kind = Kind::Power;
    // Power: a * max((b T / ts_max)^(-1/eta), 1); T > 0 unless a == 0.
    double a = 0.0, eta = 1.0, k = 1.0, knee = 1.0;
    // Markov: scale * max(c + kk / T, 0) for T >= t_min.
    double scale = 0.0, c = 0.0, kk = 0.0, t_min = 0.0;

    double floor() const { return kind == Kind::Markov ? t_min : 0.0; }

    double respond(double mu) const {
        if (kind == Kind::Power) {
            if (a == 0.0) return 0.0;
            if (!std::isfinite(a)) return knee;
            if (mu <= 0.0) return knee;
            return std::min(std::pow(a * k / (eta * mu), eta / (eta + 1.0)), knee);
        }
        if (kk == 0.0) return t_min;
        const double t_zero = c < 0.0 ? kk / -c : kInf;
        if (t_zero <= t_min) return t_min;
        if (mu <= 0.0) return t_zero;
        return std::clamp(std::sqrt(scale * kk / mu), t_min, t_zero);
    }
};

double probability_sum(const std::vector<double>& p, const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) acc += p[i] * x[i];
    }
    return acc;
}

struct Cell {
    double weight = 0.0;
    DistortionCurve curve;
};

/// Distortions minimizing sum_c w_c rate_c(D_c) subject to sum_c w_c D_c <= d_bar.
std::optional<std::vector<double>> distortion_step(const std::vector<Cell>& cells, double d_bar) {
    std::vector<double> d(cells.size());
    double floor_sum = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].weight <= 0.0) continue;
        if (cells[i].curve.kind == DistortionCurve::Kind::Infinite) return std::nullopt;
        floor_sum += cells[i].weight * cells[i].curve.floor();
    }
    if (!(floor_sum < d_bar)) return std::nullopt;
    const auto total = [&](double nu) {
        double acc = 0.0;
        for (const auto& c : cells) {
            if (c.weight > 0.0) acc += c.weight * c.curve.respond(nu);
        }
        return acc;
    };
    const auto nu = multiplier(total, d_bar);
    if (!nu) return std::nullopt;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        d[i] = cells[i].weight > 0.0 ? cells[i].curve.respond(*nu) : cells[i].curve.ceiling();
    }
    return d;
}

std::optional<std::vector<double>> energy_step(const std::vector<double>& p, const std::vector<EnergyCurve>& curves,
                                               double budget) {
    double floor_sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) floor_sum += p[i] * curves[i].floor();
    }
    if (floor_sum > budget) return std::nullopt;
    const auto total = [&](double mu) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] > 0.0) acc += p[i] * curves[i].respond(mu);
        }
        return acc;
    };
    const auto mu = multiplier(total, budget);
    if (!mu) return std::nullopt;
    std::vector<double> t(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) t[i] = p[i] > 0.0 ? curves[i].respond(*mu) : curves[i].floor();
    return t;
}

double markov_t_min(const GaussMarkovSourceModel& gm, double b) {
    const double floor_ts = gm.nu / b;
    return floor_ts + std::max(floor_ts, 1.0) * 1e-9;
}

DistortionCurve curve_at_energy(const SensorSpec& spec, double q, double ts) {
    DistortionCurve cv;
    const double m_samples = spec.geometry.source_samples_per_slot();
    const double b = spec.geometry.bandwidth_ratio();
    if (const auto* iid = std::get_if<GaussianIidSourceModel>(&spec.source)) {
        cv.kind = DistortionCurve::Kind::Product;
        cv.c = m_samples * rate::gaussian_iid_energy_term(*iid, b, ts);
        cv.m = estimation_mmse(iid->d_max, q);
        cv.top = iid->d_max;
        return cv;
    }
    const auto& gm = std::get<GaussMarkovSourceModel>(spec.source);
    const double floor_ts = gm.nu / b;
    if (!(ts > floor_ts)) return cv;
    cv.kind = DistortionCurve::Kind::Log;
    cv.scale = m_samples;
    cv.a = std::log2(gm.zeta * gm.d_max) + std::log2(1.0 - q * q) * (ts - floor_ts) / ts;
    return cv;
}

// Curve of E[f(D, scale * E)] in D.
DistortionCurve curve_expected(const SensorSpec& spec, double q, double scale) {
    DistortionCurve cv;
    const double m_samples = spec.geometry.source_samples_per_slot();
    const double b = spec.geometry.bandwidth_ratio();
    if (const auto* iid = std::get_if<GaussianIidSourceModel>(&spec.source)) {
        cv.kind = DistortionCurve::Kind::Product;
        cv.c = m_samples * expected_gaussian_iid_energy_term(*iid, b, scale, spec.env.energy);
        cv.m = estimation_mmse(iid->d_max, q);
        cv.top = iid->d_max;
        return cv;
    }
    const auto& gm = std::get<GaussMarkovSourceModel>(spec.source);
    const double probe = expected_source_rate(spec.source, spec.geometry, gm.zeta * gm.d_max, scale, q, spec.env.energy);
    if (!std::isfinite(probe)) return cv;
    cv.kind = DistortionCurve::Kind::Generic;
    cv.m = 0.0;
    cv.top = gm.zeta * gm.d_max;
    const SensorSpec* s = &spec;
    cv.fn = [s, q, scale](double d) { return expected_source_rate(s->source, s->geometry, d, scale, q, s->env.energy); };
    return cv;
}

EnergyCurve curve_at_distortion(const SensorSpec& spec, double q, double d) {
    EnergyCurve cv;
    const double m_samples = spec.geometry.source_samples_per_slot();
    const double b = spec.geometry.bandwidth_ratio();
    if (const auto* iid = std::get_if<GaussianIidSourceModel>(&spec.source)) {
        cv.kind = EnergyCurve::Kind::Power;
        cv.a = m_samples * iid->zeta *
               rate::gaussian_iid_distortion_term(iid->d_max, estimation_mmse(iid->d_max, q), d);
        cv.eta = iid->eta;
        cv.k = std::pow(iid->ts_max / b, 1.0 / iid->eta);
        cv.knee = iid->ts_max / b;
        return cv;
    }
    const auto& gm = std::get<GaussMarkovSourceModel>(spec.source);
    const double floor_ts = gm.nu / b;
    const double lq = std::log2(1.0 - q * q);
    cv.kind = EnergyCurve::Kind::Markov;
    cv.scale = m_samples;
    cv.c = std::log2(gm.zeta * gm.d_max / d) + lq;
    cv.kk = -lq * floor_ts;
    cv.t_min = markov_t_min(gm, b);
    return cv;
}

double mean_source_rate(const SensorSpec& spec, const std::vector<double>& d, const std::vector<double>& ts) {
    const auto& env = spec.env;
    double acc = 0.0;
    for (std::size_t i = 0; i < env.n_q(); ++i) {
        if (env.q_pmf[i] <= 0.0) continue;
        acc += env.q_pmf[i] * rate::source_or_inf(spec.source, spec.geometry, d[i], ts[i], env.q_support[i]);
    }
    return acc;
}

double mean_channel_rate(const SensorSpec& spec, const std::vector<double>& w, const std::vector<double>& tt) {
    double acc = 0.0;
    for (std::size_t i = 0; i < tt.size(); ++i) {
        if (w[i] > 0.0) acc += w[i] * rate::channel(spec.geometry, spec.env.h_support[i], tt[i]);
    }
    return acc;
}

std::vector<double> channel_allocation(const SensorSpec& spec, double budget) {
    if (!(budget > 0.0)) return std::vector<double>(spec.env.n_h(), 0.0);
    return waterfill_weighted(spec.env.h_support, spec.env.h_pmf, spec.env.h_pmf, budget);
}

/// Grid over alpha followed by golden refinement around the best point.
template <class Eval> double search_alpha(Eval&& eval, std::size_t n, bool include_zero, double lo_bound, double hi_bound) {
    std::vector<double> grid;
    if (include_zero) grid.push_back(0.0);
    for (std::size_t i = 0; i < n; ++i) grid.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    std::size_t best = 0;
    double best_val = -kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = eval(grid[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    if (!std::isfinite(best_val)) return grid[best];
    const double lo = best > 0 ? grid[best - 1] : lo_bound;
    const double hi = best + 1 < grid.size() ? grid[best + 1] : hi_bound;
    const double refined = golden_argmax(eval, lo, hi, 60);
    return eval(refined) > best_val ? refined : grid[best];
}

double backed_off_distortion(double d_bar, const SynthOptions& opt) { return d_bar * (1.0 - opt.budget_backoff); }

double backoff_energy(const SensorSpec& spec, const SynthOptions& opt) {
    return opt.budget_backoff * std::max(spec.env.mean_energy(), 1e-300);
}

FeasibilityReport finish(FeasibilityReport rep, const PolicyParams& params) {
    rep.feasible = margins_feasible(rep.margins);
    if (rep.feasible) rep.witness = params;
    return rep;
}

std::vector<double> cell_weights(const Environment& env) {
    std::vector<double> w(env.n_q() * env.n_h());
    for (std::size_t q = 0; q < env.n_q(); ++q) {
        for (std::size_t h = 0; h < env.n_h(); ++h) w[q * env.n_h() + h] = env.q_pmf[q] * env.h_pmf[h];
    }
    return w;
}

struct GreedyEval {
    double source = kInf;
    double channel = 0.0;
};

// Expected source and channel rates of one greedy cell.
GreedyEval greedy_cell(const SensorSpec& spec, std::size_t q, std::size_t h, double d, double alpha) {
    GreedyEval e;
    e.source = expected_source_rate(spec.source, spec.geometry, d, alpha, spec.env.q_support[q], spec.env.energy);
    e.channel = expected_channel_rate(spec.geometry, spec.env.h_support[h], 1.0 - alpha, spec.env.energy);
    return e;
}

Margins greedy_margins(const SensorSpec& spec, const QhTable& d, const std::vector<double>& alpha, double d_bar) {
    const auto& env = spec.env;
    const auto w = cell_weights(env);
    double src = 0.0, ch = 0.0, dist = 0.0;
    for (std::size_t q = 0; q < env.n_q(); ++q) {
        for (std::size_t h = 0; h < env.n_h(); ++h) {
            const std::size_t c = q * env.n_h() + h;
            if (w[c] <= 0.0) continue;
            const GreedyEval e = greedy_cell(spec, q, h, d.at(q, h), alpha[c]);
            src += w[c] * e.source;
            ch += w[c] * e.channel;
            dist += w[c] * d.at(q, h);
        }
    }
    Margins m;
    m.rate = ch - src;
    m.distortion = d_bar - dist;
    return m;
}

} // namespace

bool margins_feasible(const Margins& m) {
    return m.rate > kRateSlack && m.distortion >= 0.0 && m.energy_source >= 0.0 && m.energy_channel >= 0.0;
}

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

FeasibilityReport check_do_weighted(const DoParams& p, const SensorSpec& spec, double d_bar,
                                    const std::vector<double>& w) {
    validate_params(p, spec.env.n_q(), spec.env.n_h());
    if (w.size() != spec.env.n_h()) throw SpecError("channel weights do not match the channel support");
    const auto& env = spec.env;
    const double mean_e = env.mean_energy();
    FeasibilityReport rep;
    rep.policy_class = PolicyClass::Do;
    rep.margins.rate = mean_channel_rate(spec, w, p.tt_per_h) - mean_source_rate(spec, p.d_per_q, p.ts_per_q);
    rep.margins.distortion = d_bar - probability_sum(env.q_pmf, p.d_per_q);
    rep.margins.energy_source = (1.0 - p.alpha) * mean_e - p.epsilon - probability_sum(env.q_pmf, p.ts_per_q);
    rep.margins.energy_channel = p.alpha * mean_e - p.epsilon - probability_sum(w, p.tt_per_h);
    return finish(rep, p);
}

FeasibilityReport check_do(const DoParams& p, const SensorSpec& spec, double d_bar) {
    return check_do_weighted(p, spec, d_bar, spec.env.h_pmf);
}

FeasibilityReport check_greedy(const GreedyParams& p, const SensorSpec& spec, double d_bar) {
    validate_params(p, spec.env.n_q(), spec.env.n_h());
    FeasibilityReport rep;
    rep.policy_class = PolicyClass::Greedy;
    rep.margins = greedy_margins(spec, p.d_per_qh, p.alpha_per_qh.values(), d_bar);
    return finish(rep, p);
}

FeasibilityReport check_greedy(const GreedyFixedParams& p, const SensorSpec& spec, double d_bar) {
    validate_params(p, spec.env.n_q(), spec.env.n_h());
    FeasibilityReport rep;
    rep.policy_class = PolicyClass::GreedyFixed;
    rep.margins = greedy_margins(spec, p.d_per_qh, std::vector<double>(spec.env.n_q() * spec.env.n_h(), p.alpha),
                                 d_bar);
    return finish(rep, p);
}

FeasibilityReport check_hybrid(const Hybrid1Params& p, const SensorSpec& spec, double d_bar) {
    validate_params(p, spec.env.n_q(), spec.env.n_h());
    const auto& env = spec.env;
    double src = 0.0;
    for (std::size_t q = 0; q < env.n_q(); ++q) {
        if (env.q_pmf[q] <= 0.0) continue;
        src += env.q_pmf[q] * expected_source_rate(spec.source, spec.geometry, p.d_per_q[q], 1.0 - p.alpha,
                                                   env.q_support[q], env.energy);
    }
    FeasibilityReport rep;
    rep.policy_class = PolicyClass::Hybrid1;
    rep.margins.rate = mean_channel_rate(spec, env.h_pmf, p.tt_per_h) - src;
    rep.margins.distortion = d_bar - probability_sum(env.q_pmf, p.d_per_q);
    rep.margins.energy_channel = p.alpha * env.mean_energy() - probability_sum(env.h_pmf, p.tt_per_h);
    return finish(rep, p);
}

FeasibilityReport check_hybrid(const Hybrid2Params& p, const SensorSpec& spec, double d_bar) {
    validate_params(p, spec.env.n_q(), spec.env.n_h());
    const auto& env = spec.env;
    double ch = 0.0;
    for (std::size_t h = 0; h < env.n_h(); ++h) {
        if (env.h_pmf[h] <= 0.0) continue;
        ch += env.h_pmf[h] * expected_channel_rate(spec.geometry, env.h_support[h], p.alpha, env.energy);
    }
    FeasibilityReport rep;
    rep.policy_class = PolicyClass::Hybrid2;
    rep.margins.rate = ch - mean_source_rate(spec, p.d_per_q, p.ts_per_q);
    rep.margins.distortion = d_bar - probability_sum(env.q_pmf, p.d_per_q);
    rep.margins.energy_source = (1.0 - p.alpha) * env.mean_energy() - probability_sum(env.q_pmf, p.ts_per_q);
    return finish(rep, p);
}

FeasibilityReport check_analog(const AnalogParams& p, const SensorSpec& spec, double d_bar) {
    validate_params(p, spec.env.n_q(), spec.env.n_h());
    const auto& env = spec.env;
    const double d_max = source_d_max(spec.source);
    double dist = 0.0, energy = 0.0;
    for (std::size_t q = 0; q < env.n_q(); ++q) {
        for (std::size_t h = 0; h < env.n_h(); ++h) {
            const double w = env.q_pmf[q] * env.h_pmf[h];
            if (w <= 0.0) continue;
            const double t = p.tt_per_qh.at(q, h);
            dist += w * rate::analog(spec.geometry, t, env.q_support[q], env.h_support[h], d_max);
            energy += w * t;
        }
    }
    FeasibilityReport rep;
    rep.policy_class = PolicyClass::Analog;
    rep.margins.distortion = d_bar - dist;
    rep.margins.energy_channel = env.mean_energy() - energy;
    return finish(rep, p);
}

FeasibilityReport check_analog_greedy(const SensorSpec& spec, double d_bar) {
    const auto& env = spec.env;
    const double d_max = source_d_max(spec.source);
    double dist = 0.0;
    for (std::size_t q = 0; q < env.n_q(); ++q) {
        for (std::size_t h = 0; h < env.n_h(); ++h) {
            const double w = env.q_pmf[q] * env.h_pmf[h];
            if (w <= 0.0) continue;
            const double qv = env.q_support[q], hv = env.h_support[h];
            dist += w * expect_over_energy(env.energy,
                                           [&](double e) { return rate::analog(spec.geometry, e, qv, hv, d_max); });
        }
    }
    FeasibilityReport rep;
    rep.policy_class = PolicyClass::AnalogGreedy;
    rep.margins.distortion = d_bar - dist;
    return finish(rep, AnalogGreedyParams{});
}

FeasibilityReport check(const PolicyParams& params, const SensorSpec& spec, double d_bar) {
    return std::visit(
        [&](const auto& p) -> FeasibilityReport {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DoParams>) {
                return check_do(p, spec, d_bar);
            } else if constexpr (std::is_same_v<T, GreedyParams> || std::is_same_v<T, GreedyFixedParams>) {
                return check_greedy(p, spec, d_bar);
            } else if constexpr (std::is_same_v<T, Hybrid1Params> || std::is_same_v<T, Hybrid2Params>) {
                return check_hybrid(p, spec, d_bar);
            } else if constexpr (std::is_same_v<T, AnalogParams>) {
                return check_analog(p, spec, d_bar);
            } else {
                return check_analog_greedy(spec, d_bar);
            }
        },
        params);
}

// ---------------------------------------------------------------------------
// Water-filling
// ---------------------------------------------------------------------------

std::vector<double> waterfill(const std::vector<double>& h_support, const std::vector<double>& h_pmf, double budget) {
    if (!(budget > 0.0)) throw DomainError("water-filling needs a positive budget");
    if (h_support.empty() || h_support.size() != h_pmf.size()) throw DomainError("water-filling needs a matching pmf");
    double inv_max = 0.0;
    for (double h : h_support) {
        if (!(h > 0.0)) throw DomainError("water-filling needs positive channel SNRs");
        inv_max = std::max(inv_max, 1.0 / h);
    }
    const auto level = [&](double mu) {
        double acc = 0.0;
        for (std::size_t i = 0; i < h_support.size(); ++i) acc += h_pmf[i] * std::max(mu - 1.0 / h_support[i], 0.0);
        return acc;
    };
    double lo = 0.0, hi = budget + inv_max;
    while (level(hi) < budget) hi *= 2.0;
    for (int i = 0; i < 300 && hi - lo > 1e-16 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (level(mid) < budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double mu = 0.5 * (lo + hi);
    std::vector<double> t(h_support.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::max(mu - 1.0 / h_support[i], 0.0);
    return t;
}

std::vector<double> waterfill_weighted(const std::vector<double>& h_support, const std::vector<double>& p,
                                       const std::vector<double>& w, double budget) {
    std::vector<double> t(h_support.size(), 0.0);
    if (!(budget > 0.0)) return t;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < h_support.size(); ++i) {
        if (p[i] > 0.0 && w[i] > 0.0 && h_support[i] > 0.0) idx.push_back(i);
    }
    if (idx.empty()) return t;
    // State i opens once the level nu exceeds p_i / (w_i h_i).
    const auto threshold = [&](std::size_t i) { return p[i] / (w[i] * h_support[i]); };
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return threshold(a) < threshold(b); });
    double sum_inv = 0.0, sum_w = 0.0, nu = 0.0;
    std::size_t k = 0;
    for (; k < idx.size(); ++k) {
        sum_inv += p[idx[k]] / h_support[idx[k]];
        sum_w += w[idx[k]];
        nu = (budget + sum_inv) / sum_w;
        if (k + 1 == idx.size() || nu <= threshold(idx[k + 1])) break;
    }
    for (std::size_t j = 0; j <= k; ++j) {
        const std::size_t i = idx[j];
        t[i] = std::max(nu * w[i] / p[i] - 1.0 / h_support[i], 0.0);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Source-side optimization
// ---------------------------------------------------------------------------

SourceAllocation optimize_source(const SensorSpec& spec, double d_bar, double budget, std::size_t max_alternations) {
    const auto& env = spec.env;
    const std::size_t n = env.n_q();
    SourceAllocation best;
    if (budget < 0.0) return best;

    const auto d_step = [&](const std::vector<double>& ts) {
        std::vector<Cell> cells(n);
        for (std::size_t i = 0; i < n; ++i) {
            cells[i].weight = env.q_pmf[i];
            cells[i].curve = curve_at_energy(spec, env.q_support[i], ts[i]);
        }
        return distortion_step(cells, d_bar);
    };
    const auto t_step = [&](const std::vector<double>& d) {
        std::vector<EnergyCurve> curves(n);
        for (std::size_t i = 0; i < n; ++i) curves[i] = curve_at_distortion(spec, env.q_support[i], d[i]);
        return energy_step(env.q_pmf, curves, budget);
    };
    const auto consider = [&](const std::vector<double>& d, const std::vector<double>& ts) {
        const double r = mean_source_rate(spec, d, ts);
        if (r < best.rate) {
            best.d = d;
            best.ts = ts;
            best.rate = r;
        }
        return r;
    };
    const auto alternate = [&](std::vector<double> ts) {
        double prev = kInf;
        for (std::size_t it = 0; it < max_alternations; ++it) {
            const auto d = d_step(ts);
            if (!d) return;
            const auto t = t_step(*d);
            if (!t) {
                consider(*d, ts);
                return;
            }
            ts = *t;
            const double r = consider(*d, ts);
            if (std::abs(prev - r) <= 1e-10 * std::max(1.0, r)) return;
            prev = r;
        }
    };

    // Starting points: even split, then skewed toward either end of the support.
    std::vector<std::vector<double>> starts;
    starts.emplace_back(n, budget);
    if (n > 1) {
        for (int dir = 0; dir < 2; ++dir) {
            std::vector<double> w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = dir == 0 ? 1.0 + static_cast<double>(i) : static_cast<double>(n - i);
            const double norm = probability_sum(env.q_pmf, w);
            for (auto& x : w) x *= budget / norm;
            starts.push_back(w);
        }
    }
    if (std::holds_alternative<GaussMarkovSourceModel>(spec.source)) {
        const double t_min = markov_t_min(std::get<GaussMarkovSourceModel>(spec.source), spec.geometry.bandwidth_ratio());
        for (auto& s : starts) {
            for (auto& x : s) x = std::max(x, t_min);
        }
    }
    for (const auto& s : starts) alternate(s);

    // Distortion-first start: equal share of the distortion budget.
    if (n > 1) {
        std::vector<double> d(n);
        double lo_sum = 0.0, span = 0.0;
        std::vector<double> lo(n), hi(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto cv = curve_at_energy(spec, env.q_support[i], budget > 0.0 ? budget : 1.0);
            lo[i] = cv.floor();
            hi[i] = cv.kind == DistortionCurve::Kind::Infinite ? source_d_max(spec.source) : cv.ceiling();
            lo_sum += env.q_pmf[i] * lo[i];
            span += env.q_pmf[i] * (hi[i] - lo[i]);
        }
        const double theta = span > 0.0 ? std::clamp((d_bar - lo_sum) / span, 0.0, 1.0) : 1.0;
        for (std::size_t i = 0; i < n; ++i) d[i] = std::max(lo[i] + theta * (hi[i] - lo[i]), std::nextafter(lo[i], kInf));
        if (probability_sum(env.q_pmf, d) <= d_bar) {
            if (const auto t = t_step(d)) alternate(*t);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Synthesizers
// ---------------------------------------------------------------------------

DoSearch::DoSearch(const SensorSpec& spec, double d_bar, const SynthOptions& opt)
    : spec_(spec), d_bar_(d_bar), opt_(opt) {
    spec_.validate();
    mean_e_ = spec_.env.mean_energy();
    eps_ = opt_.epsilon_rel * mean_e_;
    delta_ = backoff_energy(spec_, opt_);
    d_target_ = backed_off_distortion(d_bar_, opt_);
    for (std::size_t i = 0; i < opt_.alpha_grid; ++i) {
        grid_.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(opt_.alpha_grid));
        src_.push_back(fresh_source(grid_.back()));
    }
}

SourceAllocation DoSearch::fresh_source(double alpha) const {
    return optimize_source(spec_, d_target_, (1.0 - alpha) * mean_e_ - eps_ - delta_, opt_.max_alternations);
}

SourceAllocation DoSearch::source_at(double alpha) const {
    const auto it = std::lower_bound(grid_.begin(), grid_.end(), alpha);
    if (it != grid_.end() && *it == alpha) return src_[static_cast<std::size_t>(it - grid_.begin())];
    return fresh_source(alpha);
}

double DoSearch::margin(const std::vector<double>& w, double alpha, const SourceAllocation& src,
                        std::vector<double>* tt_out) const {
    const double bc = alpha * mean_e_ - eps_ - delta_;
    std::vector<double> tt = bc > 0.0 ? waterfill_weighted(spec_.env.h_support, w, w, bc)
                                      : std::vector<double>(spec_.env.n_h(), 0.0);
    const double m = mean_channel_rate(spec_, w, tt) - src.rate;
    if (tt_out) *tt_out = std::move(tt);
    return std::isnan(m) ? -kInf : m;
}

double DoSearch::grid_margin(const std::vector<double>& w) const {
    double best = -kInf;
    for (std::size_t i = 0; i < grid_.size(); ++i) best = std::max(best, margin(w, grid_[i], src_[i], nullptr));
    return best;
}

FeasibilityReport DoSearch::synthesize(const std::vector<double>& w) const {
    if (w.size() != spec_.env.n_h()) throw SpecError("channel weights do not match the channel support");
    const double alpha = search_alpha([&](double a) { return margin(w, a, source_at(a), nullptr); }, opt_.alpha_grid,
                                      false, 1e-9, 1.0 - 1e-9);
    const SourceAllocation src = source_at(alpha);
    DoParams p;
    p.alpha = alpha;
    p.epsilon = eps_;
    margin(w, alpha, src, &p.tt_per_h);
    if (src.d.empty()) {
        FeasibilityReport rep;
        rep.policy_class = PolicyClass::Do;
        rep.margins.rate = -kInf;
        return rep;
    }
    p.d_per_q = src.d;
    p.ts_per_q = src.ts;
    return check_do_weighted(p, spec_, d_bar_, w);
}

FeasibilityReport synthesize_do(const SensorSpec& spec, double d_bar, const SynthOptions& opt) {
    const DoSearch search(spec, d_bar, opt);
    return search.synthesize(spec.env.h_pmf);
}

namespace {

struct GreedyState {
    QhTable d;
    std::vector<double> alpha;
    double margin = -kInf;
};

// Optimal distortions for fixed per-cell source shares.
std::optional<QhTable> greedy_distortions(const SensorSpec& spec, const std::vector<double>& alpha, double d_target) {
    const auto& env = spec.env;
    const auto w = cell_weights(env);
    std::vector<Cell> cells(w.size());
    for (std::size_t q = 0; q < env.n_q(); ++q) {
        for (std::size_t h = 0; h < env.n_h(); ++h) {
            const std::size_t c = q * env.n_h() + h;
            cells[c].weight = w[c];
            cells[c].curve = curve_expected(spec, env.q_support[q], alpha[c]);
        }
    }
    const auto d = distortion_step(cells, d_target);
    if (!d) return std::nullopt;
    return QhTable(env.n_q(), env.n_h(), *d);
}

GreedyState greedy_fixed_search(const SensorSpec& spec, double d_bar, const SynthOptions& opt) {
    const auto& env = spec.env;
    const std::size_t cells = env.n_q() * env.n_h();
    const double d_target = backed_off_distortion(d_bar, opt);
    const auto eval = [&](double a, GreedyState* out) {
        std::vector<double> alpha(cells, a);
        const auto d = greedy_distortions(spec, alpha, d_target);
        if (!d) return -kInf;
        const double m = greedy_margins(spec, *d, alpha, d_bar).rate;
        if (out) {
            out->d = *d;
            out->alpha = alpha;
            out->margin = m;
        }
        return std::isnan(m) ? -kInf : m;
    };
    const double a = search_alpha([&](double x) { return eval(x, nullptr); }, opt.alpha_grid, true, 0.0, 1.0);
    GreedyState st;
    eval(a, &st);
    return st;
}

} // namespace

FeasibilityReport synthesize_greedy_fixed(const SensorSpec& spec, double d_bar, const SynthOptions& opt) {
    spec.validate();
    const GreedyState st = greedy_fixed_search(spec, d_bar, opt);
    if (st.alpha.empty()) {
        FeasibilityReport rep;
        rep.policy_class = PolicyClass::GreedyFixed;
        rep.margins.rate = -kInf;
        return rep;
    }
    return check_greedy(GreedyFixedParams{st.d, st.alpha.front()}, spec, d_bar);
}

FeasibilityReport synthesize_greedy(const SensorSpec& spec, double d_bar, const SynthOptions& opt) {
    spec.validate();
    const auto& env = spec.env;
    const double d_target = backed_off_distortion(d_bar, opt);
    GreedyState st = greedy_fixed_search(spec, d_bar, opt);
    if (st.alpha.empty()) {
        st.alpha.assign(env.n_q() * env.n_h(), 0.5);
        const auto d = greedy_distortions(spec, st.alpha, d_target);
        if (!d) {
            FeasibilityReport rep;
            rep.policy_class = PolicyClass::Greedy;
            rep.margins.rate = -kInf;
            return rep;
        }
        st.d = *d;
        st.margin = greedy_margins(spec, st.d, st.alpha, d_bar).rate;
    }

    GreedyState best = st;
    for (std::size_t it = 0; it < opt.max_alternations; ++it) {
        // Per-cell share: the cell margin is concave in alpha.
        std::vector<double> alpha = best.alpha;
        for (std::size_t q = 0; q < env.n_q(); ++q) {
            for (std::size_t h = 0; h < env.n_h(); ++h) {
                const std::size_t c = q * env.n_h() + h;
                const double d = best.d.at(q, h);
                const auto cell = [&](double a) {
                    const GreedyEval e = greedy_cell(spec, q, h, d, a);
                    const double v = e.channel - e.source;
                    return std::isnan(v) ? -kInf : v;
                };
                const double cand = golden_argmax(cell, 0.0, 1.0, 80);
                double pick = alpha[c];
                double pick_v = cell(pick);
                for (double x : {cand, 0.0, 1.0}) {
                    const double v = cell(x);
                    if (v > pick_v) {
                        pick = x;
                        pick_v = v;
                    }
                }
                alpha[c] = pick;
            }
        }
        const auto d = greedy_distortions(spec, alpha, d_target);
        if (!d) break;
        const double m = greedy_margins(spec, *d, alpha, d_bar).rate;
        if (!(m > best.margin)) break;
        const bool done = m - best.margin <= 1e-10 * std::max(1.0, std::abs(m));
        best.alpha = alpha;
        best.d = *d;
        best.margin = m;
        if (done) break;
    }
    return check_greedy(GreedyParams{best.d, QhTable(env.n_q(), env.n_h(), best.alpha)}, spec, d_bar);
}

FeasibilityReport synthesize_hybrid1(const SensorSpec& spec, double d_bar, const SynthOptions& opt) {
    spec.validate();
    const auto& env = spec.env;
    const double mean_e = env.mean_energy();
    const double delta = backoff_energy(spec, opt);
    const double d_target = backed_off_distortion(d_bar, opt);

    const auto eval = [&](double alpha, Hybrid1Params* out) {
        std::vector<Cell> cells(env.n_q());
        for (std::size_t q = 0; q < env.n_q(); ++q) {
            cells[q].weight = env.q_pmf[q];
            cells[q].curve = curve_expected(spec, env.q_support[q], 1.0 - alpha);
        }
        const auto d = distortion_step(cells, d_target);
        if (!d) return -kInf;
        const std::vector<double> tt = channel_allocation(spec, alpha * mean_e - delta);
        Hybrid1Params p{*d, tt, alpha};
        if (out) *out = p;
        const double m = check_hybrid(p, spec, d_bar).margins.rate;
        return std::isnan(m) ? -kInf : m;
    };
    const double alpha =
        search_alpha([&](double a) { return eval(a, nullptr); }, opt.alpha_grid, false, 1e-9, 1.0 - 1e-9);
    Hybrid1Params p;
    if (eval(alpha, &p) == -kInf && p.d_per_q.empty()) {
        FeasibilityReport rep;
        rep.policy_class = PolicyClass::Hybrid1;
        rep.margins.rate = -kInf;
        return rep;
    }
    return check_hybrid(p, spec, d_bar);
}

FeasibilityReport synthesize_hybrid2(const SensorSpec& spec, double d_bar, const SynthOptions& opt) {
    spec.validate();
    const auto& env = spec.env;
    const double mean_e = env.mean_energy();
    const double delta = backoff_energy(spec, opt);
    const double d_target = backed_off_distortion(d_bar, opt);

    const auto eval = [&](double alpha, Hybrid2Params* out) {
        SourceAllocation src = optimize_source(spec, d_target, (1.0 - alpha) * mean_e - delta, opt.max_alternations);
        if (src.d.empty()) return -kInf;
        Hybrid2Params p{src.d, src.ts, alpha};
        if (out) *out = p;
        const double m = check_hybrid(p, spec, d_bar).margins.rate;
        return std::isnan(m) ? -kInf : m;
    };
    const double alpha =
        search_alpha([&](double a) { return eval(a, nullptr); }, opt.alpha_grid, false, 1e-9, 1.0 - 1e-9);
    Hybrid2Params p;
    if (eval(alpha, &p) == -kInf && p.d_per_q.empty()) {
        FeasibilityReport rep;
        rep.policy_class = PolicyClass::Hybrid2;
        rep.margins.rate = -kInf;
        return rep;
    }
    return check_hybrid(p, spec, d_bar);
}

FeasibilityReport synthesize_analog(const SensorSpec& spec, double d_bar, const SynthOptions& opt) {
    spec.validate();
    const auto& env = spec.env;
    const double d_max = source_d_max(spec.source);
    const double budget = env.mean_energy() - backoff_energy(spec, opt);
    const auto w = cell_weights(env);
    std::vector<double> tt(w.size(), 0.0);

    const auto distortion = [&](std::size_t c, double t) {
        return rate::analog(spec.geometry, t, env.q_support[c / env.n_h()], env.h_support[c % env.n_h()], d_max);
    };
    if (budget > 0.0) {
        const auto respond = [&](std::size_t c, double mu) {
            const double cap = budget / w[c];
            if (mu <= 0.0) return cap;
            return golden_argmin([&](double t) { return distortion(c, t) + mu * t; }, 0.0, cap, 100);
        };
        const auto total = [&](double mu) {
            double acc = 0.0;
            for (std::size_t c = 0; c < w.size(); ++c) {
                if (w[c] > 0.0) acc += w[c] * respond(c, mu);
            }
            return acc;
        };
        std::size_t active = 0;
        for (double x : w) active += x > 0.0 ? 1 : 0;
        if (active == 1) {
            for (std::size_t c = 0; c < w.size(); ++c) {
                if (w[c] > 0.0) tt[c] = budget / w[c];
            }
        } else if (const auto mu = multiplier(total, budget)) {
            for (std::size_t c = 0; c < w.size(); ++c) tt[c] = w[c] > 0.0 ? respond(c, *mu) : 0.0;
        }
    }
    AnalogParams p{QhTable(env.n_q(), env.n_h(), tt), opt.epsilon_rel * env.mean_energy()};
    return check_analog(p, spec, d_bar);
}

FeasibilityReport synthesize(PolicyClass cls, const SensorSpec& spec, double d_bar, const SynthOptions& opt) {
    switch (cls) {
    case PolicyClass::Do: return synthesize_do(spec, d_bar, opt);
    case PolicyClass::Greedy: return synthesize_greedy(spec, d_bar, opt);
    case PolicyClass::GreedyFixed: return synthesize_greedy_fixed(spec, d_bar, opt);
    case PolicyClass::Hybrid1: return synthesize_hybrid1(spec, d_bar, opt);
    case PolicyClass::Hybrid2: return synthesize_hybrid2(spec, d_bar, opt);
    case PolicyClass::Analog: return synthesize_analog(spec, d_bar, opt);
    case PolicyClass::AnalogGreedy: return check_analog_greedy(spec, d_bar);
    }
    return {};
}

double global_distortion_floor(const SensorSpec& spec) {
    if (const auto* iid = std::get_if<GaussianIidSourceModel>(&spec.source)) {
        double acc = 0.0;
        for (std::size_t i = 0; i < spec.env.n_q(); ++i) {
            acc += spec.env.q_pmf[i] * estimation_mmse(iid->d_max, spec.env.q_support[i]);
        }
        return acc;
    }
    return 0.0;
}

std::optional<double> min_feasible_distortion(const SensorSpec& spec, const SynthOptions& opt, double tol) {
    const double d_max = source_d_max(spec.source);
    if (!synthesize_do(spec, d_max, opt).feasible) return std::nullopt;
    double lo = global_distortion_floor(spec), hi = d_max;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (synthesize_do(spec, mid, opt).feasible) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

} // namespace ehsc
