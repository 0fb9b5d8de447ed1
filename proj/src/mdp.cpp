#include "ehsc/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ehsc/csv.hpp"
#include "ehsc/parallel.hpp"

namespace ehsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pmf(const std::vector<double>& pmf, std::size_t n, const char* what) {
    if (pmf.size() != n || n == 0) throw SpecError(std::string(what) + " pmf does not match its support");
    double total = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0)) throw SpecError(std::string(what) + " pmf has a negative entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw SpecError(std::string(what) + " pmf does not sum to 1");
}

template <class T> void check_levels(const std::vector<T>& v, const char* what) {
    if (v.empty()) throw SpecError(std::string(what) + " must not be empty");
    if (!std::is_sorted(v.begin(), v.end())) throw SpecError(std::string(what) + " must be sorted");
    for (T x : v) {
        if (!(x >= T{0})) throw SpecError(std::string(what) + " must be nonnegative");
    }
}

// Outcome of compressing with (d, ts) on a queue left with `after` codewords.
struct Production {
    int produced = 0;
    double d_eff = 0.0;
    bool overflow = false;
};

// -1 when the encoder cannot run (accrues d_max, produces nothing).
int codewords_or_skip(const DiscreteSpec& spec, double d, int ts, double q) {
    try {
        return source_codewords(spec, d, ts, q);
    } catch (const std::domain_error&) {
        return -1;
    }
}

Production produce(const DiscreteSpec& spec, int cw, double d, int after) {
    Production p;
    if (cw < 0) {
        p.d_eff = spec.d_max();
        return p;
    }
    if (after + cw > spec.queue_max) {
        p.overflow = true;
        p.d_eff = spec.d_max();
        return p;
    }
    p.produced = cw;
    p.d_eff = d;
    return p;
}

// Joint distribution of the exogenous next-slot triple (e, q, h).
struct Exogenous {
    std::size_t e, q, h;
    double p;
};

std::vector<Exogenous> exogenous(const DiscreteSpec& spec) {
    std::vector<Exogenous> out;
    for (std::size_t e = 0; e < spec.energy_values.size(); ++e) {
        for (std::size_t q = 0; q < spec.q_support.size(); ++q) {
            for (std::size_t h = 0; h < spec.h_support.size(); ++h) {
                const double p = spec.energy_pmf[e] * spec.q_pmf[q] * spec.h_pmf[h];
                if (p > 0.0) out.push_back({e, q, h, p});
            }
        }
    }
    return out;
}

double skip_level(const DiscreteSpec& spec) { return spec.d_levels.back(); }

} // namespace

void DiscreteSpec::validate() const {
    if (queue_max < 0 || battery_max < 0) throw SpecError("buffer sizes must be nonnegative");
    check_levels(energy_values, "energy_values");
    check_levels(d_levels, "d_levels");
    check_levels(ts_levels, "ts_levels");
    check_levels(tt_levels, "tt_levels");
    check_pmf(energy_pmf, energy_values.size(), "energy");
    check_pmf(q_pmf, q_support.size(), "observation");
    check_pmf(h_pmf, h_support.size(), "channel");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw SpecError("gamma must lie in [0, 1]");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw SpecError("lambda must lie in [0, 1)");
    if (ts_levels.front() != 0 || tt_levels.front() != 0) throw SpecError("energy levels must include 0");
    std::visit([](const auto& m) { m.validate(); }, source);
}

int source_codewords(const DiscreteSpec& spec, double d, int ts, double q) {
    const double bits = source_rate(spec.source, spec.geometry, d, static_cast<double>(ts), q);
    return static_cast<int>(std::ceil(bits / spec.geometry.source_samples_per_slot() - 1e-9));
}

int channel_codewords(const DiscreteSpec& spec, double h, int tt) {
    const double bits = channel_rate_awgn(spec.geometry, h, static_cast<double>(tt));
    return static_cast<int>(std::floor(bits / spec.geometry.channel_uses_per_slot() + 1e-9));
}

std::size_t DelayDistortionMdp::index(const DiscreteState& s) const {
    const std::size_t n_e = spec.energy_values.size(), n_x = static_cast<std::size_t>(spec.queue_max) + 1;
    const std::size_t n_q = spec.q_support.size(), n_h = spec.h_support.size();
    return (((static_cast<std::size_t>(s.battery) * n_e + s.e) * n_x + static_cast<std::size_t>(s.queue)) * n_q + s.q) *
               n_h +
           s.h;
}

std::size_t DelayDistortionMdp::reported_size() const { return states.size() / spec.energy_values.size(); }

std::vector<double> DelayDistortionMdp::initial_distribution() const {
    std::vector<double> init(states.size(), 0.0);
    for (const auto& x : exogenous(spec)) init[index({0, x.e, 0, x.q, x.h})] += x.p;
    return init;
}

DelayDistortionMdp build_mdp(const DiscreteSpec& spec) {
    spec.validate();
    DelayDistortionMdp m;
    m.spec = spec;
    const auto exo = exogenous(spec);
    for (int b = 0; b <= spec.battery_max; ++b) {
        for (std::size_t e = 0; e < spec.energy_values.size(); ++e) {
            for (int x = 0; x <= spec.queue_max; ++x) {
                for (std::size_t q = 0; q < spec.q_support.size(); ++q) {
                    for (std::size_t h = 0; h < spec.h_support.size(); ++h) m.states.push_back({b, e, x, q, h});
                }
            }
        }
    }
    m.mdp.actions.resize(m.states.size());
    m.labels.resize(m.states.size());
    for (std::size_t s = 0; s < m.states.size(); ++s) {
        const DiscreteState& st = m.states[s];
        if (m.index(st) != s) throw std::logic_error("state indexing mismatch");
        const int available = st.battery + spec.energy_values[st.e];
        for (double d : spec.d_levels) {
            for (int ts : spec.ts_levels) {
                const int cw = codewords_or_skip(spec, d, ts, spec.q_support[st.q]);
                if (cw < 0 && d != skip_level(spec)) continue; // one canonical label for an idle encoder
                for (int tt : spec.tt_levels) {
                    if (ts + tt > available) continue;
                    const int served = std::min(st.queue, channel_codewords(spec, spec.h_support[st.h], tt));
                    const int after = st.queue - served;
                    const Production pr = produce(spec, cw, d, after);
                    const int x_next = after + pr.produced;
                    const int b_next = std::min(available - ts - tt, spec.battery_max);

                    MdpAction a;
                    a.cost = spec.gamma * pr.d_eff + (1.0 - spec.gamma) * st.queue;
                    for (const auto& ex : exo) {
                        a.next.push_back({static_cast<std::uint32_t>(m.index({b_next, ex.e, x_next, ex.q, ex.h})), ex.p});
                    }
                    m.mdp.actions[s].push_back(std::move(a));
                    m.labels[s].push_back({d, ts, tt, pr.d_eff, pr.overflow});
                }
            }
        }
        if (m.mdp.actions[s].empty()) throw SpecError("a state has no admissible action");
    }
    return m;
}

double bellman_backup(const FiniteMdp& mdp, double lambda, const std::vector<double>& v, std::vector<double>& out,
                      bool parallel) {
    out.resize(mdp.size());
    std::vector<double> change(mdp.size());
    for_each_index(mdp.size(), parallel, [&](std::size_t s) {
        double best = kInf;
        for (const auto& a : mdp.actions[s]) {
            double acc = 0.0;
            for (const auto& t : a.next) acc += t.p * v[t.to];
            best = std::min(best, a.cost + lambda * acc);
        }
        out[s] = best;
        change[s] = std::abs(best - v[s]);
    });
    return change.empty() ? 0.0 : *std::max_element(change.begin(), change.end());
}

std::vector<std::size_t> greedy_policy(const FiniteMdp& mdp, double lambda, const std::vector<double>& v) {
    std::vector<std::size_t> pol(mdp.size(), 0);
    std::vector<double> q;
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        q.clear();
        for (const auto& a : mdp.actions[s]) {
            double acc = 0.0;
            for (const auto& t : a.next) acc += t.p * v[t.to];
            q.push_back(a.cost + lambda * acc);
        }
        const double best = *std::min_element(q.begin(), q.end());
        const double tol = 1e-9 * std::max(1.0, std::abs(best));
        pol[s] = static_cast<std::size_t>(std::find_if(q.begin(), q.end(), [&](double x) { return x <= best + tol; }) -
                                          q.begin());
    }
    return pol;
}

SolvedPolicy value_iteration(const FiniteMdp& mdp, double lambda, double tol, bool parallel,
                             std::size_t max_iterations) {
    if (!(lambda >= 0.0 && lambda < 1.0)) throw SpecError("discount must lie in [0, 1)");
    SolvedPolicy sol;
    std::vector<double> v(mdp.size(), 0.0), next;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        const double r = bellman_backup(mdp, lambda, v, next, parallel);
        v.swap(next);
        sol.residuals.push_back(r);
        sol.iterations = it + 1;
        sol.residual = r;
        if (r < tol) break;
    }
    sol.action = greedy_policy(mdp, lambda, v);
    sol.value = std::move(v);
    return sol;
}

std::vector<double> evaluate_policy(const FiniteMdp& mdp, const std::vector<std::size_t>& policy, double lambda,
                                    double tol) {
    std::vector<double> v(mdp.size(), 0.0), next(mdp.size());
    for (std::size_t it = 0; it < 1000000; ++it) {
        double change = 0.0;
        for (std::size_t s = 0; s < mdp.size(); ++s) {
            const auto& a = mdp.actions[s][policy[s]];
            double acc = 0.0;
            for (const auto& t : a.next) acc += t.p * v[t.to];
            next[s] = a.cost + lambda * acc;
            change = std::max(change, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (change < tol) break;
    }
    return v;
}

std::vector<double> stationary_distribution(const FiniteMdp& mdp, const std::vector<std::size_t>& policy,
                                            const std::vector<double>& start, double tol) {
    std::vector<double> pi = start, next(mdp.size());
    for (std::size_t it = 0; it < 10000000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < mdp.size(); ++s) {
            if (pi[s] == 0.0) continue;
            next[s] += 0.5 * pi[s];
            for (const auto& t : mdp.actions[s][policy[s]].next) next[t.to] += 0.5 * pi[s] * t.p;
        }
        double diff = 0.0;
        for (std::size_t s = 0; s < mdp.size(); ++s) diff += std::abs(next[s] - pi[s]);
        pi.swap(next);
        if (diff < tol) break;
    }
    return pi;
}

LongRun long_run(const DelayDistortionMdp& m, const std::vector<std::size_t>& policy) {
    const auto pi = stationary_distribution(m.mdp, policy, m.initial_distribution());
    LongRun lr;
    for (std::size_t s = 0; s < m.states.size(); ++s) {
        const auto& lab = m.labels[s][policy[s]];
        lr.avg_queue += pi[s] * m.states[s].queue;
        lr.avg_distortion += pi[s] * lab.d_eff;
        lr.avg_cost += pi[s] * m.mdp.actions[s][policy[s]].cost;
        lr.overflow_rate += lab.overflow ? pi[s] : 0.0;
    }
    return lr;
}

std::vector<TradeoffPoint> tradeoff_curve(const DiscreteSpec& spec, const std::vector<double>& gammas, bool parallel) {
    std::vector<TradeoffPoint> out(gammas.size());
    for_each_index(gammas.size(), parallel, [&](std::size_t i) {
        DiscreteSpec s = spec;
        s.gamma = gammas[i];
        const DelayDistortionMdp m = build_mdp(s);
        const SolvedPolicy sol = value_iteration(m.mdp, s.lambda, 1e-10, false);
        const LongRun lr = long_run(m, sol.action);
        const auto init = m.initial_distribution();
        double disc = 0.0;
        for (std::size_t k = 0; k < init.size(); ++k) disc += init[k] * sol.value[k];
        out[i] = {gammas[i], lr.avg_queue, lr.avg_distortion, sol.iterations, sol.residual, disc};
    });
    return out;
}

// ---------------------------------------------------------------------------
// Separable baseline
// ---------------------------------------------------------------------------

namespace {

struct SubMdp {
    FiniteMdp mdp;
    std::vector<std::pair<double, int>> action_labels; // per flattened (state, action): (d, energy)
    std::vector<std::size_t> offsets;
};

// Source side: state (battery, e, queue, q); constant service g_bar.
struct SourceSide {
    int capacity;
    const DiscreteSpec* spec;
    std::size_t index(int b, std::size_t e, int x, std::size_t q) const {
        const auto& s = *spec;
        return ((static_cast<std::size_t>(b) * s.energy_values.size() + e) * (s.queue_max + 1) +
                static_cast<std::size_t>(x)) *
                   s.q_support.size() +
               q;
    }
    std::size_t size() const {
        return static_cast<std::size_t>(capacity + 1) * spec->energy_values.size() * (spec->queue_max + 1) *
               spec->q_support.size();
    }
};

struct ChannelSide {
    int capacity;
    const DiscreteSpec* spec;
    std::size_t index(int b, std::size_t e, int x, std::size_t h) const {
        const auto& s = *spec;
        return ((static_cast<std::size_t>(b) * s.energy_values.size() + e) * (s.queue_max + 1) +
                static_cast<std::size_t>(x)) *
                   s.h_support.size() +
               h;
    }
    std::size_t size() const {
        return static_cast<std::size_t>(capacity + 1) * spec->energy_values.size() * (spec->queue_max + 1) *
               spec->h_support.size();
    }
};

struct SourceAction {
    double d;
    int ts;
};

struct SourcePlan {
    SourceSide side;
    std::vector<std::vector<SourceAction>> actions;
    SolvedPolicy sol;
};

SourcePlan solve_source_side(const DiscreteSpec& spec, const std::vector<int>& split, int capacity, int g_bar) {
    SourcePlan plan{{capacity, &spec}, {}, {}};
    FiniteMdp mdp;
    mdp.actions.resize(plan.side.size());
    plan.actions.resize(plan.side.size());
    for (int b = 0; b <= capacity; ++b) {
        for (std::size_t e = 0; e < spec.energy_values.size(); ++e) {
            for (int x = 0; x <= spec.queue_max; ++x) {
                for (std::size_t q = 0; q < spec.q_support.size(); ++q) {
                    const std::size_t s = plan.side.index(b, e, x, q);
                    const int available = b + split[e];
                    const int after = std::max(x - g_bar, 0);
                    for (double d : spec.d_levels) {
                        for (int ts : spec.ts_levels) {
                            if (ts > available) continue;
                            const int cw = codewords_or_skip(spec, d, ts, spec.q_support[q]);
                            if (cw < 0 && d != skip_level(spec)) continue;
                            const Production pr = produce(spec, cw, d, after);
                            const int b_next = std::min(available - ts, capacity);
                            MdpAction a;
                            a.cost = spec.gamma * pr.d_eff + (1.0 - spec.gamma) * x;
                            for (std::size_t e2 = 0; e2 < spec.energy_values.size(); ++e2) {
                                for (std::size_t q2 = 0; q2 < spec.q_support.size(); ++q2) {
                                    const double p = spec.energy_pmf[e2] * spec.q_pmf[q2];
                                    if (p > 0.0) {
                                        a.next.push_back({static_cast<std::uint32_t>(
                                                              plan.side.index(b_next, e2, after + pr.produced, q2)),
                                                          p});
                                    }
                                }
                            }
                            mdp.actions[s].push_back(std::move(a));
                            plan.actions[s].push_back({d, ts});
                        }
                    }
                }
            }
        }
    }
    plan.sol = value_iteration(mdp, spec.lambda, 1e-10, false);
    return plan;
}

struct ChannelPlan {
    ChannelSide side;
    std::vector<std::vector<int>> actions;
    SolvedPolicy sol;
};

ChannelPlan solve_channel_side(const DiscreteSpec& spec, const std::vector<int>& split, int capacity, int f_bar) {
    ChannelPlan plan{{capacity, &spec}, {}, {}};
    FiniteMdp mdp;
    mdp.actions.resize(plan.side.size());
    plan.actions.resize(plan.side.size());
    for (int b = 0; b <= capacity; ++b) {
        for (std::size_t e = 0; e < spec.energy_values.size(); ++e) {
            for (int x = 0; x <= spec.queue_max; ++x) {
                for (std::size_t h = 0; h < spec.h_support.size(); ++h) {
                    const std::size_t s = plan.side.index(b, e, x, h);
                    const int available = b + spec.energy_values[e] - split[e];
                    for (int tt : spec.tt_levels) {
                        if (tt > available) continue;
                        const int after = x - std::min(x, channel_codewords(spec, spec.h_support[h], tt));
                        const int x_next = after + f_bar > spec.queue_max ? after : after + f_bar;
                        const int b_next = std::min(available - tt, capacity);
                        MdpAction a;
                        a.cost = static_cast<double>(x);
                        for (std::size_t e2 = 0; e2 < spec.energy_values.size(); ++e2) {
                            for (std::size_t h2 = 0; h2 < spec.h_support.size(); ++h2) {
                                const double p = spec.energy_pmf[e2] * spec.h_pmf[h2];
                                if (p > 0.0) {
                                    a.next.push_back(
                                        {static_cast<std::uint32_t>(plan.side.index(b_next, e2, x_next, h2)), p});
                                }
                            }
                        }
                        mdp.actions[s].push_back(std::move(a));
                        plan.actions[s].push_back(tt);
                    }
                }
            }
        }
    }
    plan.sol = value_iteration(mdp, spec.lambda, 1e-10, false);
    return plan;
}

struct Coupled {
    FiniteMdp chain; // one action per state
    std::vector<double> queue;
    std::vector<double> d_eff;
    std::vector<bool> overflow;
    std::vector<double> init;
};

Coupled couple(const DiscreteSpec& spec, const std::vector<int>& split, const SourcePlan& src, const ChannelPlan& ch) {
    const int cs = src.side.capacity, cc = ch.side.capacity;
    const std::size_t n_e = spec.energy_values.size(), n_x = spec.queue_max + 1;
    const std::size_t n_q = spec.q_support.size(), n_h = spec.h_support.size();
    const auto index = [&](int bs, int bc, std::size_t e, int x, std::size_t q, std::size_t h) {
        return ((((static_cast<std::size_t>(bs) * (cc + 1) + bc) * n_e + e) * n_x + x) * n_q + q) * n_h + h;
    };
    Coupled c;
    const std::size_t n = static_cast<std::size_t>(cs + 1) * (cc + 1) * n_e * n_x * n_q * n_h;
    c.chain.actions.resize(n);
    c.queue.resize(n);
    c.d_eff.resize(n);
    c.overflow.resize(n);
    c.init.assign(n, 0.0);
    const auto exo = exogenous(spec);
    for (const auto& ex : exo) c.init[index(0, 0, ex.e, 0, ex.q, ex.h)] += ex.p;
    for (int bs = 0; bs <= cs; ++bs) {
        for (int bc = 0; bc <= cc; ++bc) {
            for (std::size_t e = 0; e < n_e; ++e) {
                for (int x = 0; x <= spec.queue_max; ++x) {
                    for (std::size_t q = 0; q < n_q; ++q) {
                        for (std::size_t h = 0; h < n_h; ++h) {
                            const std::size_t s = index(bs, bc, e, x, q, h);
                            const std::size_t ss = src.side.index(bs, e, x, q);
                            const std::size_t cs_idx = ch.side.index(bc, e, x, h);
                            const SourceAction sa = src.actions[ss][src.sol.action[ss]];
                            const int tt = ch.actions[cs_idx][ch.sol.action[cs_idx]];
                            const int after = x - std::min(x, channel_codewords(spec, spec.h_support[h], tt));
                            const int cw = codewords_or_skip(spec, sa.d, sa.ts, spec.q_support[q]);
                            const Production pr = produce(spec, cw, sa.d, after);
                            const int bs_next = std::min(bs + split[e] - sa.ts, cs);
                            const int bc_next = std::min(bc + spec.energy_values[e] - split[e] - tt, cc);
                            MdpAction a;
                            a.cost = spec.gamma * pr.d_eff + (1.0 - spec.gamma) * x;
                            for (const auto& ex : exo) {
                                a.next.push_back({static_cast<std::uint32_t>(
                                                      index(bs_next, bc_next, ex.e, after + pr.produced, ex.q, ex.h)),
                                                  ex.p});
                            }
                            c.chain.actions[s].push_back(std::move(a));
                            c.queue[s] = x;
                            c.d_eff[s] = pr.d_eff;
                            c.overflow[s] = pr.overflow;
                        }
                    }
                }
            }
        }
    }
    return c;
}

} // namespace

SeparableChoice separable_optimize(const DiscreteSpec& spec) {
    spec.validate();
    // Candidate assumed rates: every codeword count some action can realize.
    std::vector<int> g_cands, f_cands;
    for (double h : spec.h_support) {
        for (int tt : spec.tt_levels) g_cands.push_back(channel_codewords(spec, h, tt));
    }
    for (double q : spec.q_support) {
        for (double d : spec.d_levels) {
            for (int ts : spec.ts_levels) {
                const int cw = codewords_or_skip(spec, d, ts, q);
                if (cw >= 0) f_cands.push_back(cw);
            }
        }
    }
    f_cands.push_back(0);
    for (auto* v : {&g_cands, &f_cands}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    if (g_cands.empty() || f_cands.empty()) throw SpecError("separable search has no candidate rates");

    // Integer split rules s(E) in [0, E].
    std::vector<std::vector<int>> splits{{}};
    for (int ev : spec.energy_values) {
        std::vector<std::vector<int>> grown;
        for (const auto& base : splits) {
            for (int s = 0; s <= ev; ++s) {
                auto v = base;
                v.push_back(s);
                grown.push_back(std::move(v));
            }
        }
        splits = std::move(grown);
    }

    double mean_e = 0.0;
    for (std::size_t e = 0; e < spec.energy_values.size(); ++e) mean_e += spec.energy_pmf[e] * spec.energy_values[e];

    SeparableChoice best;
    best.discounted_cost = kInf;
    for (const auto& split : splits) {
        for (int cs = 0; cs <= spec.battery_max; ++cs) {
            const int cc = spec.battery_max - cs;
            std::vector<ChannelPlan> channel_plans;
            for (int f_bar : f_cands) channel_plans.push_back(solve_channel_side(spec, split, cc, f_bar));
            for (int g_bar : g_cands) {
                const SourcePlan src = solve_source_side(spec, split, cs, g_bar);
                for (std::size_t fi = 0; fi < f_cands.size(); ++fi) {
                    const ChannelPlan& ch = channel_plans[fi];
                    const Coupled c = couple(spec, split, src, ch);
                    const std::vector<std::size_t> only(c.chain.size(), 0);
                    const auto v = evaluate_policy(c.chain, only, spec.lambda);
                    double disc = 0.0;
                    for (std::size_t k = 0; k < v.size(); ++k) disc += c.init[k] * v[k];
                    if (!(disc < best.discounted_cost - 1e-12)) continue;
                    best.split = split;
                    best.source_capacity = cs;
                    best.g_bar = g_bar;
                    best.f_bar = f_cands[fi];
                    best.discounted_cost = disc;
                    double share = 0.0;
                    for (std::size_t e = 0; e < split.size(); ++e) share += spec.energy_pmf[e] * split[e];
                    best.alpha = mean_e > 0.0 ? share / mean_e : 0.0;
                    const auto pi = stationary_distribution(c.chain, only, c.init);
                    LongRun lr;
                    for (std::size_t k = 0; k < pi.size(); ++k) {
                        lr.avg_queue += pi[k] * c.queue[k];
                        lr.avg_distortion += pi[k] * c.d_eff[k];
                        lr.avg_cost += pi[k] * c.chain.actions[k][0].cost;
                        lr.overflow_rate += c.overflow[k] ? pi[k] : 0.0;
                    }
                    best.long_run = lr;
                    best.iterations = src.sol.iterations + ch.sol.iterations;
                    best.residual = std::max(src.sol.residual, ch.sol.residual);
                }
            }
        }
    }
    return best;
}

std::vector<TradeoffPoint> separable_tradeoff_curve(const DiscreteSpec& spec, const std::vector<double>& gammas,
                                                    bool parallel) {
    std::vector<TradeoffPoint> out(gammas.size());
    for_each_index(gammas.size(), parallel, [&](std::size_t i) {
        DiscreteSpec s = spec;
        s.gamma = gammas[i];
        const SeparableChoice c = separable_optimize(s);
        out[i] = {gammas[i], c.long_run.avg_queue, c.long_run.avg_distortion, c.iterations, c.residual,
                  c.discounted_cost};
    });
    return out;
}

void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffPoint>& points) {
    out << "gamma,avg_queue,avg_distortion,iterations,residual\n";
    for (const auto& p : points) {
        csv::Row row(out);
        row << p.gamma << p.avg_queue << p.avg_distortion << p.iterations << p.residual;
    }
}

} // namespace ehsc
