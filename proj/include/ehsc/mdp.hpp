// Finite-buffer delay-distortion MDP: construction, value iteration,
// long-run evaluation, the separable baseline and trade-off curves.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ehsc/models.hpp"

namespace ehsc {

/// Energies are integers in units of one Joule per channel use; queue
/// lengths are in codewords (M bits at the source side, N bits at the
/// channel side).
struct DiscreteSpec {
    int queue_max = 5;
    int battery_max = 2;
    std::vector<int> energy_values{1, 2};
    std::vector<double> energy_pmf{0.5, 0.5};
    std::vector<double> q_support{0.1, 0.5};
    std::vector<double> q_pmf{0.5, 0.5};
    std::vector<double> h_support{0.5, 10.0};
    std::vector<double> h_pmf{0.5, 0.5};
    std::vector<double> d_levels{0.1, 0.55, 1.0};
    std::vector<int> ts_levels{0, 1, 2, 3, 4};
    std::vector<int> tt_levels{0, 1, 2, 3, 4};
    double gamma = 0.5;
    double lambda = 0.5;
    SourceModel source = GaussMarkovSourceModel{};
    SlotGeometry geometry{100, 100};

    void validate() const;
    double d_max() const { return source_d_max(source); }
};

struct Transition {
    std::uint32_t to;
    double p;
};

struct MdpAction {
    double cost = 0.0;
    std::vector<Transition> next;
};

/// Generic finite MDP; actions of each state are listed in tie-break order.
struct FiniteMdp {
    std::vector<std::vector<MdpAction>> actions;
    std::size_t size() const { return actions.size(); }
};

struct ActionLabel {
    double d = 0.0;
    int ts = 0;
    int tt = 0;
    double d_eff = 0.0; // distortion actually accrued
    bool overflow = false;
};

/// Pre-decision state: carried battery, this slot's arrival, queue, q, h.
struct DiscreteState {
    int battery = 0;
    std::size_t e = 0;
    int queue = 0;
    std::size_t q = 0;
    std::size_t h = 0;
};

struct DelayDistortionMdp {
    DiscreteSpec spec;
    FiniteMdp mdp;
    std::vector<DiscreteState> states;
    std::vector<std::vector<ActionLabel>> labels;

    std::size_t index(const DiscreteState& s) const;
    /// Number of states with the arrival projected out.
    std::size_t reported_size() const;
    /// Distribution of the first pre-decision state: empty buffers, random
    /// arrival and channel/observation states.
    std::vector<double> initial_distribution() const;
};

/// Source codewords ceil(f / M) and channel codewords floor(g / N).
int source_codewords(const DiscreteSpec& spec, double d, int ts, double q);
int channel_codewords(const DiscreteSpec& spec, double h, int tt);

DelayDistortionMdp build_mdp(const DiscreteSpec& spec);

struct SolvedPolicy {
    std::vector<double> value;
    std::vector<std::size_t> action; // index into the state's action list
    std::size_t iterations = 0;
    double residual = 0.0;
    std::vector<double> residuals; // sup-norm change of every backup
};

/// One Bellman backup; returns the sup-norm change.
double bellman_backup(const FiniteMdp& mdp, double lambda, const std::vector<double>& v, std::vector<double>& out,
                      bool parallel);

/// Lowest-index action whose Q-value is within 1e-9 (relative) of the best.
std::vector<std::size_t> greedy_policy(const FiniteMdp& mdp, double lambda, const std::vector<double>& v);

SolvedPolicy value_iteration(const FiniteMdp& mdp, double lambda, double tol = 1e-10, bool parallel = true,
                             std::size_t max_iterations = 1000000);

/// Discounted value of a fixed policy (iterated to tol).
std::vector<double> evaluate_policy(const FiniteMdp& mdp, const std::vector<std::size_t>& policy, double lambda,
                                    double tol = 1e-13);

/// Stationary distribution of the chain induced by a policy, by lazy power
/// iteration from `start`.
std::vector<double> stationary_distribution(const FiniteMdp& mdp, const std::vector<std::size_t>& policy,
                                            const std::vector<double>& start, double tol = 1e-12);

struct LongRun {
    double avg_queue = 0.0;
    double avg_distortion = 0.0;
    double avg_cost = 0.0;
    double overflow_rate = 0.0;
};

LongRun long_run(const DelayDistortionMdp& m, const std::vector<std::size_t>& policy);

struct TradeoffPoint {
    double gamma = 0.0;
    double avg_queue = 0.0;
    double avg_distortion = 0.0;
    std::size_t iterations = 0;
    double residual = 0.0;
    double discounted_cost = 0.0; // from the initial distribution
};

/// Joint optimization: one value-iteration solve per gamma.
std::vector<TradeoffPoint> tradeoff_curve(const DiscreteSpec& spec, const std::vector<double>& gammas,
                                          bool parallel = true);

struct SeparableChoice {
    std::vector<int> split;  // source share s(E) of each arrival value
    int source_capacity = 0; // source sub-battery size; the channel side keeps the rest
    int g_bar = 0;           // assumed service in codewords per slot
    int f_bar = 0;           // assumed arrivals in codewords per slot
    double alpha = 0.0;      // E[s(E)] / E[E]
    double discounted_cost = 0.0;
    LongRun long_run;
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Best separable policy for spec.gamma. Throws SpecError on empty
/// candidate sets.
SeparableChoice separable_optimize(const DiscreteSpec& spec);

std::vector<TradeoffPoint> separable_tradeoff_curve(const DiscreteSpec& spec, const std::vector<double>& gammas,
                                                    bool parallel = true);

/// gamma,avg_queue,avg_distortion,iterations,residual
void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffPoint>& points);

} // namespace ehsc
