// Feasibility conditions for each policy class, water-filling, parameter
// synthesis and the minimal supportable distortion.
#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "ehsc/models.hpp"
#include "ehsc/policies.hpp"

namespace ehsc {

/// Slack of every condition: bits/slot for the rate condition, Joule for
/// the energy budgets, distortion units for the distortion condition.
/// Conditions that do not apply to a class are +inf.
struct Margins {
    static constexpr double kNone = std::numeric_limits<double>::infinity();
    double rate = kNone;
    double distortion = kNone;
    double energy_source = kNone;
    double energy_channel = kNone;
};

/// Threshold on the (strict) rate condition.
inline constexpr double kRateSlack = 1e-12;

struct FeasibilityReport {
    bool feasible = false;
    std::optional<PolicyParams> witness; // present iff feasible
    Margins margins;
    PolicyClass policy_class = PolicyClass::Do;
};

/// Verdict implied by a set of margins: rate slack above kRateSlack, the
/// others nonnegative.
bool margins_feasible(const Margins& m);

FeasibilityReport check_do(const DoParams& params, const SensorSpec& spec, double d_bar);
/// check_do with the channel terms weighted by `channel_weights` in place of
/// the channel pmf: the long-run share of slots in which the sensor holds
/// the channel in each channel state.
FeasibilityReport check_do_weighted(const DoParams& params, const SensorSpec& spec, double d_bar,
                                    const std::vector<double>& channel_weights);
FeasibilityReport check_greedy(const GreedyParams& params, const SensorSpec& spec, double d_bar);
FeasibilityReport check_greedy(const GreedyFixedParams& params, const SensorSpec& spec, double d_bar);
FeasibilityReport check_hybrid(const Hybrid1Params& params, const SensorSpec& spec, double d_bar);
FeasibilityReport check_hybrid(const Hybrid2Params& params, const SensorSpec& spec, double d_bar);
FeasibilityReport check_analog(const AnalogParams& params, const SensorSpec& spec, double d_bar);
FeasibilityReport check_analog_greedy(const SensorSpec& spec, double d_bar);

/// Dispatch on the parameter variant.
FeasibilityReport check(const PolicyParams& params, const SensorSpec& spec, double d_bar);

/// Channel allocation T^h = max(mu - 1/h, 0) with sum_h Pr(h) T^h = budget;
/// the water level mu is found by bisection.
std::vector<double> waterfill(const std::vector<double>& h_support, const std::vector<double>& h_pmf, double budget);

/// Allocation maximizing sum_h w_h log2(1 + h T^h) subject to
/// sum_h p_h T^h <= budget, solved exactly over the sorted breakpoints.
/// States with p_h = 0, w_h = 0 or h <= 0 receive nothing.
std::vector<double> waterfill_weighted(const std::vector<double>& h_support, const std::vector<double>& p,
                                       const std::vector<double>& w, double budget);

struct SynthOptions {
    std::size_t alpha_grid = 64;   // points (i + 1/2) / n, followed by a golden-section refinement
    double epsilon_rel = 1e-3;     // epsilon as a fraction of the mean harvest
    double budget_backoff = 1e-9;  // relative headroom left on every synthesized constraint
    std::size_t max_alternations = 200;
};

FeasibilityReport synthesize_do(const SensorSpec& spec, double d_bar, const SynthOptions& opt = {});
FeasibilityReport synthesize_greedy(const SensorSpec& spec, double d_bar, const SynthOptions& opt = {});
FeasibilityReport synthesize_greedy_fixed(const SensorSpec& spec, double d_bar, const SynthOptions& opt = {});
FeasibilityReport synthesize_hybrid1(const SensorSpec& spec, double d_bar, const SynthOptions& opt = {});
FeasibilityReport synthesize_hybrid2(const SensorSpec& spec, double d_bar, const SynthOptions& opt = {});
FeasibilityReport synthesize_analog(const SensorSpec& spec, double d_bar, const SynthOptions& opt = {});

FeasibilityReport synthesize(PolicyClass cls, const SensorSpec& spec, double d_bar, const SynthOptions& opt = {});

/// Source side of the buffered classes: minimal mean source rate subject to
/// sum_q Pr(q) T^q <= budget and sum_q Pr(q) D^q <= d_bar. `rate` is +inf
/// when no finite-rate allocation exists.
struct SourceAllocation {
    std::vector<double> d;
    std::vector<double> ts;
    double rate = std::numeric_limits<double>::infinity();
};

SourceAllocation optimize_source(const SensorSpec& spec, double d_bar, double budget,
                                 std::size_t max_alternations = 200);

/// The synthesize_do search with the source allocations of its alpha grid
/// computed once, so that many channel weightings can be screened cheaply.
class DoSearch {
public:
    DoSearch(const SensorSpec& spec, double d_bar, const SynthOptions& opt = {});

    /// Best backed-off rate margin over the alpha grid alone.
    double grid_margin(const std::vector<double>& channel_weights) const;
    /// Grid search plus golden refinement, certified by check_do_weighted.
    FeasibilityReport synthesize(const std::vector<double>& channel_weights) const;

    const SensorSpec& spec() const { return spec_; }
    double d_bar() const { return d_bar_; }

private:
    SourceAllocation fresh_source(double alpha) const;
    SourceAllocation source_at(double alpha) const;
    double margin(const std::vector<double>& w, double alpha, const SourceAllocation& src,
                  std::vector<double>* tt_out) const;

    SensorSpec spec_;
    double d_bar_;
    SynthOptions opt_;
    double mean_e_ = 0.0, eps_ = 0.0, delta_ = 0.0, d_target_ = 0.0;
    std::vector<double> grid_;
    std::vector<SourceAllocation> src_;
};

/// Smallest d_bar (to within 1e-4) for which synthesize_do succeeds, or
/// nullopt if even d_max is not supportable.
std::optional<double> min_feasible_distortion(const SensorSpec& spec, const SynthOptions& opt = {},
                                              double tol = 1e-4);

/// Lowest mean distortion any finite-rate source policy can reach.
double global_distortion_floor(const SensorSpec& spec);

} // namespace ehsc
