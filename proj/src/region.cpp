#include "ehsc/region.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ehsc/csv.hpp"
#include "ehsc/parallel.hpp"

namespace ehsc {

std::size_t RegionGrid::feasible_count() const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const RegionPoint& p) { return p.feasible; }));
}

SensorSpec spec_at(const RegionSetup& setup, double a1, double a2) {
    SensorSpec s = setup.base;
    if (setup.kind == AxisKind::Snr) {
        s.env.q_support = {a1};
        s.env.q_pmf = {1.0};
        s.env.h_support = {a2};
        s.env.h_pmf = {1.0};
    } else {
        if (s.env.n_q() != 2 || s.env.n_h() != 2) throw SpecError("probability sweeps need two-state supports");
        s.env.q_pmf = {a1, 1.0 - a1};
        s.env.h_pmf = {a2, 1.0 - a2};
    }
    return s;
}

RegionGrid region_sweep(const RegionSetup& setup, PolicyClass cls, const SynthOptions& opt, bool parallel) {
    RegionGrid grid;
    grid.axis1 = setup.axis1;
    grid.axis2 = setup.axis2;
    const std::size_t n2 = setup.axis2.size();
    grid.points.resize(setup.axis1.size() * n2);
    for_each_index(grid.points.size(), parallel, [&](std::size_t k) {
        RegionPoint& p = grid.points[k];
        p.axis1 = setup.axis1[k / n2];
        p.axis2 = setup.axis2[k % n2];
        const FeasibilityReport rep = synthesize(cls, spec_at(setup, p.axis1, p.axis2), setup.d_bar, opt);
        p.feasible = rep.feasible;
        p.margins = rep.margins;
    });
    return grid;
}

bool contains(const RegionGrid& outer, const RegionGrid& inner) {
    if (outer.points.size() != inner.points.size()) return false;
    for (std::size_t k = 0; k < inner.points.size(); ++k) {
        if (inner.points[k].feasible && !outer.points[k].feasible) return false;
    }
    return true;
}

std::size_t extra_points(const RegionGrid& outer, const RegionGrid& inner) {
    std::size_t n = 0;
    for (std::size_t k = 0; k < std::min(outer.points.size(), inner.points.size()); ++k) {
        if (outer.points[k].feasible && !inner.points[k].feasible) ++n;
    }
    return n;
}

void write_region_csv(std::ostream& out, const RegionGrid& grid) {
    out << "axis1,axis2,feasible,rate_margin,dist_margin,energy_margin_src,energy_margin_ch\n";
    for (const auto& p : grid.points) {
        csv::Row row(out);
        row << p.axis1 << p.axis2 << p.feasible << p.margins.rate << p.margins.distortion << p.margins.energy_source
            << p.margins.energy_channel;
    }
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        g[i] = std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo)));
    }
    return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        g[i] = lo + t * (hi - lo);
    }
    return g;
}

} // namespace ehsc
