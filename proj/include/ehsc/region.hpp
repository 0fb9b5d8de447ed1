// Achievable-region sweeps over (q, h) SNR grids or worst-case probability
// grids, with an OpenMP path and a serial reference path.
#pragma once

#include <iosfwd>
#include <vector>

#include "ehsc/feasibility.hpp"

namespace ehsc {

enum class AxisKind {
    Snr,              // constant states: axis1 = q, axis2 = h
    WorstProbability, // two-state supports (worst first): axis1 = p_w^q, axis2 = p_w^h
};

struct RegionSetup {
    SensorSpec base;
    AxisKind kind = AxisKind::Snr;
    std::vector<double> axis1;
    std::vector<double> axis2;
    double d_bar = 0.8;
};

struct RegionPoint {
    double axis1 = 0.0;
    double axis2 = 0.0;
    bool feasible = false;
    Margins margins;
};

/// Row-major in axis1.
struct RegionGrid {
    std::vector<double> axis1;
    std::vector<double> axis2;
    std::vector<RegionPoint> points;

    const RegionPoint& at(std::size_t i, std::size_t j) const { return points[i * axis2.size() + j]; }
    std::size_t feasible_count() const;
};

/// Sensor description at one grid point.
SensorSpec spec_at(const RegionSetup& setup, double a1, double a2);

RegionGrid region_sweep(const RegionSetup& setup, PolicyClass cls, const SynthOptions& opt = {},
                        bool parallel = true);

/// True iff every point feasible in `inner` is feasible in `outer`.
bool contains(const RegionGrid& outer, const RegionGrid& inner);

/// Points feasible in `outer` but not in `inner`.
std::size_t extra_points(const RegionGrid& outer, const RegionGrid& inner);

/// axis1,axis2,feasible,rate_margin,dist_margin,energy_margin_src,energy_margin_ch
void write_region_csv(std::ostream& out, const RegionGrid& grid);

std::vector<double> log_grid(double lo, double hi, std::size_t n);
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

} // namespace ehsc
