// Exact floating-point bookkeeping for energy accounting.
//
// The simulator rounds every buffer update toward -inf, so the stored
// energy is always a lower bound on the exact residual. ExactAccumulator
// sums nonnegative doubles without rounding so the cumulative budget can
// be checked with zero tolerance.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace ehsc::exact {

/// Knuth TwoSum: a + b == sum + err exactly.
inline std::pair<double, double> two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

/// a + b rounded toward -inf.
inline double add_down(double a, double b) {
    auto [s, err] = two_sum(a, b);
    if (err < 0.0) s = std::nextafter(s, -std::numeric_limits<double>::infinity());
    return s;
}

/// a - b rounded toward -inf.
inline double sub_down(double a, double b) { return add_down(a, -b); }

/// True iff a + b <= limit holds in exact arithmetic.
inline bool sum_at_most(double a, double b, double limit) {
    auto [s, err] = two_sum(a, b);
    if (s < limit) return true;
    if (s > limit) return false;
    return err <= 0.0;
}

/// Fixed-point accumulator spanning the whole double range; never rounds.
/// Accepts nonnegative finite values only.
class ExactAccumulator {
public:
    void add(double x) {
        if (!(x > 0.0)) return; // zeros and NaN contribute nothing
        int exp2 = 0;
        const double frac = std::frexp(x, &exp2); // x = frac * 2^exp2, frac in [0.5, 1)
        auto mant = static_cast<std::uint64_t>(std::ldexp(frac, 53));
        int pos = exp2 - 53 + kBias;
        if (pos < 0) { // subnormal tail: the dropped bits are zero by construction
            mant >>= -pos;
            pos = 0;
        }
        const int limb = pos / 64;
        const int shift = pos % 64;
        add_at(limb, mant << shift);
        if (shift != 0) add_at(limb + 1, mant >> (64 - shift));
    }

    /// Three-way comparison of the exact sums.
    friend int compare(const ExactAccumulator& a, const ExactAccumulator& b) {
        for (int i = kLimbs - 1; i >= 0; --i) {
            if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i] ? -1 : 1;
        }
        return 0;
    }

    /// Nearest double to the exact sum (for reporting only).
    double approx() const {
        double v = 0.0;
        for (int i = kLimbs - 1; i >= 0; --i) {
            if (limbs_[i] != 0) v += std::ldexp(static_cast<double>(limbs_[i]), 64 * i - kBias);
        }
        return v;
    }

private:
    static constexpr int kBias = 1074 + 53;
    static constexpr int kLimbs = 36;

    void add_at(int limb, std::uint64_t v) {
        while (v != 0 && limb < kLimbs) {
            const std::uint64_t before = limbs_[limb];
            limbs_[limb] = before + v;
            v = limbs_[limb] < before ? 1 : 0;
            ++limb;
        }
    }

    std::array<std::uint64_t, kLimbs> limbs_{};
};

} // namespace ehsc::exact
