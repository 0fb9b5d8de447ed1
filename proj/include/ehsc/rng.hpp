// Seedable, splittable random source with portable sampling routines.
#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ehsc {

class Rng {
public:
    /// Stream `stream` of seed `seed`; distinct streams are independent.
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x6568u /* "eh" */};
        engine_.seed(seq);
    }

    Rng split(std::uint64_t stream) const { return Rng(seed_, stream); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Index drawn from a probability vector (need not be exactly normalized).
    std::size_t categorical(std::span<const double> pmf) {
        const double u = uniform01();
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            if (pmf[i] <= 0.0) continue;
            acc += pmf[i];
            last_positive = i;
            if (u < acc) return i;
        }
        return last_positive;
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

} // namespace ehsc
