#ifndef VESAR_RNG_HPP
#define VESAR_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace vesar {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream, index). The same triple always yields
/// the same sequence, independent of how work is split across threads.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

// The transforms below are written out rather than taken from <random> so
// that draws are identical across standard library implementations.

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

inline double standard_normal(Rng& rng)
{
    const double u1 = 1.0 - uniform01(rng); // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Log-normal with the given arithmetic mean and log-scale standard deviation.
inline double lognormal_with_mean(Rng& rng, double mean, double log_sd)
{
    const double mu = std::log(mean) - 0.5 * log_sd * log_sd;
    return std::exp(mu + log_sd * standard_normal(rng));
}

/// Number of failures before the first success of a Bernoulli(p) sequence.
inline double geometric_failures(Rng& rng, double p)
{
    if (p >= 1.0) {
        return 0.0;
    }
    const double u = 1.0 - uniform01(rng);
    return std::floor(std::log(u) / std::log1p(-p));
}

} // namespace vesar

#endif
