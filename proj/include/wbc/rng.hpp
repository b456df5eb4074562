#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace wbc {

// Randomized code in this library draws through the helpers below instead of
// the <random> distribution classes, whose output sequences are
// implementation-defined. mt19937_64 itself is fully specified, so seeded
// runs reproduce byte-for-byte across standard libraries.

using Rng = std::mt19937_64;

/// Derive an independent generator for (seed, stream_id). Streams for
/// different ids do not overlap in practice, so adding trees/images to a run
/// never reshuffles earlier ones.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream_id = 0,
                       std::uint64_t substream_id = 0) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
        static_cast<std::uint32_t>(substream_id), static_cast<std::uint32_t>(substream_id >> 32)};
    return Rng(seq);
}

/// Unbiased uniform draw from [0, n). n must be > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t span = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % span);
}

/// Uniform double in [0, 1), 53 bits of precision.
inline double uniform_double(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_range(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_double(rng);
}

/// One N(mean, sd) draw via Box-Muller (cosine branch only).
inline double normal_sample(Rng& rng, double mean = 0.0, double sd = 1.0) {
    double u1 = uniform_double(rng);
    double u2 = uniform_double(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * M_PI * u2);
}

/// Fisher-Yates shuffle using uniform_index.
template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_index(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace wbc
