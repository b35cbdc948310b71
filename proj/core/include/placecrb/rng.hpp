#pragma once

#include <cmath>
#include <cstdint>

namespace placecrb {

/// Counter-seedable splitmix64 stream with Box-Muller normals. Substreams
/// derived from (seed, counter...) are independent of thread scheduling,
/// which is what makes the Monte Carlo modules reproducible under
/// parallelism.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {
        // burn-in so nearby seeds decorrelate
        next_u64();
        next_u64();
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static RngStream substream(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
        return RngStream(mix(mix(mix(seed, a), b), c));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1], 53-bit resolution.
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// N(0, stddev^2); stddev <= 0 yields exactly 0 (noise-free guard path).
    double next_normal(double stddev) {
        if (!(stddev > 0.0)) return 0.0;
        const double u1 = next_double();
        const double u2 = next_double();
        return stddev * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace placecrb
