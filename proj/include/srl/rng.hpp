#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace srl {

// Seeded generator used wherever reproducibility matters. The mt19937_64
// output sequence is pinned by the standard; the bounded/real draws below
// avoid std::uniform_*_distribution, whose results vary between standard
// library implementations.
class RandomGen {
public:
    explicit RandomGen(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased draw in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(uniform_int(n)); }

    // [0, 1) with 53 bits of precision.
    double uniform_real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

private:
    std::mt19937_64 engine_;
};

// splitmix64 finalizer; derives independent sub-streams from one master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace srl
