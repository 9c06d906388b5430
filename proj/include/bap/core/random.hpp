#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace bap {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

//! Deterministic random stream. mt19937_64's output sequence is fixed by the
//! standard; the transforms below are written out so that results do not
//! depend on the standard library's distribution implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    //! Independent child stream, e.g. one per node.
    [[nodiscard]] RandomStream fork(std::uint64_t stream_id) const {
        return RandomStream(splitmix64(seed_material() ^ splitmix64(stream_id + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    //! Uniform on [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    //! Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("below(0)");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    //! Exponential sample by inversion.
    double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

private:
    std::uint64_t seed_material() const {
        auto copy = engine_;
        return copy();
    }

    std::mt19937_64 engine_;
};

} // namespace bap
