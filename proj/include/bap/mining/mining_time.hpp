#pragma once

#include <cmath>
#include <stdexcept>

#include "bap/core/random.hpp"
#include "bap/core/types.hpp"

namespace bap {

struct HashRate {
    double hashes_per_second;

    explicit HashRate(double hps) : hashes_per_second(hps) {
        if (!(hps > 0.0) || !std::isfinite(hps)) throw std::invalid_argument("hash rate must be positive and finite");
    }
};

//! Expected seconds to meet the target: 2^bits / rate.
inline double expected_mining_time(HashRate rate, CompactTarget target) {
    return std::ldexp(1.0, target.leading_zero_bits) / rate.hashes_per_second;
}

//! Time to the next solution under independent hash trials (exponential law).
inline double sample_mining_time(HashRate rate, CompactTarget target, RandomStream& rng) {
    return rng.exponential(expected_mining_time(rate, target));
}

} // namespace bap
