#pragma once

#include <cstdint>

#include "bap/core/types.hpp"

namespace bap {

// Modeled wire sizes. These are deliberately independent of the in-memory
// encoding so scenarios can pin transaction sizes to a nominal figure.
inline constexpr std::uint64_t kHeaderWireBytes = 80;
inline constexpr std::uint64_t kAddressWireBytes = 20;
inline constexpr std::uint64_t kHashWireBytes = 32;
inline constexpr std::uint64_t kFramingBytes = 8;

inline std::uint64_t serialized_size(const Transaction& tx) { return tx.nominal_size_bytes; }

inline std::uint64_t serialized_size(const Block& block) {
    std::uint64_t total = kHeaderWireBytes + block.coinbase.nominal_size_bytes;
    for (const auto& tx : block.transactions)
        total += tx.nominal_size_bytes;
    return total;
}

//! Size of a block with the given coinbase and a body summing to body_bytes.
inline constexpr std::uint64_t block_size_for(std::uint64_t coinbase_bytes, std::uint64_t body_bytes) {
    return kHeaderWireBytes + coinbase_bytes + body_bytes;
}

} // namespace bap
