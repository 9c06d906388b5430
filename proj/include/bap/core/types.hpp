#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bap/core/hash.hpp"
#include "bap/core/serialize.hpp"

namespace bap {

inline constexpr std::uint32_t kDefaultTxSizeBytes = 500;
inline constexpr std::uint32_t kDefaultCoinbaseSizeBytes = 200;
inline constexpr std::uint64_t kDefaultMaxBlockSizeBytes = 1'000'000;

// Domain-separation tags prefixed to transaction encodings.
inline constexpr std::uint8_t kTxTag = 0x01;
inline constexpr std::uint8_t kCoinbaseTag = 0x02;

struct OutPoint {
    Hash txid;
    std::uint32_t index = 0;

    auto operator<=>(const OutPoint&) const = default;
};

struct TxOut {
    Address address;
    std::uint64_t value = 0;

    bool operator==(const TxOut&) const = default;
};

struct Transaction {
    std::vector<OutPoint> inputs;
    std::vector<TxOut> outputs;
    std::uint32_t nominal_size_bytes = kDefaultTxSizeBytes;

    bool operator==(const Transaction&) const = default;
};

struct CoinbaseTransaction {
    Address coinbase_address;
    std::uint64_t reward = 0;
    std::uint64_t extra_nonce = 0;
    std::uint32_t nominal_size_bytes = kDefaultCoinbaseSizeBytes;

    bool operator==(const CoinbaseTransaction&) const = default;
};

//! Simplified difficulty: the header hash must start with this many zero bits.
struct CompactTarget {
    int leading_zero_bits = 0;

    static CompactTarget of(int bits) {
        if (bits < 0 || bits > 256) throw std::invalid_argument("leading_zero_bits must be in [0, 256]");
        return CompactTarget{bits};
    }

    [[nodiscard]] bool accepts(const Hash& h) const {
        if (leading_zero_bits >= 256) return false;
        return bap::leading_zero_bits(h) >= leading_zero_bits;
    }

    auto operator<=>(const CompactTarget&) const = default;
};

struct BlockHeader {
    std::int32_t version = 1;
    Hash prev_block_hash;
    Hash merkle_root;
    std::int64_t timestamp = 0;
    CompactTarget difficulty_target;
    std::uint32_t nonce = 0;

    bool operator==(const BlockHeader&) const = default;
};

struct Block {
    BlockHeader header;
    CoinbaseTransaction coinbase;
    std::vector<Transaction> transactions;

    bool operator==(const Block&) const = default;
};

// ---- canonical encodings ------------------------------------------------

inline void encode(Writer& w, const Transaction& tx) {
    w.u8(kTxTag).list_size(tx.inputs.size());
    for (const auto& in : tx.inputs)
        w.blob(in.txid).u32(in.index);
    w.list_size(tx.outputs.size());
    for (const auto& out : tx.outputs)
        w.blob(out.address).u64(out.value);
    w.u32(tx.nominal_size_bytes);
}

inline void encode(Writer& w, const CoinbaseTransaction& cb) {
    w.u8(kCoinbaseTag).blob(cb.coinbase_address).u64(cb.reward).u64(cb.extra_nonce).u32(cb.nominal_size_bytes);
}

inline void encode(Writer& w, const BlockHeader& h) {
    w.i32(h.version)
        .blob(h.prev_block_hash)
        .blob(h.merkle_root)
        .i64(h.timestamp)
        .u16(static_cast<std::uint16_t>(h.difficulty_target.leading_zero_bits))
        .u32(h.nonce);
}

template <class T>
Bytes serialize(const T& value) {
    Writer w;
    encode(w, value);
    return std::move(w).bytes();
}

inline Hash txid(const Transaction& tx) { return hash_bytes(serialize(tx)); }
inline Hash txid(const CoinbaseTransaction& cb) { return hash_bytes(serialize(cb)); }
inline Hash header_hash(const BlockHeader& h) { return hash_bytes(serialize(h)); }
inline Hash block_hash(const Block& b) { return header_hash(b.header); }

//! Smallest nominal size a transaction may declare: its canonical encoding length.
inline std::size_t serialization_floor(const Transaction& tx) {
    return 1 + 4 + 36 * tx.inputs.size() + 4 + 28 * tx.outputs.size() + 4;
}

inline std::size_t serialization_floor(const CoinbaseTransaction&) { return 1 + 20 + 8 + 8 + 4; }

//! Structural checks that do not need a UTXO view. Returns an empty string when fine.
inline std::string structural_error(const Transaction& tx) {
    if (tx.outputs.empty()) return "transaction has no outputs";
    if (tx.nominal_size_bytes < serialization_floor(tx)) return "nominal size below serialization floor";
    return {};
}

inline std::string structural_error(const CoinbaseTransaction& cb) {
    if (cb.nominal_size_bytes < serialization_floor(cb)) return "nominal size below serialization floor";
    return {};
}

} // namespace bap
