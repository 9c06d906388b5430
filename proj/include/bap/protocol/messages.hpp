#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "bap/core/size_model.hpp"
#include "bap/core/types.hpp"

namespace bap {

//! Pre-mining announcement: who mines (c), what goes in (L), on top of what (h).
struct Advert {
    Address coinbase_address;
    std::vector<Hash> tx_hashes;
    Hash prev_block_hash;

    bool operator==(const Advert&) const = default;
};

//! Post-mining compact relay unit.
struct BlockSeed {
    Address coinbase_address;
    CoinbaseTransaction coinbase;
    BlockHeader header;

    bool operator==(const BlockSeed&) const = default;
};

struct TxRequest {
    std::vector<Hash> tx_hashes;
};

struct TxResponse {
    std::vector<Transaction> transactions;
};

inline std::uint64_t serialized_size(const Advert& a) {
    return kFramingBytes + kAddressWireBytes + kHashWireBytes + kHashWireBytes * a.tx_hashes.size();
}

inline std::uint64_t serialized_size(const BlockSeed& s) {
    return kAddressWireBytes + s.coinbase.nominal_size_bytes + kHeaderWireBytes;
}

inline std::uint64_t serialized_size(const TxRequest& r) {
    return kHashWireBytes * r.tx_hashes.size() + kFramingBytes;
}

inline std::uint64_t serialized_size(const TxResponse& r) {
    std::uint64_t total = 0;
    for (const auto& tx : r.transactions)
        total += tx.nominal_size_bytes;
    return total;
}

inline void encode(Writer& w, const Advert& a) {
    w.blob(a.coinbase_address).blob(a.prev_block_hash).list_size(a.tx_hashes.size());
    for (const auto& h : a.tx_hashes)
        w.blob(h);
}

inline void encode(Writer& w, const BlockSeed& s) {
    w.blob(s.coinbase_address);
    encode(w, s.coinbase);
    encode(w, s.header);
}

inline void encode(Writer& w, const TxRequest& r) {
    w.list_size(r.tx_hashes.size());
    for (const auto& h : r.tx_hashes)
        w.blob(h);
}

inline void encode(Writer& w, const TxResponse& r) {
    w.list_size(r.transactions.size());
    for (const auto& tx : r.transactions)
        encode(w, tx);
}

//! Empty string if the advert is well-formed.
inline std::string advert_error(const Advert& a) {
    std::set<Hash> seen;
    for (const auto& h : a.tx_hashes)
        if (!seen.insert(h).second) return "advert lists a transaction twice";
    return {};
}

//! Empty string if the seed is internally consistent (PoW is checked on receipt).
inline std::string seed_error(const BlockSeed& s) {
    if (s.coinbase.coinbase_address != s.coinbase_address) return "seed coinbase pays a different address";
    return {};
}

} // namespace bap
