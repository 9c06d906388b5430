#pragma once

#include <concepts>
#include <memory>
#include <variant>
#include <vector>

#include "bap/core/size_model.hpp"
#include "bap/protocol/advert_registry.hpp"
#include "bap/protocol/mempool.hpp"
#include "bap/protocol/messages.hpp"

namespace bap {

//! How a miner fills a block from its pool.
struct SelectionPolicy {
    std::uint64_t max_block_size_bytes = kDefaultMaxBlockSizeBytes;
    std::uint32_t coinbase_size_bytes = kDefaultCoinbaseSizeBytes;
};

//! Anything that resolves a txid to a transaction (or null).
template <class F>
concept TxLookup = requires(const F& f, const Hash& h) {
    { f(h) } -> std::convertible_to<const Transaction*>;
};

inline auto lookup_in(const Mempool& pool) {
    return [&pool](const Hash& h) { return pool.get(h); };
}

//! Greedy first-fit over the pool in arrival order. The pool is already
//! conflict-free, so no two selected transactions spend the same outpoint.
inline Advert make_advert(const Address& address, const Hash& tip, const Mempool& mempool,
                          const SelectionPolicy& policy = {}) {
    Advert advert{address, {}, tip};
    std::uint64_t size = block_size_for(policy.coinbase_size_bytes, 0);
    mempool.for_each([&](const Hash& id, const Transaction& tx) {
        if (size + tx.nominal_size_bytes <= policy.max_block_size_bytes) {
            advert.tx_hashes.push_back(id);
            size += tx.nominal_size_bytes;
        }
        return size < policy.max_block_size_bytes;
    });
    return advert;
}

//! Advertised hashes the lookup cannot resolve, in advert order.
template <TxLookup Lookup>
std::vector<Hash> missing_txs(const Advert& advert, const Lookup& lookup) {
    std::vector<Hash> missing;
    for (const auto& h : advert.tx_hashes)
        if (!lookup(h)) missing.push_back(h);
    return missing;
}

inline std::vector<Hash> missing_txs(const Advert& advert, const Mempool& mempool) {
    return missing_txs(advert, lookup_in(mempool));
}

inline BlockSeed make_block_seed(const Block& block) {
    return BlockSeed{block.coinbase.coinbase_address, block.coinbase, block.header};
}

struct ReconstructFailure {
    enum class Kind { NO_MATCHING_ADVERT, MISSING_TXS };
    Kind kind;
    std::vector<Hash> missing;
};

using ReconstructResult = std::variant<Block, ReconstructFailure>;

//! Rebuilds a block from its seed and the advert registered for the seed's
//! (address, prev hash). Merkle verification is left to validate_block.
template <TxLookup Lookup>
ReconstructResult reconstruct_block(const BlockSeed& seed, const AdvertRegistry& registry, const Lookup& lookup) {
    const Advert* advert = registry.find(seed.coinbase_address, seed.header.prev_block_hash);
    if (!advert) return ReconstructFailure{ReconstructFailure::Kind::NO_MATCHING_ADVERT, {}};
    Block block{seed.header, seed.coinbase, {}};
    block.transactions.reserve(advert->tx_hashes.size());
    std::vector<Hash> missing;
    for (const auto& h : advert->tx_hashes) {
        if (const Transaction* tx = lookup(h))
            block.transactions.push_back(*tx);
        else
            missing.push_back(h);
    }
    if (!missing.empty()) return ReconstructFailure{ReconstructFailure::Kind::MISSING_TXS, std::move(missing)};
    return block;
}

inline ReconstructResult reconstruct_block(const BlockSeed& seed, const AdvertRegistry& registry, const Mempool& mempool) {
    return reconstruct_block(seed, registry, lookup_in(mempool));
}

} // namespace bap
