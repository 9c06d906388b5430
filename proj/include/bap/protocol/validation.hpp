#pragma once

#include <string_view>

#include "bap/core/merkle.hpp"
#include "bap/core/size_model.hpp"
#include "bap/mining/pow.hpp"
#include "bap/protocol/advert_registry.hpp"
#include "bap/protocol/chain_state.hpp"

namespace bap {

enum class VerdictReason {
    OK,
    NO_MATCHING_ADVERT,
    COINBASE_MISMATCH,
    WRONG_PREV_HASH,
    POW_FAIL,
    TX_LIST_MISMATCH,
    MERKLE_MISMATCH,
    MISSING_TXS,
    INVALID_TX,
};

inline std::string_view to_string(VerdictReason r) {
    switch (r) {
        case VerdictReason::OK: return "OK";
        case VerdictReason::NO_MATCHING_ADVERT: return "NO_MATCHING_ADVERT";
        case VerdictReason::COINBASE_MISMATCH: return "COINBASE_MISMATCH";
        case VerdictReason::WRONG_PREV_HASH: return "WRONG_PREV_HASH";
        case VerdictReason::POW_FAIL: return "POW_FAIL";
        case VerdictReason::TX_LIST_MISMATCH: return "TX_LIST_MISMATCH";
        case VerdictReason::MERKLE_MISMATCH: return "MERKLE_MISMATCH";
        case VerdictReason::MISSING_TXS: return "MISSING_TXS";
        case VerdictReason::INVALID_TX: return "INVALID_TX";
    }
    return "?";
}

struct ValidationVerdict {
    VerdictReason reason = VerdictReason::OK;

    [[nodiscard]] bool accepted() const { return reason == VerdictReason::OK; }
    bool operator==(const ValidationVerdict&) const = default;
};

namespace detail {

// Transactions must connect to the parent's UTXO view without double spends,
// and the block must fit the size cap.
inline bool block_body_valid(const Block& block, std::span<const Hash> ids, const ChainState& chain) {
    if (serialized_size(block) > chain.params().max_block_size_bytes) return false;
    if (!structural_error(block.coinbase).empty()) return false;
    UtxoOverlay parent_view = chain.view_at(block.header.prev_block_hash);
    UtxoOverlay scratch(parent_view);
    return apply_block(block, ids, scratch, nullptr);
}

} // namespace detail

//! Acceptance rules for a block relayed under the advertisement protocol.
//! `claimed_address` is the address the block was announced under (the seed's
//! coinbase address). Checks run in a fixed order and the first failure is
//! reported:
//!   1. an advert is registered for (claimed address, prev hash)
//!   2. the coinbase pays the advertised address
//!   3. the previous block is known
//!   4. the header meets its difficulty target
//!   5. the transaction ids equal the advertised list, order included
//!   6. the header's Merkle root matches the recomputed one
//!   7. every transaction is valid against the parent's UTXO view
inline ValidationVerdict validate_block(const Block& block, const Address& claimed_address,
                                        const AdvertRegistry& registry, const ChainState& chain) {
    const Advert* advert = registry.find(claimed_address, block.header.prev_block_hash);
    if (!advert) return {VerdictReason::NO_MATCHING_ADVERT};
    if (block.coinbase.coinbase_address != advert->coinbase_address) return {VerdictReason::COINBASE_MISMATCH};
    if (!chain.knows(block.header.prev_block_hash)) return {VerdictReason::WRONG_PREV_HASH};
    if (!check_pow(block.header)) return {VerdictReason::POW_FAIL};
    const auto ids = txids_of(block.transactions);
    if (ids != advert->tx_hashes) return {VerdictReason::TX_LIST_MISMATCH};
    if (merkle_root(block_leaves(txid(block.coinbase), ids)) != block.header.merkle_root)
        return {VerdictReason::MERKLE_MISMATCH};
    if (!detail::block_body_valid(block, ids, chain)) return {VerdictReason::INVALID_TX};
    return {VerdictReason::OK};
}

inline ValidationVerdict validate_block(const Block& block, const AdvertRegistry& registry, const ChainState& chain) {
    return validate_block(block, block.coinbase.coinbase_address, registry, chain);
}

//! Rules for a block relayed in full without an advert (baseline relay):
//! the advert checks (1, 2, 5) do not apply.
inline ValidationVerdict validate_full_block(const Block& block, const ChainState& chain) {
    if (!chain.knows(block.header.prev_block_hash)) return {VerdictReason::WRONG_PREV_HASH};
    if (!check_pow(block.header)) return {VerdictReason::POW_FAIL};
    const auto ids = txids_of(block.transactions);
    if (merkle_root(block_leaves(txid(block.coinbase), ids)) != block.header.merkle_root)
        return {VerdictReason::MERKLE_MISMATCH};
    if (!detail::block_body_valid(block, ids, chain)) return {VerdictReason::INVALID_TX};
    return {VerdictReason::OK};
}

} // namespace bap
