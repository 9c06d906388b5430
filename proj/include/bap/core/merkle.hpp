#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "bap/core/types.hpp"

namespace bap {

inline Hash hash_pair(const Hash& left, const Hash& right) {
    std::array<Byte, 64> buf;
    std::copy(left.bytes.begin(), left.bytes.end(), buf.begin());
    std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + 32);
    return hash_bytes(buf);
}

//! Bitcoin-style Merkle root: pairwise hashing, last node duplicated on odd
//! levels, a single leaf is its own root.
inline Hash merkle_root(std::span<const Hash> leaves) {
    if (leaves.empty()) throw std::invalid_argument("merkle_root of an empty list (a block always has a coinbase)");
    std::vector<Hash> level(leaves.begin(), leaves.end());
    while (level.size() > 1) {
        if (level.size() % 2 == 1) level.push_back(level.back());
        std::vector<Hash> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2)
            next.push_back(hash_pair(level[i], level[i + 1]));
        level = std::move(next);
    }
    return level.front();
}

//! Leaves of a block's tree: coinbase txid followed by the listed txids in order.
inline std::vector<Hash> block_leaves(const Hash& coinbase_txid, std::span<const Hash> tx_hashes) {
    std::vector<Hash> leaves;
    leaves.reserve(tx_hashes.size() + 1);
    leaves.push_back(coinbase_txid);
    leaves.insert(leaves.end(), tx_hashes.begin(), tx_hashes.end());
    return leaves;
}

inline std::vector<Hash> txids_of(std::span<const Transaction> txs) {
    std::vector<Hash> ids;
    ids.reserve(txs.size());
    for (const auto& tx : txs)
        ids.push_back(txid(tx));
    return ids;
}

inline Hash compute_merkle_root(const CoinbaseTransaction& coinbase, std::span<const Transaction> txs) {
    const auto ids = txids_of(txs);
    return merkle_root(block_leaves(txid(coinbase), ids));
}

inline Hash compute_merkle_root(const Block& block) {
    return compute_merkle_root(block.coinbase, block.transactions);
}

} // namespace bap
