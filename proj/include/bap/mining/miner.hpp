#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bap/core/merkle.hpp"
#include "bap/core/size_model.hpp"
#include "bap/core/types.hpp"
#include "bap/mining/pow.hpp"

namespace bap {

//! Everything a miner commits to before searching. The transaction list is
//! fixed at construction; only nonce, extraNonce and timestamp vary later.
class BlockTemplate {
public:
    BlockTemplate(Hash prev_block_hash, CoinbaseTransaction coinbase, std::vector<Transaction> transactions,
                  CompactTarget difficulty_target, std::int32_t version = 1, std::int64_t base_timestamp = 0,
                  std::uint64_t max_block_size_bytes = kDefaultMaxBlockSizeBytes)
        : prev_block_hash_(prev_block_hash),
          coinbase_(std::move(coinbase)),
          transactions_(std::move(transactions)),
          difficulty_target_(difficulty_target),
          version_(version),
          base_timestamp_(base_timestamp) {
        std::uint64_t body = 0;
        for (const auto& tx : transactions_)
            body += tx.nominal_size_bytes;
        if (block_size_for(coinbase_.nominal_size_bytes, body) > max_block_size_bytes)
            throw std::invalid_argument("block template exceeds the maximum block size");
        tx_hashes_ = txids_of(transactions_);
    }

    [[nodiscard]] const Hash& prev_block_hash() const { return prev_block_hash_; }
    [[nodiscard]] const CoinbaseTransaction& coinbase() const { return coinbase_; }
    [[nodiscard]] std::span<const Transaction> transactions() const { return transactions_; }
    [[nodiscard]] std::span<const Hash> tx_hashes() const { return tx_hashes_; }
    [[nodiscard]] CompactTarget difficulty_target() const { return difficulty_target_; }
    [[nodiscard]] std::int32_t version() const { return version_; }
    [[nodiscard]] std::int64_t base_timestamp() const { return base_timestamp_; }

private:
    Hash prev_block_hash_;
    CoinbaseTransaction coinbase_;
    std::vector<Transaction> transactions_;
    std::vector<Hash> tx_hashes_;
    CompactTarget difficulty_target_;
    std::int32_t version_;
    std::int64_t base_timestamp_;
};

struct MiningBudget {
    std::uint64_t max_hash_evaluations;

    explicit MiningBudget(std::uint64_t evaluations) : max_hash_evaluations(evaluations) {
        if (evaluations == 0) throw std::invalid_argument("mining budget must be positive");
    }
};

struct MiningResult {
    std::optional<Block> block;
    std::uint64_t hash_evaluations = 0;
};

//! Deterministic proof-of-work search. Order: nonce 0..2^32-1 for the
//! template's extraNonce, then extraNonce+1 and the nonce restarts. The
//! timestamp stays at the template's base timestamp.
inline MiningResult mine(const BlockTemplate& tmpl, MiningBudget budget) {
    MiningResult result;
    CoinbaseTransaction coinbase = tmpl.coinbase();
    BlockHeader header;
    header.version = tmpl.version();
    header.prev_block_hash = tmpl.prev_block_hash();
    header.timestamp = tmpl.base_timestamp();
    header.difficulty_target = tmpl.difficulty_target();

    auto leaves = block_leaves(txid(coinbase), tmpl.tx_hashes());
    while (true) {
        leaves.front() = txid(coinbase);
        header.merkle_root = merkle_root(leaves);
        for (std::uint64_t nonce = 0; nonce <= std::numeric_limits<std::uint32_t>::max(); ++nonce) {
            if (result.hash_evaluations == budget.max_hash_evaluations) return result;
            header.nonce = static_cast<std::uint32_t>(nonce);
            ++result.hash_evaluations;
            if (check_pow(header)) {
                result.block = Block{header, coinbase, {tmpl.transactions().begin(), tmpl.transactions().end()}};
                return result;
            }
        }
        ++coinbase.extra_nonce;
    }
}

} // namespace bap
