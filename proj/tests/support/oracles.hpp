#pragma once

// Independent reference implementations used to check the library, plus a
// small protocol fixture: a genesis chain funding a pool of random
// transactions.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "bap/mining/miner.hpp"
#include "bap/core/random.hpp"
#include "bap/protocol/node.hpp"

namespace bap::testkit {

// ---- Merkle ---------------------------------------------------------------

inline Hash oracle_pair(const Hash& a, const Hash& b) {
    Bytes buf(a.bytes.begin(), a.bytes.end());
    buf.insert(buf.end(), b.bytes.begin(), b.bytes.end());
    return hash_bytes(buf);
}

//! Recursive definition: the root of a list is the root of the list of its
//! pairwise parents, the last element paired with itself when the count is odd.
inline Hash oracle_merkle(std::vector<Hash> level) {
    if (level.size() == 1) return level.front();
    if (level.size() % 2) level.push_back(level.back());
    std::vector<Hash> up;
    for (std::size_t i = 0; i < level.size(); i += 2)
        up.push_back(oracle_pair(level[i], level[i + 1]));
    return oracle_merkle(std::move(up));
}

inline int oracle_zero_bits(const Hash& h) {
    int n = 0;
    for (int bit = 0; bit < 256; ++bit) {
        if ((h.bytes[static_cast<std::size_t>(bit / 8)] >> (7 - bit % 8)) & 1) break;
        ++n;
    }
    return n;
}

// ---- protocol fixture ---------------------------------------------------------

inline Address address_of(std::uint64_t n) {
    const Hash h = hash_bytes("test-address-" + std::to_string(n));
    Address a;
    std::copy_n(h.bytes.begin(), Address::size, a.bytes.begin());
    return a;
}

inline Block fixture_genesis() {
    Block g;
    g.coinbase = CoinbaseTransaction{Address{}, 0, 0, kDefaultCoinbaseSizeBytes};
    g.header.merkle_root = txid(g.coinbase);
    return g;
}

inline Hash fixture_funding_txid() { return hash_bytes("test-funding"); }

//! Funding outputs (funding_txid, i) for i < count, value 1000 each.
inline std::vector<std::pair<OutPoint, TxOut>> fixture_funding(std::uint32_t count) {
    std::vector<std::pair<OutPoint, TxOut>> out;
    for (std::uint32_t i = 0; i < count; ++i)
        out.emplace_back(OutPoint{fixture_funding_txid(), i}, TxOut{Address{}, 1000});
    return out;
}

//! Transaction spending the given funding indices into one or two outputs.
inline Transaction spend_funding(const std::vector<std::uint32_t>& indices, std::uint32_t size_bytes,
                                 std::uint64_t salt) {
    Transaction tx;
    for (auto i : indices)
        tx.inputs.push_back(OutPoint{fixture_funding_txid(), i});
    const std::uint64_t total = 1000 * indices.size();
    const std::uint64_t first = total / 2 + salt % (total / 2);
    tx.outputs.push_back(TxOut{address_of(salt), first});
    if (first < total) tx.outputs.push_back(TxOut{address_of(salt + 1), total - first});
    tx.nominal_size_bytes = size_bytes;
    return tx;
}

//! Random transactions over disjoint funding outputs, 1-3 inputs each.
inline std::vector<Transaction> random_transactions(RandomStream& rng, std::size_t count, std::uint32_t& next_funding,
                                                    std::uint32_t funding_limit) {
    std::vector<Transaction> txs;
    for (std::size_t k = 0; k < count && next_funding < funding_limit; ++k) {
        const auto inputs = std::min<std::uint32_t>(1 + static_cast<std::uint32_t>(rng.below(3)),
                                                    funding_limit - next_funding);
        std::vector<std::uint32_t> idx;
        for (std::uint32_t i = 0; i < inputs; ++i)
            idx.push_back(next_funding++);
        txs.push_back(spend_funding(idx, 200 + static_cast<std::uint32_t>(rng.below(400)), rng.next_u64()));
    }
    return txs;
}

//! Mines `advert` from the pool at `bits` zero bits.
inline Block mine_advert(const Advert& advert, const Mempool& pool, int bits, std::uint64_t extra_nonce = 0,
                         std::int64_t timestamp = 0) {
    std::vector<Transaction> txs;
    for (const auto& h : advert.tx_hashes)
        txs.push_back(*pool.get(h));
    const CoinbaseTransaction cb{advert.coinbase_address, 50, extra_nonce, kDefaultCoinbaseSizeBytes};
    const BlockTemplate tmpl(advert.prev_block_hash, cb, std::move(txs), CompactTarget::of(bits), 1, timestamp);
    auto r = mine(tmpl, MiningBudget(std::uint64_t{1} << 30));
    return *r.block;
}

//! Re-grinds the nonce of `block` until its header meets its target again.
inline void regrind(Block& block) {
    for (std::uint32_t n = 0;; ++n) {
        block.header.nonce = n;
        if (oracle_zero_bits(header_hash(block.header)) >= block.header.difficulty_target.leading_zero_bits) return;
    }
}

// ---- validation oracle ---------------------------------------------------------

//! The seven acceptance checks, applied in order with independent code. Only
//! supports blocks whose parent is the genesis of a chain funded by
//! `funding`, which is all the mutation suites need.
inline VerdictReason oracle_verdict(const Block& block, const Address& claimed, const AdvertRegistry& registry,
                                    const ChainState& chain,
                                    const std::vector<std::pair<OutPoint, TxOut>>& funding) {
    const Advert* advert = nullptr;
    for (const auto& [key, a] : registry.entries())
        if (a.coinbase_address == claimed && a.prev_block_hash == block.header.prev_block_hash) advert = &a;
    if (!advert) return VerdictReason::NO_MATCHING_ADVERT;
    if (block.coinbase.coinbase_address != advert->coinbase_address) return VerdictReason::COINBASE_MISMATCH;
    if (!chain.knows(block.header.prev_block_hash)) return VerdictReason::WRONG_PREV_HASH;
    if (oracle_zero_bits(header_hash(block.header)) < block.header.difficulty_target.leading_zero_bits ||
        block.header.difficulty_target.leading_zero_bits >= 256)
        return VerdictReason::POW_FAIL;
    std::vector<Hash> ids;
    for (const auto& tx : block.transactions)
        ids.push_back(txid(tx));
    if (ids != advert->tx_hashes) return VerdictReason::TX_LIST_MISMATCH;
    std::vector<Hash> leaves{txid(block.coinbase)};
    leaves.insert(leaves.end(), ids.begin(), ids.end());
    if (oracle_merkle(leaves) != block.header.merkle_root) return VerdictReason::MERKLE_MISMATCH;

    if (block.header.prev_block_hash != chain.genesis_hash()) throw std::logic_error("oracle: parent must be genesis");
    std::map<OutPoint, std::uint64_t> unspent;
    for (const auto& [op, out] : funding)
        unspent[op] = out.value;
    if (block.coinbase.nominal_size_bytes < 41) return VerdictReason::INVALID_TX;
    std::uint64_t size = 80 + block.coinbase.nominal_size_bytes;
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        const auto& tx = block.transactions[i];
        size += tx.nominal_size_bytes;
        if (tx.inputs.empty() || tx.outputs.empty()) return VerdictReason::INVALID_TX;
        if (tx.nominal_size_bytes < 13 + 36 * tx.inputs.size() + 28 * tx.outputs.size()) return VerdictReason::INVALID_TX;
        std::uint64_t in = 0, out = 0;
        std::set<OutPoint> seen;
        for (const auto& op : tx.inputs) {
            auto it = unspent.find(op);
            if (it == unspent.end() || !seen.insert(op).second) return VerdictReason::INVALID_TX;
            in += it->second;
        }
        for (const auto& o : tx.outputs)
            out += o.value;
        if (out > in) return VerdictReason::INVALID_TX;
        for (const auto& op : tx.inputs)
            unspent.erase(op);
        for (std::uint32_t k = 0; k < tx.outputs.size(); ++k)
            unspent[OutPoint{ids[i], k}] = tx.outputs[k].value;
    }
    if (size > chain.params().max_block_size_bytes) return VerdictReason::INVALID_TX;
    return VerdictReason::OK;
}

//! One honestly advertised and mined block on top of genesis, with the
//! registry and chain a receiving node would hold.
struct ValidBase {
    std::vector<std::pair<OutPoint, TxOut>> funding;
    ChainState chain;
    Mempool pool;
    AdvertRegistry registry;
    Advert advert;
    Block block;
    std::vector<Transaction> spare; // valid, unadvertised transactions
};

inline ValidBase make_valid_base(RandomStream& rng, std::uint32_t funding_count = 400) {
    auto funding = fixture_funding(funding_count);
    ValidBase b{funding, ChainState(fixture_genesis(), funding), {}, {}, {}, {}, {}};
    std::uint32_t next = 0;
    const auto pooled = 1 + rng.below(30);
    for (auto& tx : random_transactions(rng, pooled, next, funding_count / 2))
        b.pool.add(tx, b.chain.utxo());
    b.spare = random_transactions(rng, 5, next, funding_count);
    const Address miner = address_of(rng.next_u64());
    b.advert = make_advert(miner, b.chain.tip_hash(), b.pool);
    b.registry.register_advert(b.advert);
    b.block = mine_advert(b.advert, b.pool, 1 + static_cast<int>(rng.below(8)), rng.below(4), static_cast<std::int64_t>(rng.below(1000)));
    return b;
}

// ---- mutation classes ---------------------------------------------------------

//! One single-field corruption of an honest block.
struct Mutation {
    const char* name;
    std::function<bool(Block&, const ValidBase&, RandomStream&)> apply; // false: not applicable
};

inline std::vector<Mutation> mutation_classes() {
    return {
        {"coinbase", [](Block& m, const auto&, RandomStream& r) { m.coinbase.coinbase_address = address_of(r.next_u64()); return true; }},
        {"prev-hash", [](Block& m, const auto&, RandomStream& r) { m.header.prev_block_hash = hash_bytes(std::to_string(r.next_u64())); return true; }},
        {"nonce", [](Block& m, const auto&, RandomStream&) {
             do ++m.header.nonce;
             while (oracle_zero_bits(header_hash(m.header)) >= m.header.difficulty_target.leading_zero_bits);
             return true;
         }},
        {"tx-drop", [](Block& m, const auto&, RandomStream& r) {
             m.transactions.erase(m.transactions.begin() + static_cast<long>(r.below(m.transactions.size())));
             return true;
         }},
        {"tx-append", [](Block& m, const auto& b, RandomStream&) { m.transactions.push_back(b.spare.front()); return true; }},
        {"tx-reorder", [](Block& m, const auto&, RandomStream& r) {
             if (m.transactions.size() < 2) return false;
             const auto i = r.below(m.transactions.size() - 1);
             std::swap(m.transactions[i], m.transactions[i + 1]);
             return true;
         }},
        {"tx-substitute", [](Block& m, const auto& b, RandomStream& r) {
             m.transactions[r.below(m.transactions.size())] = b.spare.back();
             return true;
         }},
        {"merkle-corrupt", [](Block& m, const auto&, RandomStream& r) { m.header.merkle_root.bytes[r.below(32)] ^= 0x01; return true; }},
        {"merkle-corrupt-regrind", [](Block& m, const auto&, RandomStream& r) {
             m.header.merkle_root.bytes[r.below(32)] ^= 0x80;
             regrind(m);
             return true;
         }},
    };
}

} // namespace bap::testkit
