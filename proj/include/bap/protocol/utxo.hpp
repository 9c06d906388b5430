#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bap/core/types.hpp"

template <>
struct std::hash<bap::OutPoint> {
    std::size_t operator()(const bap::OutPoint& op) const noexcept {
        return std::hash<bap::Hash>{}(op.txid) ^ (static_cast<std::size_t>(op.index) * 0x9E3779B97F4A7C15ULL);
    }
};

namespace bap {

class UtxoView {
public:
    virtual ~UtxoView() = default;
    [[nodiscard]] virtual std::optional<TxOut> lookup(const OutPoint& op) const = 0;
};

class UtxoSet final : public UtxoView {
public:
    [[nodiscard]] std::optional<TxOut> lookup(const OutPoint& op) const override {
        auto it = coins_.find(op);
        if (it == coins_.end()) return std::nullopt;
        return it->second;
    }

    void add(const OutPoint& op, const TxOut& out) { coins_[op] = out; }

    std::optional<TxOut> spend(const OutPoint& op) {
        auto it = coins_.find(op);
        if (it == coins_.end()) return std::nullopt;
        TxOut out = it->second;
        coins_.erase(it);
        return out;
    }

    [[nodiscard]] std::size_t size() const { return coins_.size(); }
    [[nodiscard]] const std::unordered_map<OutPoint, TxOut>& coins() const { return coins_; }

private:
    std::unordered_map<OutPoint, TxOut> coins_;
};

//! Copy-on-write layer over another view. Entries mapped to nullopt are spent.
class UtxoOverlay final : public UtxoView {
public:
    explicit UtxoOverlay(const UtxoView& base) : base_(&base) {}

    [[nodiscard]] std::optional<TxOut> lookup(const OutPoint& op) const override {
        auto it = delta_.find(op);
        if (it != delta_.end()) return it->second;
        return base_->lookup(op);
    }

    void add(const OutPoint& op, const TxOut& out) { delta_[op] = out; }

    std::optional<TxOut> spend(const OutPoint& op) {
        auto current = lookup(op);
        if (current) delta_[op] = std::nullopt;
        return current;
    }

private:
    const UtxoView* base_;
    std::unordered_map<OutPoint, std::optional<TxOut>> delta_;
};

//! Ordered record of a block's UTXO changes; reverting replays it backwards.
struct BlockUndo {
    struct Step {
        OutPoint outpoint;
        std::optional<TxOut> spent; // set for a spend, empty for a creation
    };
    std::vector<Step> steps;
};

//! Checks a regular transaction against a view: inputs exist and are distinct,
//! outputs do not exceed inputs. Does not modify anything.
inline bool tx_valid_against(const Transaction& tx, const UtxoView& view) {
    if (!structural_error(tx).empty() || tx.inputs.empty()) return false;
    for (std::size_t i = 0; i < tx.inputs.size(); ++i)
        for (std::size_t j = i + 1; j < tx.inputs.size(); ++j)
            if (tx.inputs[i] == tx.inputs[j]) return false;
    std::uint64_t in_total = 0;
    for (const auto& in : tx.inputs) {
        auto coin = view.lookup(in);
        if (!coin) return false;
        if (in_total > std::numeric_limits<std::uint64_t>::max() - coin->value) return false;
        in_total += coin->value;
    }
    std::uint64_t out_total = 0;
    for (const auto& out : tx.outputs) {
        if (out_total > std::numeric_limits<std::uint64_t>::max() - out.value) return false;
        out_total += out.value;
    }
    return out_total <= in_total;
}

//! Applies a transaction already known to be valid against `utxo`.
template <class MutableUtxo>
void apply_transaction(const Transaction& tx, const Hash& id, MutableUtxo& utxo, BlockUndo* undo) {
    for (const auto& in : tx.inputs) {
        auto spent = utxo.spend(in);
        if (undo && spent) undo->steps.push_back({in, *spent});
    }
    for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
        utxo.add(OutPoint{id, i}, tx.outputs[i]);
        if (undo) undo->steps.push_back({OutPoint{id, i}, std::nullopt});
    }
}

template <class MutableUtxo>
void apply_coinbase(const CoinbaseTransaction& cb, MutableUtxo& utxo, BlockUndo* undo) {
    const OutPoint op{txid(cb), 0};
    utxo.add(op, TxOut{cb.coinbase_address, cb.reward});
    if (undo) undo->steps.push_back({op, std::nullopt});
}

//! Applies a whole block with precomputed txids. Returns false (leaving `utxo`
//! partially updated) at the first invalid transaction or intra-block double spend.
template <class MutableUtxo>
bool apply_block(const Block& block, std::span<const Hash> ids, MutableUtxo& utxo, BlockUndo* undo) {
    apply_coinbase(block.coinbase, utxo, undo);
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
        if (!tx_valid_against(block.transactions[i], utxo)) return false;
        apply_transaction(block.transactions[i], ids[i], utxo, undo);
    }
    return true;
}

template <class MutableUtxo>
void revert_block(const BlockUndo& undo, MutableUtxo& utxo) {
    for (auto it = undo.steps.rbegin(); it != undo.steps.rend(); ++it) {
        if (it->spent)
            utxo.add(it->outpoint, *it->spent);
        else
            utxo.spend(it->outpoint);
    }
}

} // namespace bap
