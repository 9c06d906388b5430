#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "bap/protocol/utxo.hpp"

namespace bap {

//! Pending transactions, each valid against the node's tip and no two
//! spending the same outpoint. Iteration order is arrival order.
class Mempool {
public:
    enum class AddResult { ADDED, ALREADY_PRESENT, CONFLICT, INVALID };

    AddResult add(const Hash& id, std::shared_ptr<const Transaction> tx, const UtxoView& view) {
        if (txs_.contains(id)) return AddResult::ALREADY_PRESENT;
        if (!tx_valid_against(*tx, view)) return AddResult::INVALID;
        for (const auto& in : tx->inputs)
            if (spent_.contains(in)) return AddResult::CONFLICT;
        for (const auto& in : tx->inputs)
            spent_.emplace(in, id);
        order_.emplace(next_seq_, id);
        txs_.emplace(id, Entry{std::move(tx), next_seq_});
        ++next_seq_;
        return AddResult::ADDED;
    }

    AddResult add(const Transaction& tx, const UtxoView& view) {
        return add(txid(tx), std::make_shared<const Transaction>(tx), view);
    }

    bool remove(const Hash& id) {
        auto it = txs_.find(id);
        if (it == txs_.end()) return false;
        for (const auto& in : it->second.tx->inputs)
            spent_.erase(in);
        order_.erase(it->second.seq);
        txs_.erase(it);
        return true;
    }

    [[nodiscard]] bool contains(const Hash& id) const { return txs_.contains(id); }

    [[nodiscard]] const Transaction* get(const Hash& id) const {
        auto it = txs_.find(id);
        return it == txs_.end() ? nullptr : it->second.tx.get();
    }

    [[nodiscard]] std::shared_ptr<const Transaction> get_shared(const Hash& id) const {
        auto it = txs_.find(id);
        return it == txs_.end() ? nullptr : it->second.tx;
    }

    //! Pooled transaction spending `op`, if any.
    [[nodiscard]] const Hash* spender_of(const OutPoint& op) const {
        auto it = spent_.find(op);
        return it == spent_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t size() const { return txs_.size(); }
    [[nodiscard]] bool empty() const { return txs_.empty(); }

    //! Calls f(id, tx) in arrival order until f returns false.
    template <class F>
    void for_each(F&& f) const {
        for (const auto& [seq, id] : order_)
            if (!f(id, *txs_.at(id).tx)) return;
    }

    [[nodiscard]] std::vector<Hash> arrival_order() const {
        std::vector<Hash> ids;
        ids.reserve(order_.size());
        for (const auto& [seq, id] : order_)
            ids.push_back(id);
        return ids;
    }

    //! Drops every transaction no longer valid against `view`. Returns the dropped ids.
    std::vector<Hash> revalidate(const UtxoView& view) {
        std::vector<Hash> dropped;
        for (const auto& [seq, id] : order_)
            if (!tx_valid_against(*txs_.at(id).tx, view)) dropped.push_back(id);
        for (const auto& id : dropped)
            remove(id);
        return dropped;
    }

private:
    struct Entry {
        std::shared_ptr<const Transaction> tx;
        std::uint64_t seq;
    };

    std::unordered_map<Hash, Entry> txs_;
    std::map<std::uint64_t, Hash> order_;
    std::unordered_map<OutPoint, Hash> spent_;
    std::uint64_t next_seq_ = 0;
};

} // namespace bap
