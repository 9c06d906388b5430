#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bap/core/merkle.hpp"
#include "bap/core/size_model.hpp"
#include "bap/protocol/utxo.hpp"

namespace bap {

struct ChainParams {
    std::uint64_t max_block_size_bytes = kDefaultMaxBlockSizeBytes;
};

struct ChainEntry {
    std::shared_ptr<const Block> block;
    Hash hash;
    Hash parent;
    std::int64_t height = 0;
    std::shared_ptr<const std::vector<Hash>> txids; // of the non-coinbase transactions
};

//! Result of adding a block. Disconnected blocks are listed tip-first,
//! connected ones in chain order.
struct ChainUpdate {
    bool tip_changed = false;
    std::vector<ChainEntry> disconnected;
    std::vector<ChainEntry> connected;
};

//! Validated block tree plus the UTXO set of the best tip. The best tip is the
//! highest known block; on equal height the earlier one keeps the tip.
class ChainState {
public:
    //! `allocation` seeds the UTXO set ahead of the genesis block.
    explicit ChainState(const Block& genesis, std::vector<std::pair<OutPoint, TxOut>> allocation = {},
                        ChainParams params = {})
        : params_(params) {
        for (const auto& [op, out] : allocation)
            utxo_.add(op, out);
        const Hash h = block_hash(genesis);
        auto block = std::make_shared<const Block>(genesis);
        auto ids = std::make_shared<const std::vector<Hash>>(txids_of(genesis.transactions));
        BlockUndo undo;
        if (!apply_block(*block, *ids, utxo_, &undo)) throw std::invalid_argument("genesis block spends unknown outputs");
        known_.emplace(h, ChainEntry{block, h, genesis.header.prev_block_hash, 0, std::move(ids)});
        undo_.emplace(h, std::move(undo));
        active_.push_back(h);
    }

    [[nodiscard]] const ChainParams& params() const { return params_; }
    [[nodiscard]] const Hash& tip_hash() const { return active_.back(); }
    [[nodiscard]] const Hash& genesis_hash() const { return active_.front(); }
    [[nodiscard]] std::int64_t height() const { return static_cast<std::int64_t>(active_.size()) - 1; }
    [[nodiscard]] const UtxoSet& utxo() const { return utxo_; }
    [[nodiscard]] const std::vector<Hash>& active_chain() const { return active_; }
    [[nodiscard]] std::size_t known_count() const { return known_.size(); }

    [[nodiscard]] bool knows(const Hash& h) const { return known_.contains(h); }

    [[nodiscard]] const ChainEntry* entry(const Hash& h) const {
        auto it = known_.find(h);
        return it == known_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::optional<std::int64_t> height_of(const Hash& h) const {
        auto e = entry(h);
        return e ? std::optional{e->height} : std::nullopt;
    }

    [[nodiscard]] bool on_active_chain(const Hash& h) const {
        auto e = entry(h);
        return e && e->height <= height() && active_[static_cast<std::size_t>(e->height)] == h;
    }

    //! UTXO set as it stands right after `block_hash` is applied.
    [[nodiscard]] UtxoOverlay view_at(const Hash& h) const {
        UtxoOverlay view(utxo_);
        if (h == tip_hash()) return view;
        auto branch = branch_to_active(h);
        const std::int64_t fork_height = known_.at(branch.empty() ? h : known_.at(branch.back()).parent).height;
        for (std::int64_t ht = height(); ht > fork_height; --ht)
            revert_block(undo_.at(active_[static_cast<std::size_t>(ht)]), view);
        for (auto it = branch.rbegin(); it != branch.rend(); ++it) {
            const auto& e = known_.at(*it);
            apply_block(*e.block, *e.txids, view, nullptr);
        }
        return view;
    }

    //! Stores an already-validated block whose parent is known, switching the
    //! tip if it makes a strictly longer chain.
    ChainUpdate add_block(std::shared_ptr<const Block> block, const Hash& h) {
        ChainUpdate update;
        if (knows(h)) return update;
        auto parent = entry(block->header.prev_block_hash);
        if (!parent) throw std::logic_error("add_block: parent unknown");
        auto ids = std::make_shared<const std::vector<Hash>>(txids_of(block->transactions));
        known_.emplace(h, ChainEntry{block, h, parent->hash, parent->height + 1, std::move(ids)});
        if (parent->height + 1 <= height()) return update;

        auto branch = branch_to_active(h);
        const std::int64_t fork_height = known_.at(known_.at(branch.back()).parent).height;
        while (height() > fork_height) {
            const Hash old = active_.back();
            revert_block(undo_.at(old), utxo_);
            undo_.erase(old);
            update.disconnected.push_back(known_.at(old));
            active_.pop_back();
        }
        for (auto it = branch.rbegin(); it != branch.rend(); ++it) {
            const auto& e = known_.at(*it);
            BlockUndo undo;
            if (!apply_block(*e.block, *e.txids, utxo_, &undo))
                throw std::logic_error("add_block: stored block does not connect");
            undo_.emplace(*it, std::move(undo));
            active_.push_back(*it);
            update.connected.push_back(e);
        }
        update.tip_changed = true;
        return update;
    }

private:
    // Blocks from h back to (excluding) the first ancestor on the active chain.
    std::vector<Hash> branch_to_active(const Hash& h) const {
        std::vector<Hash> branch;
        Hash cur = h;
        while (!on_active_chain(cur)) {
            branch.push_back(cur);
            cur = known_.at(cur).parent;
        }
        return branch;
    }

    ChainParams params_;
    std::unordered_map<Hash, ChainEntry> known_;
    std::unordered_map<Hash, BlockUndo> undo_;
    std::vector<Hash> active_;
    UtxoSet utxo_;
};

} // namespace bap
