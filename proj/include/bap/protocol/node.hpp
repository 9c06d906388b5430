#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "bap/protocol/chain_state.hpp"
#include "bap/protocol/operations.hpp"
#include "bap/protocol/validation.hpp"

namespace bap {

struct NodeConfig {
    Address address;
    bool mining = true;
    SelectionPolicy policy;
};

//! Outcome of on_block_accepted.
struct AcceptOutcome {
    ChainUpdate chain;
    std::vector<Hash> dropped_txs;
    std::optional<Advert> next_advert;
};

//! One miner's protocol state: chain, pool, and known adverts. Not thread-safe;
//! callers serialise all operations on a node.
class ProtocolNode {
public:
    ProtocolNode(NodeConfig config, ChainState chain) : config_(std::move(config)), chain_(std::move(chain)) {}

    [[nodiscard]] const NodeConfig& config() const { return config_; }
    [[nodiscard]] const ChainState& chain() const { return chain_; }
    [[nodiscard]] const Mempool& mempool() const { return mempool_; }
    [[nodiscard]] const AdvertRegistry& registry() const { return registry_; }
    AdvertRegistry& registry() { return registry_; }

    Mempool::AddResult receive_transaction(const Hash& id, std::shared_ptr<const Transaction> tx) {
        return mempool_.add(id, std::move(tx), chain_.utxo());
    }

    Mempool::AddResult receive_transaction(const Transaction& tx) {
        return mempool_.add(tx, chain_.utxo());
    }

    //! Advert for the current tip from the current pool, registered locally.
    Advert issue_advert() {
        Advert advert = make_advert(config_.address, chain_.tip_hash(), mempool_, config_.policy);
        registry_.register_advert(advert);
        return advert;
    }

    //! Stores a block that passed validation. If the tip moves, the pool is
    //! brought in line with the new UTXO view (confirmed and conflicting
    //! transactions leave, transactions of disconnected blocks come back when
    //! still valid), adverts two or more blocks behind the tip are evicted, and
    //! a mining node issues its next advert on the new tip.
    AcceptOutcome on_block_accepted(std::shared_ptr<const Block> block, const Hash& hash) {
        AcceptOutcome out;
        out.chain = chain_.add_block(std::move(block), hash);
        if (!out.chain.tip_changed) return out;

        for (const auto& e : out.chain.connected)
            for (const auto& id : *e.txids)
                mempool_.remove(id);
        out.dropped_txs = mempool_.revalidate(chain_.utxo());
        for (const auto& e : out.chain.disconnected)
            for (std::size_t i = 0; i < e.txids->size(); ++i)
                mempool_.add((*e.txids)[i], std::make_shared<const Transaction>(e.block->transactions[i]), chain_.utxo());

        const std::int64_t tip_height = chain_.height();
        registry_.evict_if([&](const Hash& prev) {
            auto h = chain_.height_of(prev);
            return h && *h <= tip_height - 2;
        });

        if (config_.mining) out.next_advert = issue_advert();
        return out;
    }

private:
    NodeConfig config_;
    ChainState chain_;
    Mempool mempool_;
    AdvertRegistry registry_;
};

} // namespace bap
