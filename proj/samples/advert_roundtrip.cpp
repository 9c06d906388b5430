// One advertise -> mine -> seed -> reconstruct -> validate cycle between two
// nodes that share a 2000-transaction pool.
#include <cstdio>
#include <variant>

#include "bap/mining/miner.hpp"
#include "bap/protocol/node.hpp"
#include "bap/simnet/simulator.hpp"

using namespace bap;

int main() {
    const auto genesis = sim::World::genesis();
    const auto funding = sim::World::funding(2000);
    ProtocolNode miner({sim::World::node_address(0)}, ChainState(genesis, funding));
    ProtocolNode peer({sim::World::node_address(1), false}, ChainState(genesis, funding));
    for (std::uint32_t i = 0; i < 2000; ++i) {
        const auto tx = sim::World::workload_tx(i, 500);
        miner.receive_transaction(tx);
        peer.receive_transaction(tx);
    }

    const Advert advert = miner.issue_advert();
    peer.registry().register_advert(advert);

    std::vector<Transaction> txs;
    for (const auto& h : advert.tx_hashes)
        txs.push_back(*miner.mempool().get(h));
    const CoinbaseTransaction coinbase{advert.coinbase_address, sim::World::kCoinbaseReward, 0, 200};
    const BlockTemplate tmpl(advert.prev_block_hash, coinbase, std::move(txs), CompactTarget::of(8));
    const auto mined = mine(tmpl, MiningBudget(1 << 20));
    if (!mined.block) return 1;

    const BlockSeed seed = make_block_seed(*mined.block);
    const auto rebuilt = reconstruct_block(seed, peer.registry(), peer.mempool());
    const auto* block = std::get_if<Block>(&rebuilt);
    if (!block) return 1;
    const auto verdict = validate_block(*block, seed.coinbase_address, peer.registry(), peer.chain());

    std::printf("advert: %zu txs, %llu bytes\n", advert.tx_hashes.size(),
                static_cast<unsigned long long>(serialized_size(advert)));
    std::printf("block:  %llu bytes, mined in %llu hash evaluations\n",
                static_cast<unsigned long long>(serialized_size(*block)),
                static_cast<unsigned long long>(mined.hash_evaluations));
    std::printf("seed:   %llu bytes\n", static_cast<unsigned long long>(serialized_size(seed)));
    std::printf("verdict: %s, identical to mined block: %s\n", std::string(to_string(verdict.reason)).c_str(),
                *block == *mined.block ? "yes" : "no");
    return verdict.accepted() ? 0 : 1;
}
