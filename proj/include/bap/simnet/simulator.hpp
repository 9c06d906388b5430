#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "bap/core/random.hpp"
#include "bap/mining/miner.hpp"
#include "bap/mining/mining_time.hpp"
#include "bap/protocol/node.hpp"
#include "bap/simnet/event_log.hpp"
#include "bap/simnet/scenario.hpp"
#include "bap/simnet/topology.hpp"

namespace bap::sim {

using TxPtr = std::shared_ptr<const Transaction>;
using BlockPtr = std::shared_ptr<const Block>;

//! Transactions carried by a TX_RESPONSE inside the simulator.
struct TxBatch {
    std::vector<std::pair<Hash, TxPtr>> txs;
};

struct TxPayload {
    Hash txid;
    TxPtr tx;
};

//! Immutable message as it travels between nodes. `key` identifies it for
//! flood suppression; `ref` ties it to the block or advert that caused it.
struct Envelope {
    MsgFamily family = MsgFamily::NONE;
    Hash key;
    Hash ref;
    std::uint64_t size = 0;
    std::variant<Advert, BlockSeed, BlockPtr, TxPayload, TxRequest, TxBatch> payload;
};

using MessagePtr = std::shared_ptr<const Envelope>;

inline constexpr std::uint8_t family_tag(MsgFamily f) { return static_cast<std::uint8_t>(f); }

//! Stable content hash of a message: family tag followed by its canonical encoding.
inline Hash gossip_dedup_key(const Advert& a) {
    Writer w;
    w.u8(family_tag(MsgFamily::ADVERT));
    encode(w, a);
    return hash_bytes(w.bytes());
}

inline Hash gossip_dedup_key(const BlockSeed& s) {
    Writer w;
    w.u8(family_tag(MsgFamily::BLOCK_SEED));
    encode(w, s);
    return hash_bytes(w.bytes());
}

//! Full blocks are identified by family tag + header encoding (the header commits to the body).
inline Hash gossip_dedup_key(const Block& b) {
    Writer w;
    w.u8(family_tag(MsgFamily::FULL_BLOCK));
    encode(w, b.header);
    return hash_bytes(w.bytes());
}

inline Hash gossip_dedup_key(const Transaction& tx) {
    Writer w;
    w.u8(family_tag(MsgFamily::TRANSACTION));
    encode(w, tx);
    return hash_bytes(w.bytes());
}

inline Hash gossip_dedup_key(const TxRequest& r) {
    Writer w;
    w.u8(family_tag(MsgFamily::TX_REQUEST));
    encode(w, r);
    return hash_bytes(w.bytes());
}

inline Hash gossip_dedup_key(const TxResponse& r) {
    Writer w;
    w.u8(family_tag(MsgFamily::TX_RESPONSE));
    encode(w, r);
    return hash_bytes(w.bytes());
}

inline MessagePtr make_advert_message(Advert a) {
    auto e = std::make_shared<Envelope>();
    e->family = MsgFamily::ADVERT;
    e->key = gossip_dedup_key(a);
    e->ref = e->key;
    e->size = serialized_size(a);
    e->payload = std::move(a);
    return e;
}

inline MessagePtr make_seed_message(BlockSeed s, const Hash& block) {
    auto e = std::make_shared<Envelope>();
    e->family = MsgFamily::BLOCK_SEED;
    e->key = gossip_dedup_key(s);
    e->ref = block;
    e->size = serialized_size(s);
    e->payload = std::move(s);
    return e;
}

inline MessagePtr make_block_message(BlockPtr b, const Hash& block) {
    auto e = std::make_shared<Envelope>();
    e->family = MsgFamily::FULL_BLOCK;
    e->key = gossip_dedup_key(*b);
    e->ref = block;
    e->size = serialized_size(*b);
    e->payload = std::move(b);
    return e;
}

inline MessagePtr make_tx_message(const Hash& id, TxPtr tx, const Hash& ref = {}) {
    auto e = std::make_shared<Envelope>();
    e->family = MsgFamily::TRANSACTION;
    e->key = gossip_dedup_key(*tx);
    e->ref = ref;
    e->size = serialized_size(*tx);
    e->payload = TxPayload{id, std::move(tx)};
    return e;
}

inline MessagePtr make_request_message(TxRequest r, const Hash& ref) {
    auto e = std::make_shared<Envelope>();
    e->family = MsgFamily::TX_REQUEST;
    e->key = gossip_dedup_key(r);
    e->ref = ref;
    e->size = serialized_size(r);
    e->payload = std::move(r);
    return e;
}

inline MessagePtr make_response_message(TxBatch batch, const Hash& ref) {
    TxResponse plain;
    plain.transactions.reserve(batch.txs.size());
    for (const auto& [id, tx] : batch.txs)
        plain.transactions.push_back(*tx);
    auto e = std::make_shared<Envelope>();
    e->family = MsgFamily::TX_RESPONSE;
    e->key = gossip_dedup_key(plain);
    e->ref = ref;
    e->size = serialized_size(plain);
    e->payload = std::move(batch);
    return e;
}

inline double transmission_delay(const Envelope& m, const Link& link) { return transmission_delay(m.size, link); }

//! Fixed world used by every node: genesis, address derivation, funding outputs.
struct World {
    static inline constexpr std::uint64_t kCoinbaseReward = 50;
    static inline constexpr std::uint64_t kFundingValue = 1000;

    static Address node_address(NodeId n) {
        const Hash h = hash_bytes("bap-sim-node-" + std::to_string(n));
        Address a;
        std::copy_n(h.bytes.begin(), Address::size, a.bytes.begin());
        return a;
    }

    static Block genesis() {
        Block g;
        g.coinbase = CoinbaseTransaction{Address{}, 0, 0, kDefaultCoinbaseSizeBytes};
        g.header.merkle_root = txid(g.coinbase);
        return g;
    }

    static Hash funding_txid() { return hash_bytes("bap-sim-funding"); }

    //! The i-th workload transaction spends the i-th funding output.
    static Transaction workload_tx(std::uint32_t i, std::uint32_t size_bytes) {
        Transaction tx;
        tx.inputs.push_back(OutPoint{funding_txid(), i});
        const Hash payee = hash_bytes("bap-sim-payee-" + std::to_string(i));
        Address to;
        std::copy_n(payee.bytes.begin(), Address::size, to.bytes.begin());
        tx.outputs.push_back(TxOut{to, kFundingValue});
        tx.nominal_size_bytes = size_bytes;
        return tx;
    }

    static std::vector<std::pair<OutPoint, TxOut>> funding(std::uint32_t count) {
        std::vector<std::pair<OutPoint, TxOut>> out;
        out.reserve(count);
        const Hash id = funding_txid();
        for (std::uint32_t i = 0; i < count; ++i)
            out.emplace_back(OutPoint{id, i}, TxOut{Address{}, kFundingValue});
        return out;
    }
};

//! Deterministic discrete-event simulation of one scenario.
class Simulator {
public:
    explicit Simulator(Scenario scenario) : s_(std::move(scenario)), root_(s_.seed) {
        validate(s_);
        RandomStream topo_rng = root_.fork(1);
        topology_.emplace(s_.node_count, build_edges(s_, topo_rng));
        if (!topology_->connected()) throw ScenarioError("topology", "graph is not connected");

        RandomStream link_rng = root_.fork(2);
        for (auto [a, b] : topology_->edges()) {
            Link l{a, b, s_.link_latency.sample(link_rng), s_.link_bandwidth.sample(link_rng)};
            links_.emplace(std::pair{a, b}, l);
        }

        RandomStream work_rng = root_.fork(3);
        double t = 0.0;
        if (s_.tx_rate > 0.0) {
            while (true) {
                t += work_rng.exponential(1.0 / s_.tx_rate);
                if (t > s_.horizon_seconds) break;
                arrivals_.push_back({t, static_cast<NodeId>(work_rng.below(static_cast<std::uint64_t>(s_.node_count)))});
            }
        }
        const std::uint32_t total_txs = s_.initial_mempool_txs + static_cast<std::uint32_t>(arrivals_.size());

        const Block genesis = World::genesis();
        genesis_hash_ = block_hash(genesis);
        ChainState chain(genesis, World::funding(total_txs), ChainParams{s_.max_block_size_bytes});

        std::vector<std::pair<Hash, TxPtr>> initial;
        for (std::uint32_t i = 0; i < s_.initial_mempool_txs; ++i) {
            auto tx = std::make_shared<const Transaction>(World::workload_tx(i, s_.tx_size_bytes));
            initial.emplace_back(txid(*tx), tx);
        }
        next_tx_index_ = s_.initial_mempool_txs;

        const std::set<int> withholding(s_.withholding_nodes.begin(), s_.withholding_nodes.end());
        nodes_.reserve(static_cast<std::size_t>(s_.node_count));
        for (NodeId n = 0; n < s_.node_count; ++n) {
            NodeConfig cfg{World::node_address(n), s_.strategy == RelayStrategy::ADVERT_PROTOCOL,
                           SelectionPolicy{s_.max_block_size_bytes, s_.coinbase_size_bytes}};
            nodes_.push_back(std::make_unique<Node>(n, ProtocolNode(cfg, chain), root_.fork(100 + static_cast<std::uint64_t>(n)),
                                                    HashRate(s_.rate_of(n)), withholding.contains(n)));
            auto& node = *nodes_.back();
            for (const auto& [id, tx] : initial) {
                node.tx_store.emplace(id, tx);
                node.proto.receive_transaction(id, tx);
            }
        }
        for (const auto& [id, tx] : initial)
            initial_keys_.push_back(gossip_dedup_key(*tx));
        for (auto& node : nodes_)
            node->seen.insert(initial_keys_.begin(), initial_keys_.end());
    }

    [[nodiscard]] const Scenario& scenario() const { return s_; }
    [[nodiscard]] const Topology& topology() const { return *topology_; }
    [[nodiscard]] const Link& link(NodeId a, NodeId b) const { return links_.at(std::minmax(a, b)); }
    [[nodiscard]] const Hash& genesis_hash() const { return genesis_hash_; }
    [[nodiscard]] const ProtocolNode& node(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n))->proto; }

    //! Runs to the horizon and returns the complete log. Call once.
    EventLog run() {
        if (ran_) throw std::logic_error("Simulator::run called twice");
        ran_ = true;
        record(LogKind::START, 0.0, -1, genesis_hash_);
        for (auto& node : nodes_)
            start_mining(*node, 0.0, std::nullopt);
        if (!arrivals_.empty()) push({arrivals_[0].first, 0, EventKind::TX_ARRIVAL, arrivals_[0].second, -1, nullptr, 0, 0.0});

        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.time > s_.horizon_seconds) break;
            now_ = ev.time;
            switch (ev.kind) {
                case EventKind::TX_ARRIVAL: on_tx_arrival(ev); break;
                case EventKind::BLOCK_FOUND: on_block_found(ev); break;
                case EventKind::MSG_DELIVERY: on_delivery(ev); break;
            }
        }
        LogRecord end;
        end.kind = LogKind::END;
        end.time = end.sent_at = s_.horizon_seconds;
        log_.append(end);
        return std::move(log_);
    }

private:
    enum class EventKind : std::uint8_t { MSG_DELIVERY, BLOCK_FOUND, TX_ARRIVAL };

    struct Event {
        double time;
        std::uint64_t seq;
        EventKind kind;
        NodeId node;
        NodeId from;
        MessagePtr msg;
        std::uint64_t epoch;
        double sent_at;
    };

    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    struct Pending {
        enum class Wait { PARENT, ADVERT, TXS };
        MessagePtr msg;
        NodeId from;
        Wait wait;
        std::set<Hash> missing;
    };

    struct Node {
        Node(NodeId id_, ProtocolNode proto_, RandomStream rng_, HashRate rate_, bool withholding_)
            : id(id_), proto(std::move(proto_)), rng(std::move(rng_)), rate(rate_), withholding(withholding_) {}

        NodeId id;
        ProtocolNode proto;
        RandomStream rng;
        HashRate rate;
        bool withholding;
        std::unordered_set<Hash> seen;
        std::unordered_map<Hash, TxPtr> tx_store;
        std::uint64_t mining_epoch = 0;
        std::vector<std::pair<Hash, TxPtr>> frozen_template; // full-block relay
        std::optional<Advert> current_advert;                // advert relay
        std::deque<Pending> pending;
    };

    // ---- bookkeeping --------------------------------------------------------

    void push(Event ev) {
        ev.seq = next_seq_++;
        queue_.push(std::move(ev));
    }

    void record(LogKind kind, double time, NodeId node, const Hash& id, const Hash& ref = {}, std::int64_t height = 0,
                std::uint64_t size = 0, const Hash& aux = {}, std::uint8_t reason = 0) {
        LogRecord r;
        r.time = r.sent_at = time;
        r.kind = kind;
        r.node = node;
        r.id = log_.intern(id);
        r.ref = ref.is_zero() ? 0 : log_.intern(ref);
        r.aux = aux.is_zero() ? 0 : log_.intern(aux);
        r.height = height;
        r.size = size;
        r.reason = reason;
        log_.append(r);
    }

    void send(NodeId from, NodeId to, const MessagePtr& msg) {
        const double at = now_ + transmission_delay(*msg, link(from, to)) + s_.processing_delay;
        push({at, 0, EventKind::MSG_DELIVERY, to, from, msg, 0, now_});
    }

    void broadcast(const Node& node, const MessagePtr& msg, NodeId except = -1) {
        for (NodeId peer : topology_->neighbors(node.id))
            if (peer != except) send(node.id, peer, msg);
    }

    const Transaction* lookup(const Node& node, const Hash& id) const {
        auto it = node.tx_store.find(id);
        return it == node.tx_store.end() ? nullptr : it->second.get();
    }

    BlockPtr intern_block(BlockPtr b, const Hash& h) {
        auto [it, inserted] = block_pool_.try_emplace(h, b);
        return it->second;
    }

    // ---- mining -------------------------------------------------------------

    std::vector<std::pair<Hash, TxPtr>> select_from_pool(const Node& node) const {
        const Advert pick = make_advert(node.proto.config().address, node.proto.chain().tip_hash(), node.proto.mempool(),
                                        node.proto.config().policy);
        std::vector<std::pair<Hash, TxPtr>> out;
        out.reserve(pick.tx_hashes.size());
        for (const auto& h : pick.tx_hashes)
            out.emplace_back(h, node.proto.mempool().get_shared(h));
        return out;
    }

    void start_mining(Node& node, double now, std::optional<Advert> issued) {
        ++node.mining_epoch;
        const auto& chain = node.proto.chain();
        record(LogKind::MINING_START, now, node.id, chain.tip_hash(), {}, chain.height());
        switch (s_.strategy) {
            case RelayStrategy::BASELINE_FULL_BLOCK:
                node.frozen_template = select_from_pool(node);
                break;
            case RelayStrategy::ADVERT_PROTOCOL: {
                Advert advert = issued ? std::move(*issued) : node.proto.issue_advert();
                node.current_advert = advert;
                auto msg = make_advert_message(std::move(advert));
                node.seen.insert(msg->key);
                broadcast(node, msg);
                break;
            }
            case RelayStrategy::LATE_ADVERT:
                break;
        }
        const double dt = sample_mining_time(node.rate, CompactTarget::of(s_.difficulty_bits), node.rng);
        push({now + dt, 0, EventKind::BLOCK_FOUND, node.id, -1, nullptr, node.mining_epoch, now});
    }

    void on_block_found(const Event& ev) {
        Node& node = *nodes_.at(static_cast<std::size_t>(ev.node));
        if (ev.epoch != node.mining_epoch) return;

        std::vector<std::pair<Hash, TxPtr>> body;
        switch (s_.strategy) {
            case RelayStrategy::BASELINE_FULL_BLOCK: body = node.frozen_template; break;
            case RelayStrategy::LATE_ADVERT: body = select_from_pool(node); break;
            case RelayStrategy::ADVERT_PROTOCOL:
                for (const auto& h : node.current_advert->tx_hashes)
                    body.emplace_back(h, node.tx_store.at(h));
                break;
        }

        const auto& chain = node.proto.chain();
        const std::int64_t height = chain.height() + 1;
        std::vector<Transaction> txs;
        txs.reserve(body.size());
        for (const auto& [id, tx] : body)
            txs.push_back(*tx);
        CoinbaseTransaction coinbase{node.proto.config().address, World::kCoinbaseReward,
                                     static_cast<std::uint64_t>(height), s_.coinbase_size_bytes};
        BlockTemplate tmpl(chain.tip_hash(), coinbase, std::move(txs), CompactTarget::of(s_.header_pow_bits), 1,
                           static_cast<std::int64_t>(std::floor(now_)), s_.max_block_size_bytes);
        MiningResult mined = mine(tmpl, MiningBudget(std::uint64_t{1} << 40));
        if (!mined.block) throw std::logic_error("header search exhausted its budget");
        const Hash hash = block_hash(*mined.block);
        BlockPtr block = intern_block(std::make_shared<const Block>(std::move(*mined.block)), hash);

        Hash advert_key;
        if (s_.strategy == RelayStrategy::ADVERT_PROTOCOL) {
            advert_key = gossip_dedup_key(*node.current_advert);
        } else if (s_.strategy == RelayStrategy::LATE_ADVERT) {
            Advert advert{node.proto.config().address, {}, chain.tip_hash()};
            for (const auto& [id, tx] : body)
                advert.tx_hashes.push_back(id);
            node.proto.registry().register_advert(advert);
            auto msg = make_advert_message(std::move(advert));
            advert_key = msg->key;
            node.seen.insert(msg->key);
            broadcast(node, msg);
        }
        record(LogKind::BLOCK_FOUND, now_, node.id, hash, block->header.prev_block_hash, height, serialized_size(*block),
               advert_key);

        MessagePtr relay = s_.strategy == RelayStrategy::BASELINE_FULL_BLOCK
                               ? make_block_message(block, hash)
                               : make_seed_message(make_block_seed(*block), hash);
        node.seen.insert(relay->key);
        accept(node, block, hash);
        broadcast(node, relay);
    }

    void accept(Node& node, BlockPtr block, const Hash& hash) {
        const Hash old_tip = node.proto.chain().tip_hash();
        AcceptOutcome out = node.proto.on_block_accepted(block, hash);
        const auto height = *node.proto.chain().height_of(hash);
        record(LogKind::BLOCK_ACCEPTED, now_, node.id, hash, block->header.prev_block_hash, height);
        if (out.chain.tip_changed) {
            record(LogKind::TIP_SWITCH, now_, node.id, node.proto.chain().tip_hash(), old_tip, node.proto.chain().height());
            start_mining(node, now_, std::move(out.next_advert));
        }
        retry_pending(node, [&](const Pending& p) {
            return p.wait == Pending::Wait::PARENT && prev_hash_of(*p.msg) == hash;
        });
    }

    // ---- message handling ---------------------------------------------------

    static const Hash& prev_hash_of(const Envelope& m) {
        if (auto* s = std::get_if<BlockSeed>(&m.payload)) return s->header.prev_block_hash;
        return std::get<BlockPtr>(m.payload)->header.prev_block_hash;
    }

    void on_tx_arrival(const Event& ev) {
        auto tx = std::make_shared<const Transaction>(World::workload_tx(next_tx_index_++, s_.tx_size_bytes));
        const Hash id = txid(*tx);
        record(LogKind::TX_ARRIVAL, now_, ev.node, id);
        acquire_tx(*nodes_.at(static_cast<std::size_t>(ev.node)), make_tx_message(id, tx), -1);
        ++arrival_cursor_;
        if (arrival_cursor_ < arrivals_.size())
            push({arrivals_[arrival_cursor_].first, 0, EventKind::TX_ARRIVAL, arrivals_[arrival_cursor_].second, -1, nullptr,
                  0, 0.0});
    }

    void on_delivery(const Event& ev) {
        const Envelope& m = *ev.msg;
        LogRecord r;
        r.time = now_;
        r.sent_at = ev.sent_at;
        r.kind = LogKind::MSG;
        r.family = m.family;
        r.node = ev.from;
        r.peer = ev.node;
        r.size = m.size;
        r.id = log_.intern(m.key);
        r.ref = m.ref.is_zero() ? 0 : log_.intern(m.ref);
        log_.append(r);

        Node& node = *nodes_.at(static_cast<std::size_t>(ev.node));
        switch (m.family) {
            case MsgFamily::TRANSACTION: acquire_tx(node, ev.msg, ev.from); break;
            case MsgFamily::TX_REQUEST: on_tx_request(node, m, ev.from); break;
            case MsgFamily::TX_RESPONSE: on_tx_response(node, m, ev.from); break;
            case MsgFamily::ADVERT: on_advert(node, ev.msg, ev.from); break;
            case MsgFamily::BLOCK_SEED:
            case MsgFamily::FULL_BLOCK: on_block_message(node, ev.msg, ev.from); break;
            case MsgFamily::NONE: break;
        }
    }

    //! New transaction from a peer (or a spender when from < 0): store,
    //! pool if valid, flood onwards, and unblock waiting seeds.
    void acquire_tx(Node& node, const MessagePtr& msg, NodeId from) {
        if (!node.seen.insert(msg->key).second) return;
        const auto& p = std::get<TxPayload>(msg->payload);
        node.tx_store.try_emplace(p.txid, p.tx);
        if (node.proto.receive_transaction(p.txid, p.tx) == Mempool::AddResult::ADDED) broadcast(node, msg, from);
        tx_available(node, p.txid);
    }

    void tx_available(Node& node, const Hash& id) {
        bool any_ready = false;
        for (auto& p : node.pending)
            if (p.wait == Pending::Wait::TXS && p.missing.erase(id) && p.missing.empty()) any_ready = true;
        if (any_ready)
            retry_pending(node, [](const Pending& p) { return p.wait == Pending::Wait::TXS && p.missing.empty(); });
    }

    void on_tx_request(Node& node, const Envelope& m, NodeId from) {
        if (node.withholding) return;
        TxBatch batch;
        for (const auto& h : std::get<TxRequest>(m.payload).tx_hashes) {
            auto it = node.tx_store.find(h);
            if (it != node.tx_store.end()) batch.txs.emplace_back(h, it->second);
        }
        if (!batch.txs.empty()) send(node.id, from, make_response_message(std::move(batch), m.ref));
    }

    void on_tx_response(Node& node, const Envelope& m, NodeId from) {
        for (const auto& [id, tx] : std::get<TxBatch>(m.payload).txs)
            if (!node.tx_store.contains(id)) acquire_tx(node, make_tx_message(id, tx, m.ref), from);
    }

    void request_missing(Node& node, NodeId from, std::vector<Hash> missing, const Hash& ref) {
        if (missing.empty() || from < 0) return;
        send(node.id, from, make_request_message(TxRequest{std::move(missing)}, ref));
    }

    void on_advert(Node& node, const MessagePtr& msg, NodeId from) {
        if (!node.seen.insert(msg->key).second) return;
        const auto& advert = std::get<Advert>(msg->payload);
        if (!advert_error(advert).empty()) return;
        if (node.proto.registry().register_advert(advert) != RegisterResult::REGISTERED) return;
        broadcast(node, msg, from);
        request_missing(node, from, missing_txs(advert, [&](const Hash& h) { return lookup(node, h); }), msg->key);
        retry_pending(node, [&](const Pending& p) {
            if (p.wait != Pending::Wait::ADVERT) return false;
            const auto& seed = std::get<BlockSeed>(p.msg->payload);
            return seed.coinbase_address == advert.coinbase_address && seed.header.prev_block_hash == advert.prev_block_hash;
        });
    }

    void on_block_message(Node& node, const MessagePtr& msg, NodeId from) {
        if (!node.seen.insert(msg->key).second) return;
        if (auto* seed = std::get_if<BlockSeed>(&msg->payload)) {
            if (!seed_error(*seed).empty() || !check_pow(seed->header)) {
                record(LogKind::BLOCK_REJECTED, now_, node.id, msg->ref, {}, 0, 0, {},
                       static_cast<std::uint8_t>(VerdictReason::POW_FAIL));
                return;
            }
        }
        try_block(node, msg, from);
    }

    //! Attempts to reconstruct/validate a block message; parks it when it is
    //! waiting for a parent, an advert, or transactions.
    void try_block(Node& node, const MessagePtr& msg, NodeId from) {
        const Hash& hash = msg->ref;
        if (node.proto.chain().knows(hash)) return;
        if (!node.proto.chain().knows(prev_hash_of(*msg))) {
            park(node, {msg, from, Pending::Wait::PARENT, {}});
            return;
        }

        BlockPtr block;
        ValidationVerdict verdict;
        if (auto* seed = std::get_if<BlockSeed>(&msg->payload)) {
            auto rebuilt = reconstruct_block(*seed, node.proto.registry(), [&](const Hash& h) { return lookup(node, h); });
            if (auto* fail = std::get_if<ReconstructFailure>(&rebuilt)) {
                if (fail->kind == ReconstructFailure::Kind::NO_MATCHING_ADVERT) {
                    park(node, {msg, from, Pending::Wait::ADVERT, {}});
                } else {
                    park(node, {msg, from, Pending::Wait::TXS, {fail->missing.begin(), fail->missing.end()}});
                    request_missing(node, from, fail->missing, hash);
                }
                return;
            }
            const Block& b = std::get<Block>(rebuilt);
            verdict = validate_block(b, seed->coinbase_address, node.proto.registry(), node.proto.chain());
            if (verdict.accepted()) {
                auto pooled = block_pool_.find(hash);
                block = pooled != block_pool_.end() ? pooled->second : std::make_shared<const Block>(std::move(std::get<Block>(rebuilt)));
            }
        } else {
            block = std::get<BlockPtr>(msg->payload);
            verdict = validate_full_block(*block, node.proto.chain());
        }

        if (!verdict.accepted()) {
            record(LogKind::BLOCK_REJECTED, now_, node.id, hash, {}, 0, 0, {}, static_cast<std::uint8_t>(verdict.reason));
            return;
        }
        accept(node, intern_block(block, hash), hash);
        broadcast(node, msg, from);
    }

    void park(Node& node, Pending p) {
        if (node.pending.size() >= s_.pending_capacity) node.pending.pop_front();
        node.pending.push_back(std::move(p));
    }

    template <class Pred>
    void retry_pending(Node& node, Pred&& ready) {
        std::vector<Pending> due;
        for (auto it = node.pending.begin(); it != node.pending.end();) {
            if (ready(*it)) {
                due.push_back(std::move(*it));
                it = node.pending.erase(it);
            } else {
                ++it;
            }
        }
        for (auto& p : due)
            try_block(node, p.msg, p.from);
    }

    Scenario s_;
    RandomStream root_;
    std::optional<Topology> topology_;
    std::map<std::pair<int, int>, Link> links_;
    std::vector<std::pair<double, NodeId>> arrivals_;
    std::size_t arrival_cursor_ = 0;
    std::uint32_t next_tx_index_ = 0;
    std::vector<Hash> initial_keys_;
    Hash genesis_hash_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::unordered_map<Hash, BlockPtr> block_pool_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
    bool ran_ = false;
    EventLog log_;
};

inline EventLog run_scenario(const Scenario& scenario) {
    return Simulator(scenario).run();
}

} // namespace bap::sim
