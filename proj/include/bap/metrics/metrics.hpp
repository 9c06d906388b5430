#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "bap/simnet/event_log.hpp"

namespace bap::metrics {

using sim::EventLog;
using sim::LogKind;
using sim::LogRecord;
using sim::MsgFamily;

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
    double max = 0.0;
};

//! Nearest-rank percentiles; median averages the middle pair.
inline Summary summarize(std::vector<double> xs) {
    Summary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    std::sort(xs.begin(), xs.end());
    double total = 0.0;
    for (double x : xs)
        total += x;
    s.mean = total / static_cast<double>(xs.size());
    const std::size_t n = xs.size();
    s.median = n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(n)));
    s.p90 = xs[std::max<std::size_t>(rank, 1) - 1];
    s.max = xs.back();
    return s;
}

// ---- block index shared by the metrics -------------------------------------

struct FoundBlock {
    Hash hash;
    Hash parent;
    Hash advert_key;
    std::int64_t height = 0;
    double found_at = 0.0;
    std::int32_t miner = -1;
    std::uint64_t size = 0;
    std::map<std::int32_t, double> accepted_at; // node -> first acceptance time
};

//! Replay of block lifecycle records: finds, acceptances, final tips, and
//! the eventually-best chain.
struct BlockIndex {
    Hash genesis;
    double horizon = 0.0;
    std::vector<FoundBlock> blocks; // in find order
    std::unordered_map<Hash, std::size_t> by_hash;
    std::map<std::int32_t, Hash> final_tip;
    Hash best_tip;
    std::set<Hash> best_chain; // includes genesis
    std::map<std::int64_t, Hash> best_at_height;

    explicit BlockIndex(const EventLog& log) {
        std::map<std::int32_t, std::int64_t> tip_height;
        std::set<std::int32_t> nodes;
        for (const auto& r : log.records()) {
            switch (r.kind) {
                case LogKind::START: genesis = log.hash(r.id); break;
                case LogKind::END: horizon = r.time; break;
                case LogKind::MINING_START: nodes.insert(r.node); break;
                case LogKind::BLOCK_FOUND: {
                    FoundBlock b;
                    b.hash = log.hash(r.id);
                    b.parent = log.hash(r.ref);
                    b.advert_key = log.hash(r.aux);
                    b.height = r.height;
                    b.found_at = r.time;
                    b.miner = r.node;
                    b.size = r.size;
                    by_hash.emplace(b.hash, blocks.size());
                    blocks.push_back(std::move(b));
                    break;
                }
                case LogKind::BLOCK_ACCEPTED: {
                    auto it = by_hash.find(log.hash(r.id));
                    if (it != by_hash.end()) blocks[it->second].accepted_at.try_emplace(r.node, r.time);
                    break;
                }
                case LogKind::TIP_SWITCH:
                    final_tip[r.node] = log.hash(r.id);
                    tip_height[r.node] = r.height;
                    break;
                default: break;
            }
        }
        for (auto n : nodes)
            if (!final_tip.contains(n)) {
                final_tip[n] = genesis;
                tip_height[n] = 0;
            }

        // Best tip: greatest height, then most nodes holding it, then earliest found.
        std::map<Hash, int> holders;
        for (const auto& [n, h] : final_tip)
            ++holders[h];
        best_tip = genesis;
        std::int64_t best_height = 0;
        int best_holders = 0;
        double best_found = 0.0;
        for (const auto& [h, count] : holders) {
            const std::int64_t height = height_of(h);
            const double found = found_at(h);
            const bool better = height > best_height ||
                                (height == best_height && (count > best_holders ||
                                                           (count == best_holders && found < best_found)));
            if (better) {
                best_tip = h;
                best_height = height;
                best_holders = count;
                best_found = found;
            }
        }
        Hash cur = best_tip;
        best_chain.insert(genesis);
        best_at_height[0] = genesis;
        while (cur != genesis) {
            auto it = by_hash.find(cur);
            if (it == by_hash.end()) break;
            best_chain.insert(cur);
            best_at_height[blocks[it->second].height] = cur;
            cur = blocks[it->second].parent;
        }
    }

    [[nodiscard]] std::int64_t height_of(const Hash& h) const {
        auto it = by_hash.find(h);
        return it == by_hash.end() ? 0 : blocks[it->second].height;
    }

    [[nodiscard]] double found_at(const Hash& h) const {
        auto it = by_hash.find(h);
        return it == by_hash.end() ? 0.0 : blocks[it->second].found_at;
    }

    [[nodiscard]] bool on_best_chain(const Hash& h) const { return best_chain.contains(h); }
};

// ---- propagation -------------------------------------------------------------

struct BlockLatency {
    Hash block;
    std::vector<double> samples; // one per accepting node, finder included (0)
};

struct PropagationStats {
    bool empty = true; // no samples at all
    std::vector<BlockLatency> per_block;
    Summary summary;
};

//! Acceptance time minus find time, per block and accepting node. Nodes that
//! never accept a block contribute no sample for it.
inline PropagationStats propagation_latency(const EventLog& log) {
    const BlockIndex idx(log);
    PropagationStats stats;
    std::vector<double> all;
    for (const auto& b : idx.blocks) {
        BlockLatency bl{b.hash, {}};
        for (const auto& [node, t] : b.accepted_at)
            bl.samples.push_back(t - b.found_at);
        all.insert(all.end(), bl.samples.begin(), bl.samples.end());
        stats.per_block.push_back(std::move(bl));
    }
    stats.empty = all.empty();
    stats.summary = summarize(std::move(all));
    return stats;
}

// ---- stale rate --------------------------------------------------------------

//! Fraction of found blocks that are not on the eventually-best chain;
//! absent when no block was found.
inline std::optional<double> stale_rate(const EventLog& log) {
    const BlockIndex idx(log);
    if (idx.blocks.empty()) return std::nullopt;
    std::size_t stale = 0;
    for (const auto& b : idx.blocks)
        if (!idx.on_best_chain(b.hash)) ++stale;
    return static_cast<double>(stale) / static_cast<double>(idx.blocks.size());
}

// ---- wasted hash power -------------------------------------------------------

struct NodeWaste {
    std::int32_t node = -1;
    double wasted_seconds = 0.0;
    double mining_seconds = 0.0;
    [[nodiscard]] double fraction() const { return mining_seconds > 0.0 ? wasted_seconds / mining_seconds : 0.0; }
};

struct WasteStats {
    std::vector<NodeWaste> per_node;
    double wasted_seconds = 0.0;
    double mining_seconds = 0.0;
    [[nodiscard]] double fraction() const { return mining_seconds > 0.0 ? wasted_seconds / mining_seconds : 0.0; }
};

//! Time each node spends extending a parent that was already superseded on
//! the eventually-best chain: the whole interval if the parent is off that
//! chain, otherwise the part after the best chain's child of the parent was found.
inline WasteStats wasted_hashpower(const EventLog& log) {
    const BlockIndex idx(log);
    struct Interval {
        double start;
        Hash parent;
        std::int64_t height;
    };
    std::map<std::int32_t, std::vector<Interval>> runs;
    for (const auto& r : log.records())
        if (r.kind == LogKind::MINING_START) runs[r.node].push_back({r.time, log.hash(r.id), r.height});

    WasteStats stats;
    for (const auto& [node, intervals] : runs) {
        NodeWaste w{node, 0.0, 0.0};
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            const double start = intervals[i].start;
            const double end = i + 1 < intervals.size() ? intervals[i + 1].start : idx.horizon;
            if (end <= start) continue;
            w.mining_seconds += end - start;
            if (!idx.on_best_chain(intervals[i].parent)) {
                w.wasted_seconds += end - start;
                continue;
            }
            auto child = idx.best_at_height.find(intervals[i].height + 1);
            if (child == idx.best_at_height.end()) continue;
            const double superseded_at = idx.found_at(child->second);
            w.wasted_seconds += std::max(0.0, end - std::max(start, superseded_at));
        }
        stats.wasted_seconds += w.wasted_seconds;
        stats.mining_seconds += w.mining_seconds;
        stats.per_node.push_back(w);
    }
    return stats;
}

// ---- wire sizes --------------------------------------------------------------

struct BlockCriticalPath {
    Hash block;
    std::uint64_t bytes = 0; // max over accepting non-finder nodes
};

struct SizeStats {
    std::map<MsgFamily, std::uint64_t> family_bytes;
    std::uint64_t total_bytes = 0;
    std::vector<BlockCriticalPath> per_block;

    [[nodiscard]] double mean_critical_path_bytes() const {
        if (per_block.empty()) return 0.0;
        double total = 0.0;
        for (const auto& b : per_block)
            total += static_cast<double>(b.bytes);
        return total / static_cast<double>(per_block.size());
    }
};

//! Per-family byte totals, and per block the bytes a node had to receive
//! after the block was found and before it accepted it: messages tied to the
//! block or its advert, each distinct message counted once per node. The
//! per-block figure is the maximum over nodes other than the finder; blocks
//! nobody else accepted are omitted.
inline SizeStats size_report(const EventLog& log) {
    const BlockIndex idx(log);
    SizeStats stats;
    for (auto f : sim::kAllFamilies)
        stats.family_bytes[f] = 0;

    std::unordered_map<std::uint32_t, std::vector<const LogRecord*>> by_ref;
    for (const auto& r : log.records()) {
        if (r.kind != LogKind::MSG) continue;
        stats.family_bytes[r.family] += r.size;
        stats.total_bytes += r.size;
        if (r.ref) by_ref[r.ref].push_back(&r);
    }

    std::unordered_map<Hash, std::uint32_t> interned;
    for (const auto& [ref, recs] : by_ref)
        interned.emplace(log.hash(ref), ref);

    for (const auto& b : idx.blocks) {
        std::map<std::int32_t, std::uint64_t> per_node;
        std::set<std::pair<std::int32_t, std::uint32_t>> counted;
        for (const Hash* ref : {&b.hash, &b.advert_key}) {
            if (ref->is_zero()) continue;
            auto it = interned.find(*ref);
            if (it == interned.end()) continue;
            for (const LogRecord* r : by_ref.at(it->second)) {
                auto acc = b.accepted_at.find(r->peer);
                if (r->peer == b.miner || acc == b.accepted_at.end()) continue;
                if (r->sent_at < b.found_at || r->time > acc->second) continue;
                if (counted.insert({r->peer, r->id}).second) per_node[r->peer] += r->size;
            }
        }
        bool any_remote = false;
        std::uint64_t worst = 0;
        for (const auto& [node, t] : b.accepted_at)
            if (node != b.miner) {
                any_remote = true;
                worst = std::max(worst, per_node[node]);
            }
        if (any_remote) stats.per_block.push_back({b.hash, worst});
    }
    return stats;
}

} // namespace bap::metrics
