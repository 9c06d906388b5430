#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

#include "bap/metrics/metrics.hpp"
#include "bap/simnet/simulator.hpp"

using namespace bap;
using namespace bap::sim;
using namespace bap::metrics;

namespace {

//! Node 0 mines a 2000-transaction block; node 1 effectively never mines.
Scenario two_node(RelayStrategy st) {
    Scenario s;
    s.node_count = 2;
    s.topology.kind = TopologyKind::COMPLETE;
    s.hash_rates = {102.4, 1e-9};
    s.difficulty_bits = 10;
    s.tx_rate = 0.0;
    s.initial_mempool_txs = 2000;
    s.max_block_size_bytes = 1'000'280;
    s.horizon_seconds = 200.0;
    s.seed = 11;
    s.strategy = st;
    return s;
}

LogRecord rec(LogKind k, double t, int node, std::uint32_t id, std::uint32_t ref = 0, std::int64_t height = 0) {
    LogRecord r;
    r.kind = k;
    r.time = r.sent_at = t;
    r.node = node;
    r.id = id;
    r.ref = ref;
    r.height = height;
    return r;
}

//! Stale rate recomputed from the NDJSON text alone.
double oracle_stale_rate(const std::string& ndjson) {
    struct B {
        std::string parent;
        long height;
        double found;
    };
    std::map<std::string, B> blocks;
    std::map<long, std::string> tip; // node -> tip
    std::set<long> miners;
    std::string genesis;
    std::istringstream in(ndjson);
    for (std::string line; std::getline(in, line);) {
        const auto j = nlohmann::json::parse(line);
        const std::string kind = j.at("kind");
        if (kind == "START") genesis = j.at("id");
        if (kind == "MINING_START") miners.insert(j.at("node").get<long>());
        if (kind == "BLOCK_FOUND") blocks[j.at("id")] = {j.at("ref"), j.at("height").get<long>(), j.at("t").get<double>()};
        if (kind == "TIP_SWITCH") tip[j.at("node").get<long>()] = j.at("id");
    }
    std::map<std::string, int> holders;
    for (long n : miners)
        ++holders[tip.contains(n) ? tip[n] : genesis];
    std::string best = genesis;
    std::tuple<long, int, double> best_key{0, 0, 0.0};
    for (const auto& [h, count] : holders) {
        const long height = blocks.contains(h) ? blocks[h].height : 0;
        const double found = blocks.contains(h) ? blocks[h].found : 0.0;
        const auto [bh, bc, bf] = best_key;
        if (height > bh || (height == bh && (count > bc || (count == bc && found < bf)))) {
            best = h;
            best_key = {height, count, found};
        }
    }
    std::set<std::string> chain;
    for (std::string cur = best; blocks.contains(cur); cur = blocks[cur].parent)
        chain.insert(cur);
    std::size_t stale = 0;
    for (const auto& [h, b] : blocks)
        stale += !chain.contains(h);
    return static_cast<double>(stale) / static_cast<double>(blocks.size());
}

} // namespace

TEST(Summary, Basics) {
    const auto s = summarize({4.0, 1.0, 3.0, 2.0});
    EXPECT_EQ(s.count, 4u);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.median, 2.5);
    EXPECT_DOUBLE_EQ(s.p90, 4.0);
    EXPECT_DOUBLE_EQ(s.max, 4.0);
    std::vector<double> ten;
    for (int i = 1; i <= 10; ++i)
        ten.push_back(i);
    EXPECT_DOUBLE_EQ(summarize(ten).p90, 9.0);
    EXPECT_EQ(summarize({}).count, 0u);
}

TEST(Metrics, EmptyLog) {
    EventLog log;
    EXPECT_TRUE(propagation_latency(log).empty);
    EXPECT_FALSE(stale_rate(log).has_value());
    EXPECT_DOUBLE_EQ(wasted_hashpower(log).fraction(), 0.0);
}

TEST(Metrics, TwoBlocksOnOneParentHalfStale) {
    EventLog log;
    const auto g = log.intern(hash_bytes("g")), a = log.intern(hash_bytes("A")), b = log.intern(hash_bytes("B"));
    log.append(rec(LogKind::START, 0.0, -1, g));
    log.append(rec(LogKind::MINING_START, 0.0, 0, g));
    log.append(rec(LogKind::MINING_START, 0.0, 1, g));
    log.append(rec(LogKind::BLOCK_FOUND, 5.0, 0, a, g, 1));
    log.append(rec(LogKind::BLOCK_ACCEPTED, 5.0, 0, a, g));
    log.append(rec(LogKind::TIP_SWITCH, 5.0, 0, a, g, 1));
    log.append(rec(LogKind::BLOCK_FOUND, 5.0, 1, b, g, 1));
    log.append(rec(LogKind::BLOCK_ACCEPTED, 5.0, 1, b, g));
    log.append(rec(LogKind::TIP_SWITCH, 5.0, 1, b, g, 1));
    log.append(rec(LogKind::END, 10.0, -1, 0));
    ASSERT_TRUE(stale_rate(log));
    EXPECT_DOUBLE_EQ(*stale_rate(log), 0.5);
    EXPECT_DOUBLE_EQ(oracle_stale_rate(log.to_ndjson()), 0.5);
}

TEST(Metrics, HindsightWaste) {
    // Node 1 keeps mining on genesis for 3 s after node 0's best-chain block.
    EventLog log;
    const auto g = log.intern(hash_bytes("g")), a = log.intern(hash_bytes("A"));
    log.append(rec(LogKind::START, 0.0, -1, g));
    log.append(rec(LogKind::MINING_START, 0.0, 0, g));
    log.append(rec(LogKind::MINING_START, 0.0, 1, g));
    log.append(rec(LogKind::BLOCK_FOUND, 4.0, 0, a, g, 1));
    log.append(rec(LogKind::BLOCK_ACCEPTED, 4.0, 0, a, g));
    log.append(rec(LogKind::TIP_SWITCH, 4.0, 0, a, g, 1));
    log.append(rec(LogKind::MINING_START, 4.0, 0, a, 0, 1));
    log.append(rec(LogKind::BLOCK_ACCEPTED, 7.0, 1, a, g));
    log.append(rec(LogKind::TIP_SWITCH, 7.0, 1, a, g, 1));
    log.append(rec(LogKind::MINING_START, 7.0, 1, a, 0, 1));
    log.append(rec(LogKind::END, 10.0, -1, 0));
    const auto w = wasted_hashpower(log);
    EXPECT_DOUBLE_EQ(w.mining_seconds, 20.0);
    EXPECT_DOUBLE_EQ(w.wasted_seconds, 3.0);
    const auto lat = propagation_latency(log);
    ASSERT_EQ(lat.per_block.size(), 1u);
    EXPECT_EQ(lat.per_block[0].samples, (std::vector<double>{0.0, 3.0}));
}

TEST(Metrics, SingleNodeHasNoLossOrStaleness) {
    Scenario s;
    s.node_count = 1;
    s.hash_rate = 16.0;
    s.difficulty_bits = 8;
    s.horizon_seconds = 100.0;
    s.tx_rate = 5.0;
    s.initial_mempool_txs = 100;
    const EventLog log = run_scenario(s);
    const auto lat = propagation_latency(log);
    ASSERT_FALSE(lat.empty);
    EXPECT_DOUBLE_EQ(lat.summary.max, 0.0);
    EXPECT_DOUBLE_EQ(*stale_rate(log), 0.0);
    EXPECT_DOUBLE_EQ(wasted_hashpower(log).wasted_seconds, 0.0);
    EXPECT_EQ(size_report(log).total_bytes, 0u);
}

TEST(Metrics, TwoNodeFullBlockVersusSeed) {
    struct Expect {
        RelayStrategy st;
        double latency;
        std::uint64_t critical;
    };
    for (const auto& e : {Expect{RelayStrategy::BASELINE_FULL_BLOCK, 1.05028, 1'000'280},
                          Expect{RelayStrategy::ADVERT_PROTOCOL, 0.0503, 300}}) {
        const EventLog log = run_scenario(two_node(e.st));
        const BlockIndex idx(log);
        ASSERT_FALSE(idx.blocks.empty());
        const auto& first = idx.blocks.front();
        EXPECT_EQ(first.size, 1'000'280u) << to_string(e.st);
        EXPECT_EQ(first.miner, 0);
        const auto lat = propagation_latency(log);
        ASSERT_EQ(lat.per_block[0].samples.size(), 2u);
        EXPECT_DOUBLE_EQ(lat.per_block[0].samples[0], 0.0);
        EXPECT_NEAR(lat.per_block[0].samples[1], e.latency, 1e-9) << to_string(e.st);
        const auto sizes = size_report(log);
        ASSERT_FALSE(sizes.per_block.empty());
        EXPECT_EQ(sizes.per_block[0].bytes, e.critical) << to_string(e.st);
    }
}

TEST(Metrics, FamilyBytesSumToTotal) {
    for (auto st : {RelayStrategy::BASELINE_FULL_BLOCK, RelayStrategy::ADVERT_PROTOCOL, RelayStrategy::LATE_ADVERT}) {
        Scenario s;
        s.node_count = 8;
        s.topology.degree = 3;
        s.difficulty_bits = 12;
        s.initial_mempool_txs = 300;
        s.tx_rate = 10.0;
        s.horizon_seconds = 60.0;
        s.strategy = st;
        const EventLog log = run_scenario(s);
        const auto sizes = size_report(log);
        std::uint64_t sum = 0, direct = 0;
        for (const auto& [f, b] : sizes.family_bytes)
            sum += b;
        for (const auto& r : log.records())
            if (r.kind == LogKind::MSG) direct += r.size;
        EXPECT_EQ(sum, sizes.total_bytes);
        EXPECT_EQ(direct, sizes.total_bytes);
        EXPECT_GT(sizes.total_bytes, 0u);
    }
}

TEST(Metrics, StaleRateMatchesLogReplay) {
    // Blocks every ~1 s against ~1 s full-block transfers: forks are common.
    Scenario s;
    s.node_count = 16;
    s.difficulty_bits = 10;
    s.strategy = RelayStrategy::BASELINE_FULL_BLOCK;
    s.initial_mempool_txs = 2000;
    s.horizon_seconds = 40.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        s.seed = seed;
        const EventLog log = run_scenario(s);
        const auto live = stale_rate(log);
        ASSERT_TRUE(live);
        EXPECT_GT(*live, 0.0) << "seed " << seed;
        EXPECT_DOUBLE_EQ(*live, oracle_stale_rate(log.to_ndjson())) << "seed " << seed;
    }
}

TEST(Metrics, NdjsonReplayGivesSameMetrics) {
    Scenario s;
    s.node_count = 8;
    s.topology.degree = 3;
    s.difficulty_bits = 11;
    s.initial_mempool_txs = 400;
    s.tx_rate = 10.0;
    s.horizon_seconds = 80.0;
    const EventLog log = run_scenario(s);
    std::istringstream in(log.to_ndjson());
    const EventLog back = EventLog::from_ndjson(in);
    const auto a = propagation_latency(log), b = propagation_latency(back);
    EXPECT_EQ(a.summary.count, b.summary.count);
    EXPECT_DOUBLE_EQ(a.summary.mean, b.summary.mean);
    EXPECT_DOUBLE_EQ(a.summary.p90, b.summary.p90);
    EXPECT_EQ(stale_rate(log), stale_rate(back));
    EXPECT_DOUBLE_EQ(wasted_hashpower(log).wasted_seconds, wasted_hashpower(back).wasted_seconds);
    EXPECT_EQ(size_report(log).total_bytes, size_report(back).total_bytes);
    EXPECT_DOUBLE_EQ(size_report(log).mean_critical_path_bytes(), size_report(back).mean_critical_path_bytes());
}

// A remote node keeps mining a superseded parent for the propagation delay d
// after each block, so with exponential block intervals of mean T it wastes
// a fraction 1 - exp(-d/T) of its time.
TEST(Metrics, WasteMatchesAnalyticTwoNode) {
    auto scenario = [](RelayStrategy st) {
        Scenario s;
        s.node_count = 2;
        s.topology.kind = TopologyKind::COMPLETE;
        s.hash_rates = {102.4, 1e-6};
        s.difficulty_bits = 10; // T = 10 s
        s.tx_rate = 0.0;
        s.tx_size_bytes = 100'000;
        s.initial_mempool_txs = 4500;
        s.max_block_size_bytes = 1'000'280; // 9 txs + header and coinbase = 900,280 B
        s.horizon_seconds = 4000.0;
        s.seed = 5;
        s.strategy = st;
        return s;
    };
    const double T = 10.0;
    auto remote_fraction = [](const EventLog& log) {
        for (const auto& w : wasted_hashpower(log).per_node)
            if (w.node == 1) return w.fraction();
        return -1.0;
    };
    const EventLog base = run_scenario(scenario(RelayStrategy::BASELINE_FULL_BLOCK));
    const BlockIndex idx(base);
    ASSERT_GT(idx.blocks.size(), 300u);
    const double d = transmission_delay(idx.blocks.front().size, Link{0, 1, 0.05, 1e6});
    const double analytic = 1.0 - std::exp(-d / T);
    const double measured = remote_fraction(base);
    EXPECT_NEAR(measured, analytic, 0.15 * analytic) << "d=" << d;

    const EventLog adv = run_scenario(scenario(RelayStrategy::ADVERT_PROTOCOL));
    const double measured_adv = remote_fraction(adv);
    EXPECT_LT(measured_adv, measured);
    EXPECT_NEAR(measured_adv, 1.0 - std::exp(-0.0503 / T), 0.3 * (1.0 - std::exp(-0.0503 / T)));
}
