#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bap/core/random.hpp"
#include "bap/core/types.hpp"

namespace bap::sim {

enum class RelayStrategy { BASELINE_FULL_BLOCK, ADVERT_PROTOCOL, LATE_ADVERT };

inline std::string_view to_string(RelayStrategy s) {
    switch (s) {
        case RelayStrategy::BASELINE_FULL_BLOCK: return "baseline";
        case RelayStrategy::ADVERT_PROTOCOL: return "advert";
        case RelayStrategy::LATE_ADVERT: return "late_advert";
    }
    return "?";
}

inline std::optional<RelayStrategy> parse_strategy(std::string_view s) {
    if (s == "baseline" || s == "BASELINE_FULL_BLOCK") return RelayStrategy::BASELINE_FULL_BLOCK;
    if (s == "advert" || s == "ADVERT_PROTOCOL") return RelayStrategy::ADVERT_PROTOCOL;
    if (s == "late_advert" || s == "LATE_ADVERT") return RelayStrategy::LATE_ADVERT;
    return std::nullopt;
}

enum class TopologyKind { RING, RANDOM_REGULAR, COMPLETE, EXPLICIT };

inline std::string_view to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::RING: return "ring";
        case TopologyKind::RANDOM_REGULAR: return "random_regular";
        case TopologyKind::COMPLETE: return "complete";
        case TopologyKind::EXPLICIT: return "explicit";
    }
    return "?";
}

struct TopologySpec {
    TopologyKind kind = TopologyKind::RANDOM_REGULAR;
    int degree = 4;
    std::vector<std::pair<int, int>> edges;
};

//! Per-link parameter distribution, sampled once per link at load time.
struct Distribution {
    enum class Kind { CONSTANT, UNIFORM };
    Kind kind = Kind::CONSTANT;
    double lo = 0.0;
    double hi = 0.0;

    static Distribution constant(double v) { return {Kind::CONSTANT, v, v}; }
    static Distribution uniform(double lo, double hi) { return {Kind::UNIFORM, lo, hi}; }

    double sample(RandomStream& rng) const { return kind == Kind::CONSTANT ? lo : rng.uniform(lo, hi); }
    [[nodiscard]] double min() const { return lo; }
};

//! Declarative experiment description. Defaults are the shipped artifact
//! choices: 16 nodes on a random 4-regular graph, 50 ms / 1 MB/s links.
struct Scenario {
    int node_count = 16;
    TopologySpec topology;
    double hash_rate = 64.0;           // per node, used when hash_rates is empty
    std::vector<double> hash_rates;    // optional per-node override
    int difficulty_bits = 16;          // drives the mining-time model
    int header_pow_bits = 8;           // real PoW stamped into simulated headers
    double tx_rate = 40.0;             // global Poisson arrivals per second
    std::uint32_t tx_size_bytes = kDefaultTxSizeBytes;
    std::uint32_t initial_mempool_txs = 2000; // pre-delivered to every node at t=0
    std::uint32_t coinbase_size_bytes = kDefaultCoinbaseSizeBytes;
    std::uint64_t max_block_size_bytes = kDefaultMaxBlockSizeBytes;
    double horizon_seconds = 640.0;
    std::uint64_t seed = 1;
    RelayStrategy strategy = RelayStrategy::ADVERT_PROTOCOL;
    Distribution link_latency = Distribution::constant(0.05);
    Distribution link_bandwidth = Distribution::constant(1e6);
    double processing_delay = 0.0;
    std::uint32_t pending_capacity = 32;
    std::vector<int> withholding_nodes;

    [[nodiscard]] double rate_of(int node) const {
        return hash_rates.empty() ? hash_rate : hash_rates.at(static_cast<std::size_t>(node));
    }
};

//! Raised when a scenario violates an invariant; names the offending field.
class ScenarioError : public std::invalid_argument {
public:
    ScenarioError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const { return field_; }

private:
    std::string field_;
};

namespace detail {
inline void check_distribution(const Distribution& d, const char* field, bool strictly_positive) {
    const bool ok_lo = strictly_positive ? d.lo > 0.0 : d.lo >= 0.0;
    if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !ok_lo)
        throw ScenarioError(field, strictly_positive ? "must be positive" : "must be non-negative");
    if (d.kind == Distribution::Kind::UNIFORM && d.hi < d.lo) throw ScenarioError(field, "max below min");
}
} // namespace detail

//! Checks everything that can be checked without building the topology.
inline void validate(const Scenario& s) {
    if (s.node_count < 1) throw ScenarioError("node_count", "must be at least 1");
    if (s.hash_rates.empty()) {
        if (!(s.hash_rate > 0.0) || !std::isfinite(s.hash_rate)) throw ScenarioError("hash_rate", "must be positive");
    } else {
        if (s.hash_rates.size() != static_cast<std::size_t>(s.node_count))
            throw ScenarioError("hash_rates", "needs one entry per node");
        for (double r : s.hash_rates)
            if (!(r > 0.0) || !std::isfinite(r)) throw ScenarioError("hash_rates", "every rate must be positive");
    }
    if (s.difficulty_bits < 0 || s.difficulty_bits > 128) throw ScenarioError("difficulty_bits", "must be in [0, 128]");
    if (s.header_pow_bits < 0 || s.header_pow_bits > 20) throw ScenarioError("header_pow_bits", "must be in [0, 20]");
    if (!(s.tx_rate >= 0.0) || !std::isfinite(s.tx_rate)) throw ScenarioError("tx_rate", "must be non-negative");
    if (s.tx_size_bytes < 77) throw ScenarioError("tx_size_bytes", "below the transaction serialization floor (77)");
    if (s.coinbase_size_bytes < 41) throw ScenarioError("coinbase_size_bytes", "below the coinbase serialization floor (41)");
    if (s.max_block_size_bytes < 80 + static_cast<std::uint64_t>(s.coinbase_size_bytes))
        throw ScenarioError("max_block_size_bytes", "cannot hold a header and coinbase");
    if (!(s.horizon_seconds > 0.0) || !std::isfinite(s.horizon_seconds))
        throw ScenarioError("horizon_seconds", "must be positive");
    detail::check_distribution(s.link_latency, "link.latency", false);
    detail::check_distribution(s.link_bandwidth, "link.bandwidth", true);
    if (!(s.processing_delay >= 0.0)) throw ScenarioError("processing_delay", "must be non-negative");
    if (s.pending_capacity == 0) throw ScenarioError("pending_capacity", "must be positive");
    for (int n : s.withholding_nodes)
        if (n < 0 || n >= s.node_count) throw ScenarioError("withholding_nodes", "node index out of range");
    if (s.topology.kind == TopologyKind::RANDOM_REGULAR && s.node_count > 1) {
        const int d = s.topology.degree;
        if (d < 1 || d >= s.node_count) throw ScenarioError("topology.degree", "must be in [1, node_count)");
        if ((s.node_count * d) % 2 != 0) throw ScenarioError("topology.degree", "node_count * degree must be even");
    }
}

} // namespace bap::sim
