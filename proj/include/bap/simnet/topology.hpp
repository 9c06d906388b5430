#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "bap/core/random.hpp"
#include "bap/simnet/scenario.hpp"

namespace bap::sim {

using NodeId = int;

struct Link {
    NodeId a = 0;
    NodeId b = 0;
    double latency = 0.0;   // seconds
    double bandwidth = 1.0; // bytes per second
};

//! Latency plus serialisation time over the link's bandwidth.
inline double transmission_delay(std::uint64_t message_bytes, const Link& link) {
    return link.latency + static_cast<double>(message_bytes) / link.bandwidth;
}

class Topology {
public:
    Topology(int node_count, const std::vector<std::pair<int, int>>& edges) : neighbors_(static_cast<std::size_t>(node_count)) {
        for (auto [a, b] : edges) {
            if (a < 0 || b < 0 || a >= node_count || b >= node_count) throw ScenarioError("topology.edges", "node index out of range");
            if (a == b) throw ScenarioError("topology.edges", "self-link");
            const auto key = std::minmax(a, b);
            if (!edges_.insert({key.first, key.second}).second) throw ScenarioError("topology.edges", "duplicate link");
            neighbors_[static_cast<std::size_t>(a)].push_back(b);
            neighbors_[static_cast<std::size_t>(b)].push_back(a);
        }
        for (auto& n : neighbors_)
            std::sort(n.begin(), n.end());
    }

    [[nodiscard]] int node_count() const { return static_cast<int>(neighbors_.size()); }
    [[nodiscard]] const std::vector<NodeId>& neighbors(NodeId n) const { return neighbors_.at(static_cast<std::size_t>(n)); }
    [[nodiscard]] const std::set<std::pair<int, int>>& edges() const { return edges_; }

    [[nodiscard]] bool connected() const {
        if (neighbors_.empty()) return true;
        std::vector<bool> seen(neighbors_.size(), false);
        std::vector<NodeId> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const NodeId n = stack.back();
            stack.pop_back();
            for (NodeId m : neighbors(n))
                if (!seen[static_cast<std::size_t>(m)]) {
                    seen[static_cast<std::size_t>(m)] = true;
                    ++count;
                    stack.push_back(m);
                }
        }
        return count == neighbors_.size();
    }

private:
    std::vector<std::vector<NodeId>> neighbors_;
    std::set<std::pair<int, int>> edges_;
};

namespace detail {

// Pairing model with restarts; accepts only simple, connected graphs.
inline std::vector<std::pair<int, int>> random_regular_edges(int n, int d, RandomStream& rng) {
    for (int attempt = 0; attempt < 10'000; ++attempt) {
        std::vector<int> stubs;
        stubs.reserve(static_cast<std::size_t>(n * d));
        for (int v = 0; v < n; ++v)
            for (int k = 0; k < d; ++k)
                stubs.push_back(v);
        for (std::size_t i = stubs.size(); i > 1; --i)
            std::swap(stubs[i - 1], stubs[rng.below(i)]);
        std::set<std::pair<int, int>> seen;
        std::vector<std::pair<int, int>> edges;
        bool ok = true;
        for (std::size_t i = 0; i < stubs.size() && ok; i += 2) {
            auto [a, b] = std::minmax(stubs[i], stubs[i + 1]);
            ok = a != b && seen.insert({a, b}).second;
            edges.emplace_back(a, b);
        }
        if (ok && Topology(n, edges).connected()) return edges;
    }
    throw ScenarioError("topology", "could not generate a connected random regular graph");
}

} // namespace detail

//! Edge list for a scenario; randomness comes from the given stream.
inline std::vector<std::pair<int, int>> build_edges(const Scenario& s, RandomStream& rng) {
    const int n = s.node_count;
    std::vector<std::pair<int, int>> edges;
    switch (s.topology.kind) {
        case TopologyKind::RING:
            if (n == 2) edges.emplace_back(0, 1);
            else if (n > 2)
                for (int v = 0; v < n; ++v)
                    edges.emplace_back(std::min(v, (v + 1) % n), std::max(v, (v + 1) % n));
            break;
        case TopologyKind::COMPLETE:
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    edges.emplace_back(a, b);
            break;
        case TopologyKind::RANDOM_REGULAR:
            if (n > 1) edges = detail::random_regular_edges(n, s.topology.degree, rng);
            break;
        case TopologyKind::EXPLICIT:
            edges = s.topology.edges;
            break;
    }
    return edges;
}

} // namespace bap::sim
