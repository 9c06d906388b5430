#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "bap/metrics/metrics.hpp"

namespace bap::cli {

inline constexpr int kMetricsSchemaVersion = 1;

//! Column order of metrics.csv.
inline constexpr const char* kMetricsCsvHeader = "block,height,miner,found_at,on_best_chain,metric,value";

struct RunMetrics {
    metrics::BlockIndex index;
    metrics::PropagationStats latency;
    std::optional<double> stale;
    metrics::WasteStats waste;
    metrics::SizeStats sizes;

    explicit RunMetrics(const sim::EventLog& log)
        : index(log), latency(metrics::propagation_latency(log)), stale(metrics::stale_rate(log)),
          waste(metrics::wasted_hashpower(log)), sizes(metrics::size_report(log)) {}
};

namespace detail {
inline std::string fmt(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, end};
}
} // namespace detail

//! One row per block per metric. Latency rows cover accepting nodes only
//! (orphaned nodes contribute no sample); the critical-path row is absent
//! for blocks that no other node accepted.
inline void write_metrics_csv(std::ostream& out, const RunMetrics& m) {
    out << kMetricsCsvHeader << '\n';
    std::unordered_map<Hash, const metrics::BlockLatency*> lat;
    for (const auto& b : m.latency.per_block)
        lat.emplace(b.block, &b);
    std::unordered_map<Hash, std::uint64_t> crit;
    for (const auto& b : m.sizes.per_block)
        crit.emplace(b.block, b.bytes);

    for (const auto& b : m.index.blocks) {
        const std::string prefix = b.hash.hex() + ',' + std::to_string(b.height) + ',' + std::to_string(b.miner) +
                                   ',' + detail::fmt(b.found_at) + ',' +
                                   (m.index.on_best_chain(b.hash) ? "1" : "0") + ',';
        auto row = [&](const char* metric, const std::string& value) { out << prefix << metric << ',' << value << '\n'; };
        row("size_bytes", std::to_string(b.size));
        row("accepting_nodes", std::to_string(b.accepted_at.size()));
        if (auto it = lat.find(b.hash); it != lat.end() && !it->second->samples.empty()) {
            const auto s = metrics::summarize(it->second->samples);
            row("latency_mean", detail::fmt(s.mean));
            row("latency_median", detail::fmt(s.median));
            row("latency_p90", detail::fmt(s.p90));
            row("latency_max", detail::fmt(s.max));
        }
        if (auto it = crit.find(b.hash); it != crit.end()) row("critical_path_bytes", std::to_string(it->second));
    }
}

inline nlohmann::ordered_json summary_json(const RunMetrics& m) {
    using nlohmann::ordered_json;
    const auto& s = m.latency.summary;
    ordered_json families = ordered_json::object();
    for (const auto& [f, bytes] : m.sizes.family_bytes)
        families[std::string(sim::to_string(f))] = bytes;

    std::size_t best_chain_blocks = 0;
    for (const auto& b : m.index.blocks)
        if (m.index.on_best_chain(b.hash)) ++best_chain_blocks;

    ordered_json j;
    j["schema_version"] = kMetricsSchemaVersion;
    j["horizon_seconds"] = m.index.horizon;
    j["blocks_found"] = m.index.blocks.size();
    j["best_chain_blocks"] = best_chain_blocks;
    j["best_tip"] = m.index.best_tip.hex();
    j["stale_rate"] = m.stale ? ordered_json(*m.stale) : ordered_json(nullptr);
    j["latency"] = {{"samples", s.count},   {"mean", s.mean}, {"median", s.median},
                    {"p90", s.p90},         {"max", s.max},   {"empty", m.latency.empty},
                    {"orphaned_nodes", "excluded"}};
    j["wasted_hashpower"] = {{"fraction", m.waste.fraction()},
                             {"wasted_seconds", m.waste.wasted_seconds},
                             {"mining_seconds", m.waste.mining_seconds}};
    j["bytes"] = {{"total", m.sizes.total_bytes},
                  {"by_family", families},
                  {"mean_critical_path", m.sizes.mean_critical_path_bytes()}};
    return j;
}

} // namespace bap::cli
