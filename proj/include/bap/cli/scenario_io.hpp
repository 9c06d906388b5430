#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bap/simnet/scenario.hpp"

namespace bap::cli {

using json = nlohmann::ordered_json;

inline constexpr int kScenarioSchemaVersion = 1;

//! Malformed scenario text or a field of the wrong shape. `line` is 1-based,
//! 0 when unknown.
class ScenarioParseError : public std::runtime_error {
public:
    ScenarioParseError(std::string field, std::size_t line, const std::string& what)
        : std::runtime_error(format(field, line, what)), field_(std::move(field)), line_(line) {}
    [[nodiscard]] const std::string& field() const { return field_; }
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& field, std::size_t line, const std::string& what) {
        std::string out;
        if (line) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += field + ": ";
        return out + what;
    }
    std::string field_;
    std::size_t line_;
};

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset; ++i)
        if (text[i] == '\n') ++line;
    return line;
}

// Best effort: the first line mentioning the last path component as a key.
inline std::size_t line_of_field(std::string_view text, const std::string& path) {
    if (text.empty() || path.empty()) return 0;
    const auto dot = path.rfind('.');
    const std::string key = "\"" + path.substr(dot == std::string::npos ? 0 : dot + 1) + "\"";
    const auto pos = text.find(key);
    return pos == std::string_view::npos ? 0 : line_of_offset(text, pos);
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ScenarioParseError(field, line_of_field(text_, field), what);
    }

    void only_keys(const json& obj, const std::string& prefix, std::initializer_list<std::string_view> allowed) const {
        if (!obj.is_object()) fail(prefix.empty() ? "scenario" : prefix, "expected an object");
        const std::set<std::string_view> ok(allowed);
        for (const auto& [key, value] : obj.items())
            if (!ok.contains(key)) fail(prefix.empty() ? key : prefix + "." + key, "unknown field");
    }

    double number(const json& v, const std::string& field) const {
        if (!v.is_number()) fail(field, "expected a number");
        return v.get<double>();
    }

    std::int64_t integer(const json& v, const std::string& field) const {
        if (!v.is_number_integer()) fail(field, "expected an integer");
        return v.is_number_unsigned() ? static_cast<std::int64_t>(v.get<std::uint64_t>()) : v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const json& v, const std::string& field) const {
        if (!v.is_number_unsigned()) fail(field, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    template <class T>
    T bounded(const json& v, const std::string& field) const {
        const auto x = integer(v, field);
        if (x < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
            static_cast<std::uint64_t>(x) > static_cast<std::uint64_t>(std::numeric_limits<T>::max()))
            fail(field, "out of range");
        return static_cast<T>(x);
    }

    std::string string(const json& v, const std::string& field) const {
        if (!v.is_string()) fail(field, "expected a string");
        return v.get<std::string>();
    }

    sim::Distribution distribution(const json& v, const std::string& field) const {
        if (v.is_number()) return sim::Distribution::constant(v.get<double>());
        if (!v.is_object()) fail(field, "expected a number or {\"uniform\": [min, max]}");
        only_keys(v, field, {"uniform"});
        const auto& u = v.at("uniform");
        if (!u.is_array() || u.size() != 2) fail(field + ".uniform", "expected [min, max]");
        return sim::Distribution::uniform(number(u[0], field + ".uniform"), number(u[1], field + ".uniform"));
    }

private:
    std::string_view text_;
};

} // namespace detail

//! Builds a scenario from a parsed document: defaults for absent fields,
//! unknown fields rejected. Runs validate() on the result.
inline sim::Scenario scenario_from_json(const json& doc, std::string_view source_text = {}) {
    const detail::Reader rd(source_text);
    rd.only_keys(doc, "",
                 {"schema_version", "node_count", "topology", "hash_rate", "hash_rates", "difficulty_bits",
                  "header_pow_bits", "tx_rate", "tx_size_bytes", "initial_mempool_txs", "coinbase_size_bytes",
                  "max_block_size_bytes", "horizon_seconds", "seed", "strategy", "link", "processing_delay",
                  "pending_capacity", "withholding_nodes"});
    if (doc.contains("schema_version")) {
        const auto v = rd.integer(doc["schema_version"], "schema_version");
        if (v != kScenarioSchemaVersion)
            rd.fail("schema_version", "unsupported version " + std::to_string(v) + " (expected " +
                                          std::to_string(kScenarioSchemaVersion) + ")");
    }

    sim::Scenario s;
    auto has = [&](const char* k) { return doc.contains(k); };
    if (has("node_count")) s.node_count = rd.bounded<int>(doc["node_count"], "node_count");
    if (has("topology")) {
        const auto& t = doc["topology"];
        rd.only_keys(t, "topology", {"kind", "degree", "edges"});
        if (t.contains("kind")) {
            const auto k = rd.string(t["kind"], "topology.kind");
            if (k == "ring") s.topology.kind = sim::TopologyKind::RING;
            else if (k == "random_regular") s.topology.kind = sim::TopologyKind::RANDOM_REGULAR;
            else if (k == "complete") s.topology.kind = sim::TopologyKind::COMPLETE;
            else if (k == "explicit") s.topology.kind = sim::TopologyKind::EXPLICIT;
            else rd.fail("topology.kind", "expected ring, random_regular, complete or explicit");
        }
        if (t.contains("degree")) s.topology.degree = rd.bounded<int>(t["degree"], "topology.degree");
        if (t.contains("edges")) {
            if (!t["edges"].is_array()) rd.fail("topology.edges", "expected a list of [a, b] pairs");
            for (const auto& e : t["edges"]) {
                if (!e.is_array() || e.size() != 2) rd.fail("topology.edges", "expected a list of [a, b] pairs");
                s.topology.edges.emplace_back(rd.bounded<int>(e[0], "topology.edges"),
                                              rd.bounded<int>(e[1], "topology.edges"));
            }
        }
    }
    const bool degree_given = has("topology") && doc["topology"].contains("degree");
    if (!degree_given && s.node_count > 1) {
        // Default degree shrinks to fit small networks.
        s.topology.degree = std::min(s.topology.degree, s.node_count - 1);
        if ((s.node_count * s.topology.degree) % 2) --s.topology.degree;
    }
    if (has("hash_rate")) s.hash_rate = rd.number(doc["hash_rate"], "hash_rate");
    if (has("hash_rates")) {
        if (!doc["hash_rates"].is_array()) rd.fail("hash_rates", "expected a list of numbers");
        for (const auto& r : doc["hash_rates"])
            s.hash_rates.push_back(rd.number(r, "hash_rates"));
    }
    if (has("difficulty_bits")) s.difficulty_bits = rd.bounded<int>(doc["difficulty_bits"], "difficulty_bits");
    if (has("header_pow_bits")) s.header_pow_bits = rd.bounded<int>(doc["header_pow_bits"], "header_pow_bits");
    if (has("tx_rate")) s.tx_rate = rd.number(doc["tx_rate"], "tx_rate");
    if (has("tx_size_bytes")) s.tx_size_bytes = rd.bounded<std::uint32_t>(doc["tx_size_bytes"], "tx_size_bytes");
    if (has("initial_mempool_txs"))
        s.initial_mempool_txs = rd.bounded<std::uint32_t>(doc["initial_mempool_txs"], "initial_mempool_txs");
    if (has("coinbase_size_bytes"))
        s.coinbase_size_bytes = rd.bounded<std::uint32_t>(doc["coinbase_size_bytes"], "coinbase_size_bytes");
    if (has("max_block_size_bytes"))
        s.max_block_size_bytes = rd.unsigned_integer(doc["max_block_size_bytes"], "max_block_size_bytes");
    if (has("horizon_seconds")) s.horizon_seconds = rd.number(doc["horizon_seconds"], "horizon_seconds");
    if (has("seed")) s.seed = rd.unsigned_integer(doc["seed"], "seed");
    if (has("strategy")) {
        auto st = sim::parse_strategy(rd.string(doc["strategy"], "strategy"));
        if (!st) rd.fail("strategy", "expected baseline, advert or late_advert");
        s.strategy = *st;
    }
    if (has("link")) {
        const auto& l = doc["link"];
        rd.only_keys(l, "link", {"latency", "bandwidth"});
        if (l.contains("latency")) s.link_latency = rd.distribution(l["latency"], "link.latency");
        if (l.contains("bandwidth")) s.link_bandwidth = rd.distribution(l["bandwidth"], "link.bandwidth");
    }
    if (has("processing_delay")) s.processing_delay = rd.number(doc["processing_delay"], "processing_delay");
    if (has("pending_capacity"))
        s.pending_capacity = rd.bounded<std::uint32_t>(doc["pending_capacity"], "pending_capacity");
    if (has("withholding_nodes")) {
        if (!doc["withholding_nodes"].is_array()) rd.fail("withholding_nodes", "expected a list of node indices");
        for (const auto& n : doc["withholding_nodes"])
            s.withholding_nodes.push_back(rd.bounded<int>(n, "withholding_nodes"));
    }

    try {
        sim::validate(s);
    } catch (const sim::ScenarioError& e) {
        const auto line = detail::line_of_field(source_text, e.field());
        if (!line) throw;
        throw sim::ScenarioError(e.field(), std::string(e.what()).substr(e.field().size() + 2) + " (line " +
                                                std::to_string(line) + ")");
    }
    return s;
}

inline json distribution_to_json(const sim::Distribution& d) {
    if (d.kind == sim::Distribution::Kind::CONSTANT) return d.lo;
    return json{{"uniform", {d.lo, d.hi}}};
}

//! Fully resolved form: every field present, so the document alone
//! reproduces the run.
inline json scenario_to_json(const sim::Scenario& s) {
    json edges = json::array();
    for (const auto& [a, b] : s.topology.edges)
        edges.push_back({a, b});
    json doc;
    doc["schema_version"] = kScenarioSchemaVersion;
    doc["node_count"] = s.node_count;
    doc["topology"] = {{"kind", std::string(to_string(s.topology.kind))},
                       {"degree", s.topology.degree},
                       {"edges", edges}};
    doc["hash_rate"] = s.hash_rate;
    doc["hash_rates"] = s.hash_rates;
    doc["difficulty_bits"] = s.difficulty_bits;
    doc["header_pow_bits"] = s.header_pow_bits;
    doc["tx_rate"] = s.tx_rate;
    doc["tx_size_bytes"] = s.tx_size_bytes;
    doc["initial_mempool_txs"] = s.initial_mempool_txs;
    doc["coinbase_size_bytes"] = s.coinbase_size_bytes;
    doc["max_block_size_bytes"] = s.max_block_size_bytes;
    doc["horizon_seconds"] = s.horizon_seconds;
    doc["seed"] = s.seed;
    doc["strategy"] = std::string(sim::to_string(s.strategy));
    doc["link"] = {{"latency", distribution_to_json(s.link_latency)},
                   {"bandwidth", distribution_to_json(s.link_bandwidth)}};
    doc["processing_delay"] = s.processing_delay;
    doc["pending_capacity"] = s.pending_capacity;
    doc["withholding_nodes"] = s.withholding_nodes;
    return doc;
}

inline json parse_scenario_text(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioParseError("", detail::line_of_offset(text, e.byte ? e.byte - 1 : 0), e.what());
    }
}

inline sim::Scenario parse_scenario(std::string_view text) { return scenario_from_json(parse_scenario_text(text), text); }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline sim::Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

//! Sets `path` (dotted, e.g. "link.bandwidth") in a scenario document to
//! `value_text`, read as JSON when it parses and as a string otherwise.
inline void apply_override(json& doc, const std::string& path, std::string_view value_text) {
    json value;
    try {
        value = json::parse(value_text);
    } catch (const json::parse_error&) {
        value = std::string(value_text);
    }
    json* cur = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ScenarioParseError(path, 0, "malformed field path");
        if (dot == std::string::npos) {
            (*cur)[key] = std::move(value);
            return;
        }
        if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

} // namespace bap::cli
