#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bap/cli/report.hpp"
#include "bap/cli/scenario_io.hpp"
#include "bap/simnet/simulator.hpp"

namespace bap::cli {

namespace fs = std::filesystem;

enum ExitCode : int { EXIT_OK = 0, EXIT_USAGE = 1, EXIT_SCENARIO_INVALID = 2, EXIT_RUNTIME_FAILURE = 3 };

inline constexpr const char* kOutputRootEnv = "BAPSIM_OUT";
inline constexpr const char* kDefaultOutputRoot = "bapsim-out";
inline constexpr const char* kIncompleteMarker = "INCOMPLETE";

struct SweepSpec {
    std::string field;
    std::vector<std::string> values;
};

//! `key=v1,v2,...`; values are split on commas.
inline std::optional<SweepSpec> parse_sweep(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == text.size()) return std::nullopt;
    SweepSpec spec{std::string(text.substr(0, eq)), {}};
    std::string_view rest = text.substr(eq + 1);
    while (true) {
        const auto comma = rest.find(',');
        const auto v = rest.substr(0, comma);
        if (v.empty()) return std::nullopt;
        spec.values.emplace_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return spec;
}

struct RunConfig {
    std::optional<fs::path> scenario_path; // defaults only when absent
    std::optional<fs::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<sim::RelayStrategy> strategies;
    std::optional<SweepSpec> sweep;
};

inline fs::path output_root(const RunConfig& cfg) {
    if (cfg.out_dir) return *cfg.out_dir;
    if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
    return kDefaultOutputRoot;
}

//! Scenario document after the file, then the seed override, then extra
//! field overrides. Throws ScenarioParseError / ScenarioError.
inline json resolve_document(const RunConfig& cfg, std::string& source_text,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    json doc = json::object();
    if (cfg.scenario_path) {
        source_text = read_file(*cfg.scenario_path);
        doc = parse_scenario_text(source_text);
    }
    if (cfg.seed) doc["seed"] = *cfg.seed;
    for (const auto& [k, v] : overrides)
        apply_override(doc, k, v);
    return doc;
}

//! Runs one scenario into `dir`: scenario.json, events.ndjson, metrics.csv,
//! summary.json. An INCOMPLETE marker stays behind if anything fails.
inline nlohmann::ordered_json run_into(const sim::Scenario& scenario, const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path marker = dir / kIncompleteMarker;
    std::ofstream(marker) << "run did not finish; outputs in this directory are partial\n";

    auto write = [&](const char* name, auto&& body) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        body(out);
        if (!out) throw std::runtime_error("write failed: " + (dir / name).string());
    };

    write("scenario.json", [&](std::ostream& o) { o << scenario_to_json(scenario).dump(2) << '\n'; });
    const sim::EventLog log = sim::run_scenario(scenario);
    write("events.ndjson", [&](std::ostream& o) { log.write_ndjson(o); });
    const RunMetrics m(log);
    write("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, m); });
    auto summary = summary_json(m);
    summary["strategy"] = std::string(sim::to_string(scenario.strategy));
    summary["seed"] = scenario.seed;
    write("summary.json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
    fs::remove(marker);
    return summary;
}

namespace detail {

inline std::string dir_safe(std::string s) {
    for (auto& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_' && c != '=') c = '_';
    return s;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ScenarioParseError& e) {
        err << "invalid scenario: " << e.what() << '\n';
        return EXIT_SCENARIO_INVALID;
    } catch (const sim::ScenarioError& e) {
        err << "invalid scenario: " << e.what() << '\n';
        return EXIT_SCENARIO_INVALID;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << '\n';
        return EXIT_RUNTIME_FAILURE;
    }
}

inline bool check_inputs(const RunConfig& cfg, std::ostream& err) {
    if (cfg.scenario_path && !fs::is_regular_file(*cfg.scenario_path)) {
        err << "scenario file not found: " << cfg.scenario_path->string() << '\n';
        return false;
    }
    return true;
}

} // namespace detail

inline int validate_scenario_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!detail::check_inputs(cfg, err)) return EXIT_USAGE;
    return detail::guarded(err, [&] {
        std::string text;
        auto doc = resolve_document(cfg, text);
        const auto s = scenario_from_json(doc, text);
        out << scenario_to_json(s).dump(2) << '\n';
        return EXIT_OK;
    });
}

inline int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!detail::check_inputs(cfg, err)) return EXIT_USAGE;
    if (cfg.strategies.size() > 1) {
        err << "run takes at most one --strategy\n";
        return EXIT_USAGE;
    }
    return detail::guarded(err, [&] {
        std::string text;
        auto doc = resolve_document(cfg, text);
        auto s = scenario_from_json(doc, text);
        if (!cfg.strategies.empty()) s.strategy = cfg.strategies.front();
        const fs::path dir = output_root(cfg);
        const auto summary = run_into(s, dir);
        out << dir.string() << ": " << summary["blocks_found"] << " blocks, mean latency "
            << summary["latency"]["mean"] << " s, wasted " << summary["wasted_hashpower"]["fraction"] << '\n';
        return EXIT_OK;
    });
}

//! One run directory per sweep value, plus sweep.json listing them.
inline int sweep_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!detail::check_inputs(cfg, err)) return EXIT_USAGE;
    if (!cfg.sweep) {
        err << "sweep needs --sweep key=v1,v2\n";
        return EXIT_USAGE;
    }
    if (cfg.strategies.size() > 1) {
        err << "sweep takes at most one --strategy\n";
        return EXIT_USAGE;
    }
    return detail::guarded(err, [&] {
        // Resolve every entry first so a bad value fails before any run starts.
        std::vector<sim::Scenario> scenarios;
        for (const auto& v : cfg.sweep->values) {
            std::string text;
            auto doc = resolve_document(cfg, text, {{cfg.sweep->field, v}});
            auto s = scenario_from_json(doc, text);
            if (!cfg.strategies.empty()) s.strategy = cfg.strategies.front();
            scenarios.push_back(std::move(s));
        }
        const fs::path root = output_root(cfg);
        fs::create_directories(root);
        json index = json::object();
        index["field"] = cfg.sweep->field;
        index["runs"] = json::array();
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            char prefix[24];
            std::snprintf(prefix, sizeof prefix, "%03zu_", i);
            const std::string name = prefix + detail::dir_safe(cfg.sweep->field + "=" + cfg.sweep->values[i]);
            const auto summary = run_into(scenarios[i], root / name);
            index["runs"].push_back({{"value", cfg.sweep->values[i]}, {"dir", name}, {"summary", summary}});
            out << name << ": " << summary["blocks_found"] << " blocks, mean latency " << summary["latency"]["mean"]
                << " s\n";
        }
        std::ofstream(root / "sweep.json") << index.dump(2) << '\n';
        return EXIT_OK;
    });
}

//! Same scenario and seed under each strategy (default baseline and advert),
//! one directory per strategy plus comparison.json.
inline int compare_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!detail::check_inputs(cfg, err)) return EXIT_USAGE;
    return detail::guarded(err, [&] {
        std::string text;
        auto doc = resolve_document(cfg, text);
        const auto base = scenario_from_json(doc, text);
        auto strategies = cfg.strategies;
        if (strategies.empty())
            strategies = {sim::RelayStrategy::BASELINE_FULL_BLOCK, sim::RelayStrategy::ADVERT_PROTOCOL};
        const fs::path root = output_root(cfg);
        fs::create_directories(root);
        json cmp = json::object();
        cmp["seed"] = base.seed;
        cmp["runs"] = json::object();
        for (auto st : strategies) {
            auto s = base;
            s.strategy = st;
            const std::string name(sim::to_string(st));
            const auto summary = run_into(s, root / name);
            cmp["runs"][name] = {{"dir", name},
                                 {"blocks_found", summary["blocks_found"]},
                                 {"stale_rate", summary["stale_rate"]},
                                 {"mean_latency", summary["latency"]["mean"]},
                                 {"wasted_fraction", summary["wasted_hashpower"]["fraction"]},
                                 {"mean_critical_path_bytes", summary["bytes"]["mean_critical_path"]},
                                 {"total_bytes", summary["bytes"]["total"]}};
            out << name << ": mean latency " << summary["latency"]["mean"] << " s, wasted "
                << summary["wasted_hashpower"]["fraction"] << ", critical path "
                << summary["bytes"]["mean_critical_path"] << " B\n";
        }
        std::ofstream(root / "comparison.json") << cmp.dump(2) << '\n';
        return EXIT_OK;
    });
}

} // namespace bap::cli
