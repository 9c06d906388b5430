#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "bap/core/hash.hpp"

namespace bap::sim {

enum class MsgFamily : std::uint8_t { NONE, ADVERT, TX_REQUEST, TX_RESPONSE, BLOCK_SEED, FULL_BLOCK, TRANSACTION };

inline constexpr MsgFamily kAllFamilies[] = {MsgFamily::ADVERT,     MsgFamily::TX_REQUEST, MsgFamily::TX_RESPONSE,
                                             MsgFamily::BLOCK_SEED, MsgFamily::FULL_BLOCK, MsgFamily::TRANSACTION};

inline std::string_view to_string(MsgFamily f) {
    switch (f) {
        case MsgFamily::NONE: return "NONE";
        case MsgFamily::ADVERT: return "ADVERT";
        case MsgFamily::TX_REQUEST: return "TX_REQUEST";
        case MsgFamily::TX_RESPONSE: return "TX_RESPONSE";
        case MsgFamily::BLOCK_SEED: return "BLOCK_SEED";
        case MsgFamily::FULL_BLOCK: return "FULL_BLOCK";
        case MsgFamily::TRANSACTION: return "TRANSACTION";
    }
    return "?";
}

//! Record kinds. A MSG record is written at delivery and carries its send time.
enum class LogKind : std::uint8_t {
    START,          // id = genesis hash
    MSG,            // node = src, peer = dst, id = dedup key, ref = related block/advert
    TX_ARRIVAL,     // id = txid
    MINING_START,   // id = parent hash, height = parent height
    BLOCK_FOUND,    // id = block, ref = parent, aux = advert key (zero for full-block relay), size = block bytes
    BLOCK_ACCEPTED, // id = block, ref = parent
    BLOCK_REJECTED, // id = block, reason = verdict code
    TIP_SWITCH,     // id = new tip, ref = previous tip
    END,            // simulation horizon
};

inline constexpr LogKind kAllLogKinds[] = {LogKind::START,          LogKind::MSG,        LogKind::TX_ARRIVAL,
                                           LogKind::MINING_START,   LogKind::BLOCK_FOUND, LogKind::BLOCK_ACCEPTED,
                                           LogKind::BLOCK_REJECTED, LogKind::TIP_SWITCH,  LogKind::END};

inline std::string_view to_string(LogKind k) {
    switch (k) {
        case LogKind::START: return "START";
        case LogKind::MSG: return "MSG";
        case LogKind::TX_ARRIVAL: return "TX_ARRIVAL";
        case LogKind::MINING_START: return "MINING_START";
        case LogKind::BLOCK_FOUND: return "BLOCK_FOUND";
        case LogKind::BLOCK_ACCEPTED: return "BLOCK_ACCEPTED";
        case LogKind::BLOCK_REJECTED: return "BLOCK_REJECTED";
        case LogKind::TIP_SWITCH: return "TIP_SWITCH";
        case LogKind::END: return "END";
    }
    return "?";
}

//! One log line. Hashes are interned into the owning EventLog.
struct LogRecord {
    double time = 0.0;
    double sent_at = 0.0;
    LogKind kind = LogKind::START;
    MsgFamily family = MsgFamily::NONE;
    std::uint8_t reason = 0;
    std::int32_t node = -1;
    std::int32_t peer = -1;
    std::uint64_t size = 0;
    std::int64_t height = 0;
    std::uint32_t id = 0;
    std::uint32_t ref = 0;
    std::uint32_t aux = 0;

    bool operator==(const LogRecord&) const = default;
};

//! Append-only simulation log.
class EventLog {
public:
    EventLog() { intern(Hash{}); }

    std::uint32_t intern(const Hash& h) {
        auto [it, inserted] = index_.try_emplace(h, static_cast<std::uint32_t>(hashes_.size()));
        if (inserted) hashes_.push_back(h);
        return it->second;
    }

    void append(const LogRecord& r) { records_.push_back(r); }

    [[nodiscard]] const std::vector<LogRecord>& records() const { return records_; }
    [[nodiscard]] const Hash& hash(std::uint32_t interned) const { return hashes_.at(interned); }
    [[nodiscard]] std::size_t size() const { return records_.size(); }
    [[nodiscard]] bool empty() const { return records_.empty(); }

    //! One JSON object per line, fields in a fixed order; byte-stable for equal logs.
    template <class Sink>
    void write_ndjson(Sink&& sink) const {
        std::string line;
        for (const auto& r : records_) {
            line.clear();
            line += "{\"t\":";
            append_double(line, r.time);
            line += ",\"kind\":\"";
            line += to_string(r.kind);
            line += '"';
            if (r.kind == LogKind::MSG) {
                line += ",\"family\":\"";
                line += to_string(r.family);
                line += "\",\"sent\":";
                append_double(line, r.sent_at);
                line += ",\"src\":" + std::to_string(r.node) + ",\"dst\":" + std::to_string(r.peer);
                line += ",\"size\":" + std::to_string(r.size);
            } else if (r.node >= 0) {
                line += ",\"node\":" + std::to_string(r.node);
            }
            if (r.kind == LogKind::BLOCK_FOUND) line += ",\"size\":" + std::to_string(r.size);
            if (has_height(r.kind)) line += ",\"height\":" + std::to_string(r.height);
            if (r.kind == LogKind::BLOCK_REJECTED) line += ",\"reason\":" + std::to_string(r.reason);
            if (r.id) line += ",\"id\":\"" + hashes_[r.id].hex() + '"';
            if (r.ref) line += ",\"ref\":\"" + hashes_[r.ref].hex() + '"';
            if (r.aux) line += ",\"aux\":\"" + hashes_[r.aux].hex() + '"';
            line += "}\n";
            sink(std::string_view(line));
        }
    }

    void write_ndjson(std::ostream& os) const {
        write_ndjson([&os](std::string_view s) { os.write(s.data(), static_cast<std::streamsize>(s.size())); });
    }

    [[nodiscard]] std::string to_ndjson() const {
        std::string out;
        write_ndjson([&out](std::string_view s) { out += s; });
        return out;
    }

    static EventLog from_ndjson(std::istream& is) {
        EventLog log;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw std::runtime_error("event log line " + std::to_string(line_no) + ": " + e.what());
            }
            LogRecord r;
            r.time = j.at("t").get<double>();
            r.sent_at = r.time;
            r.kind = parse_kind(j.at("kind").get<std::string>());
            if (r.kind == LogKind::MSG) {
                r.family = parse_family(j.at("family").get<std::string>());
                r.sent_at = j.at("sent").get<double>();
                r.node = j.at("src").get<std::int32_t>();
                r.peer = j.at("dst").get<std::int32_t>();
                r.size = j.at("size").get<std::uint64_t>();
            } else if (j.contains("node")) {
                r.node = j.at("node").get<std::int32_t>();
            }
            if (j.contains("size")) r.size = j.at("size").get<std::uint64_t>();
            if (j.contains("height")) r.height = j.at("height").get<std::int64_t>();
            if (j.contains("reason")) r.reason = j.at("reason").get<std::uint8_t>();
            auto hash_field = [&](const char* key) -> std::uint32_t {
                return j.contains(key) ? log.intern(Hash::from_hex(j.at(key).get<std::string>())) : 0;
            };
            r.id = hash_field("id");
            r.ref = hash_field("ref");
            r.aux = hash_field("aux");
            log.append(r);
        }
        return log;
    }

private:
    static bool has_height(LogKind k) {
        return k == LogKind::MINING_START || k == LogKind::BLOCK_FOUND || k == LogKind::BLOCK_ACCEPTED ||
               k == LogKind::TIP_SWITCH;
    }

    static void append_double(std::string& out, double v) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.append(buf, res.ptr);
    }

    static LogKind parse_kind(const std::string& s) {
        for (auto k : kAllLogKinds)
            if (to_string(k) == s) return k;
        throw std::runtime_error("unknown log record kind " + s);
    }

    static MsgFamily parse_family(const std::string& s) {
        for (auto f : kAllFamilies)
            if (to_string(f) == s) return f;
        throw std::runtime_error("unknown message family " + s);
    }

    std::vector<LogRecord> records_;
    std::vector<Hash> hashes_;
    std::unordered_map<Hash, std::uint32_t> index_;
};

} // namespace bap::sim
