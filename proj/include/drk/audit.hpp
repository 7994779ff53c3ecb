#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace drk::cli {

enum class AuditAction { ingest, index, query, answer, eval };

std::string_view action_name(AuditAction action);
AuditAction parse_action(std::string_view name);

// One line of the append-only audit log. With redaction on (the default)
// queries and answers are logged as content hashes, never as raw text, so a
// log line can prove what was asked and answered without storing either.
struct AuditEvent {
    std::uint64_t seq = 0;       // assigned on append, strictly increasing
    std::string timestamp;       // RFC 3339 UTC, assigned on append when empty
    AuditAction action = AuditAction::query;
    std::string query_hash;
    std::vector<std::string> chunk_ids;
    std::string answer_hash;
    std::string status;
};

nlohmann::json audit_to_json(const AuditEvent& event);
AuditEvent audit_from_json(const nlohmann::json& j);

// JSON-lines log. The file is only ever appended to; on open the last line
// is read back so sequence numbers keep increasing across process restarts.
class AuditLog {
public:
    explicit AuditLog(std::filesystem::path path);

    std::uint64_t append(AuditEvent event);
    std::uint64_t next_seq() const { return next_seq_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::uint64_t next_seq_ = 1;
};

std::string content_hash(std::string_view content);
std::string rfc3339_utc_now();

} // namespace drk::cli
