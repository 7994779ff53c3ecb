#include "drk/audit.hpp"

#include "drk/errors.hpp"
#include "drk/text.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace drk::cli {

using nlohmann::json;

std::string_view action_name(AuditAction action) {
    switch (action) {
    case AuditAction::ingest: return "ingest";
    case AuditAction::index: return "index";
    case AuditAction::query: return "query";
    case AuditAction::answer: return "answer";
    case AuditAction::eval: return "eval";
    }
    return "query";
}

AuditAction parse_action(std::string_view name) {
    for (const auto action : {AuditAction::ingest, AuditAction::index, AuditAction::query, AuditAction::answer,
                              AuditAction::eval})
        if (action_name(action) == name)
            return action;
    throw Error(Errc::bad_config, "unknown audit action '" + std::string(name) + "'");
}

json audit_to_json(const AuditEvent& event) {
    return json{{"seq", event.seq},
                {"timestamp", event.timestamp},
                {"action", action_name(event.action)},
                {"query_hash", event.query_hash},
                {"chunk_ids", event.chunk_ids},
                {"answer_hash", event.answer_hash},
                {"status", event.status}};
}

AuditEvent audit_from_json(const json& j) {
    AuditEvent event;
    event.seq = j.at("seq").get<std::uint64_t>();
    event.timestamp = j.at("timestamp").get<std::string>();
    event.action = parse_action(j.at("action").get<std::string>());
    event.query_hash = j.value("query_hash", std::string{});
    event.chunk_ids = j.value("chunk_ids", std::vector<std::string>{});
    event.answer_hash = j.value("answer_hash", std::string{});
    event.status = j.value("status", std::string{});
    return event;
}

AuditLog::AuditLog(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
    std::ifstream in(path_);
    if (!in)
        return;
    std::string line, last;
    while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            last = line;
    if (last.empty())
        return;
    try {
        next_seq_ = json::parse(last).at("seq").get<std::uint64_t>() + 1;
    } catch (const json::exception& e) {
        throw Error(Errc::io_error, "audit log " + path_.string() + " has a corrupt tail line: " + e.what());
    }
}

std::uint64_t AuditLog::append(AuditEvent event) {
    event.seq = next_seq_;
    if (event.timestamp.empty())
        event.timestamp = rfc3339_utc_now();
    std::ofstream out(path_, std::ios::app);
    if (!out)
        throw Error(Errc::io_error, "cannot open audit log " + path_.string());
    out << audit_to_json(event).dump() << "\n";
    if (!out)
        throw Error(Errc::io_error, "failed appending to audit log " + path_.string());
    return next_seq_++;
}

std::string content_hash(std::string_view content) {
    return text::to_hex64(text::fnv1a64(content));
}

std::string rfc3339_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(now);
    const auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(now - secs).count();
    const std::time_t t = std::chrono::system_clock::to_time_t(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(millis));
    return buf;
}

} // namespace drk::cli
