#pragma once

#include "drk/audit.hpp"
#include "drk/config.hpp"
#include "drk/hybrid_index.hpp"
#include "drk/verify.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace drk::cli {

// Ties the pipeline to the on-disk layout:
//   <data_dir>/corpus/chunks.jsonl   chunk store (JSON lines)
//   <data_dir>/index/snapshot.drk    hybrid index snapshot
//   <data_dir>/audit/audit.jsonl     append-only audit log
//   <data_dir>/reports/              eval output
class Engine {
public:
    explicit Engine(EngineConfig config,
                    providers::HttpClientFactory http = providers::default_http_factory());

    // Rebuilds the chunk store from a JSON-lines manifest ({uri, format,
    // metadata?} per line; relative uris resolve against the manifest).
    // Returns the number of chunks written.
    std::size_t ingest_manifest(const std::filesystem::path& manifest_path);

    // Embeds every stored chunk through the configured provider and writes
    // the snapshot. Guarded by an advisory lock file; single writer.
    std::size_t build_index();

    verify::FinalAnswer ask(const std::string& question, std::optional<bool> strict_override = std::nullopt);
    // The printed `ask` shape: {status, answer, citations, report}.
    nlohmann::json ask_json(const std::string& question, std::optional<bool> strict_override = std::nullopt);

    const EngineConfig& config() const { return config_; }
    const index::HybridIndex& loaded_index();

private:
    AuditLog& audit();
    void record(AuditAction action, const std::string& query, const std::vector<std::string>& chunk_ids,
                const std::string& answer, const std::string& status);

    EngineConfig config_;
    providers::HttpClientFactory http_;
    std::optional<index::HybridIndex> index_;
    std::unique_ptr<AuditLog> audit_;
};

} // namespace drk::cli
