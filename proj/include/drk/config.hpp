#pragma once

#include "drk/generation.hpp"
#include "drk/hnsw.hpp"
#include "drk/bm25.hpp"
#include "drk/ingest.hpp"
#include "drk/providers.hpp"
#include "drk/retrieval.hpp"
#include "drk/verify.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace drk::cli {

// Whole-engine configuration. A single JSON document; flags override file
// values and secrets only ever enter through named environment variables.
struct EngineConfig {
    std::filesystem::path data_dir = "data";
    ingest::ChunkingPolicy chunking;
    index::Bm25Params bm25;
    index::HnswParams hnsw;
    retrieval::FusionPolicy fusion;
    verify::SupportPolicy support;
    generation::CoStarSpec costar = generation::CoStarSpec::defaults();
    std::string costar_template_path; // empty -> built-in layout
    providers::ProviderConfig embedding;
    providers::ProviderConfig llm;
    providers::ProviderConfig rerank;
    bool audit_redact = true;

    static EngineConfig defaults();
    static EngineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static EngineConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
    void validate() const;

    std::filesystem::path corpus_dir() const { return data_dir / "corpus"; }
    std::filesystem::path chunks_file() const { return corpus_dir() / "chunks.jsonl"; }
    std::filesystem::path index_dir() const { return data_dir / "index"; }
    std::filesystem::path snapshot_file() const { return index_dir() / "snapshot.drk"; }
    std::filesystem::path audit_dir() const { return data_dir / "audit"; }
    std::filesystem::path audit_file() const { return audit_dir() / "audit.jsonl"; }
    std::filesystem::path reports_dir() const { return data_dir / "reports"; }
};

} // namespace drk::cli
