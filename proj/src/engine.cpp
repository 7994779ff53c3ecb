#include "drk/engine.hpp"

#include "drk/errors.hpp"
#include "drk/generation.hpp"
#include "drk/retrieval.hpp"
#include "drk/snapshot.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>

namespace drk::cli {

using nlohmann::json;

namespace {

// Advisory single-writer lock around snapshot builds.
class LockFile {
public:
    explicit LockFile(std::filesystem::path path) : path_(std::move(path)) {
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw Error(Errc::io_error,
                        "index is locked by another writer (remove " + path_.string() + " if stale)");
    }
    ~LockFile() {
        if (fd_ >= 0) {
            ::close(fd_);
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::io_error, "cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

json chunk_to_json(const ingest::Chunk& c) {
    return json{{"chunk_id", c.chunk_id},
                {"doc_id", c.doc_id},
                {"seq_no", c.seq_no},
                {"token_span", {c.token_start, c.token_end}},
                {"char_span", {c.char_start, c.char_end}},
                {"text", c.text}};
}

ingest::Chunk chunk_from_json(const json& j) {
    ingest::Chunk c;
    c.chunk_id = j.at("chunk_id").get<std::string>();
    c.doc_id = j.at("doc_id").get<std::string>();
    c.seq_no = j.at("seq_no").get<std::size_t>();
    c.token_start = j.at("token_span").at(0).get<std::size_t>();
    c.token_end = j.at("token_span").at(1).get<std::size_t>();
    c.char_start = j.at("char_span").at(0).get<std::size_t>();
    c.char_end = j.at("char_span").at(1).get<std::size_t>();
    c.text = j.at("text").get<std::string>();
    return c;
}

} // namespace

Engine::Engine(EngineConfig config, providers::HttpClientFactory http)
    : config_(std::move(config)), http_(std::move(http)) {
    config_.validate();
    if (!config_.costar_template_path.empty())
        config_.costar.template_text = generation::load_costar_template(config_.costar_template_path);
}

AuditLog& Engine::audit() {
    if (!audit_)
        audit_ = std::make_unique<AuditLog>(config_.audit_file());
    return *audit_;
}

void Engine::record(AuditAction action, const std::string& query, const std::vector<std::string>& chunk_ids,
                    const std::string& answer, const std::string& status) {
    AuditEvent event;
    event.action = action;
    if (!query.empty())
        event.query_hash = config_.audit_redact ? content_hash(query) : query;
    event.chunk_ids = chunk_ids;
    if (!answer.empty())
        event.answer_hash = config_.audit_redact ? content_hash(answer) : answer;
    event.status = status;
    audit().append(std::move(event));
}

std::size_t Engine::ingest_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in)
        throw Error(Errc::io_error, "cannot open manifest " + manifest_path.string());

    std::filesystem::create_directories(config_.corpus_dir());
    std::ofstream out(config_.chunks_file(), std::ios::trunc);
    if (!out)
        throw Error(Errc::io_error, "cannot write " + config_.chunks_file().string());

    std::size_t chunk_count = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(Errc::bad_config, manifest_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        const std::string uri = entry.at("uri").get<std::string>();
        const auto format = ingest::parse_format(entry.value("format", std::string{"plain"}));

        std::filesystem::path source(uri);
        if (source.is_relative())
            source = manifest_path.parent_path() / source;
        ingest::Document doc = ingest::load_document(read_file(source), format, uri);
        if (entry.contains("metadata"))
            for (const auto& [k, v] : entry["metadata"].items())
                doc.metadata[k] = v.get<std::string>();

        for (const auto& chunk : ingest::chunk_document(doc, config_.chunking)) {
            out << chunk_to_json(chunk).dump() << "\n";
            ++chunk_count;
        }
    }
    record(AuditAction::ingest, manifest_path.string(), {}, {}, "ok:" + std::to_string(chunk_count) + " chunks");
    return chunk_count;
}

std::size_t Engine::build_index() {
    std::ifstream in(config_.chunks_file());
    if (!in)
        throw Error(Errc::io_error, "no chunk store at " + config_.chunks_file().string() + " (run ingest first)");

    std::vector<ingest::Chunk> chunks;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        chunks.push_back(chunk_from_json(json::parse(line)));
    }
    if (chunks.empty())
        throw Error(Errc::empty_index, "chunk store is empty");

    std::filesystem::create_directories(config_.index_dir());
    LockFile lock(config_.index_dir() / ".lock");

    auto embedder = providers::make_embedding_provider(config_.embedding, http_);
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks)
        texts.push_back(c.text);
    auto vectors = embedder->embed_batch(texts);

    index::HybridIndex idx(config_.bm25, config_.hnsw);
    for (std::size_t i = 0; i < chunks.size(); ++i)
        idx.add(chunks[i], std::move(vectors[i]));

    index::snapshot_save(idx, config_.snapshot_file());
    index_ = std::move(idx);
    record(AuditAction::index, {}, {}, {}, "ok:" + std::to_string(chunks.size()) + " chunks");
    return chunks.size();
}

const index::HybridIndex& Engine::loaded_index() {
    if (!index_)
        index_ = index::snapshot_load(config_.snapshot_file());
    return *index_;
}

verify::FinalAnswer Engine::ask(const std::string& question, std::optional<bool> strict_override) {
    const index::HybridIndex& idx = loaded_index();

    auto embedder = providers::make_embedding_provider(config_.embedding, http_);
    auto llm = providers::make_llm_provider(config_.llm, http_);
    auto reranker = providers::make_rerank_provider(config_.rerank, http_);

    verify::SupportPolicy policy = config_.support;
    if (strict_override)
        policy.strict = *strict_override;

    const auto refined = retrieval::refine_query(question, *llm);
    const auto candidates = retrieval::hybrid_retrieve(refined, idx, *embedder, config_.fusion);
    const auto context = retrieval::rerank_candidates(refined, candidates, idx, *reranker, config_.fusion);

    verify::FinalAnswer answer = verify::grounded_answer_loop(refined, context.snippets, *llm, config_.costar, policy);

    std::vector<std::string> context_ids;
    context_ids.reserve(context.snippets.size());
    for (const auto& s : context.snippets)
        context_ids.push_back(s.chunk_id);
    // Exactly one answer event per ask, however many rounds the loop used.
    record(AuditAction::answer, question, context_ids, answer.text, std::string(verify::status_name(answer.status)));
    return answer;
}

json Engine::ask_json(const std::string& question, std::optional<bool> strict_override) {
    const verify::FinalAnswer answer = ask(question, strict_override);
    json citations = json::array();
    for (std::size_t i = 0; i < answer.citations.size(); ++i) {
        const auto& c = answer.citations[i];
        json entry{{"sentence", c.sentence}, {"support", c.support}};
        if (i < answer.report.verdicts.size() && answer.report.verdicts[i].supporting_chunk_id)
            entry["chunk_id"] = *answer.report.verdicts[i].supporting_chunk_id;
        else if (!c.chunk_ids.empty())
            entry["chunk_id"] = c.chunk_ids.front();
        else
            entry["chunk_id"] = nullptr;
        citations.push_back(std::move(entry));
    }
    return json{{"status", verify::status_name(answer.status)},
                {"answer", answer.text},
                {"citations", std::move(citations)},
                {"report", verify::report_to_json(answer.report)}};
}

} // namespace drk::cli
