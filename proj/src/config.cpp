#include "drk/config.hpp"

#include "drk/errors.hpp"

#include <fstream>

namespace drk::cli {

using nlohmann::json;

namespace {

providers::ProviderMode parse_mode(const std::string& mode) {
    if (mode == "offline")
        return providers::ProviderMode::offline;
    if (mode == "remote")
        return providers::ProviderMode::remote;
    throw Error(Errc::bad_config, "provider mode must be 'offline' or 'remote', got '" + mode + "'");
}

json provider_to_json(const providers::ProviderConfig& p) {
    return json{{"mode", p.mode == providers::ProviderMode::offline ? "offline" : "remote"},
                {"endpoint_url", p.endpoint_url},
                {"model_name", p.model_name},
                {"api_key_env_var", p.api_key_env_var},
                {"timeout_s", p.timeout_s},
                {"batch_size", p.batch_size},
                {"retry",
                 {{"max_attempts", p.retry.max_attempts},
                  {"base_backoff_s", p.retry.base_backoff_s},
                  {"backoff_cap_s", p.retry.backoff_cap_s}}},
                {"parallelism", p.parallelism},
                {"temperature", p.temperature},
                {"offline",
                 {{"dim", p.offline.dim}, {"seed", p.offline.seed}, {"ngram_n", p.offline.ngram_n}}},
                {"transcript_path", p.transcript_path}};
}

providers::ProviderConfig provider_from_json(const json& j, providers::ProviderKind kind,
                                             const providers::ProviderConfig& defaults) {
    providers::ProviderConfig p = defaults;
    p.kind = kind;
    if (j.contains("mode"))
        p.mode = parse_mode(j["mode"].get<std::string>());
    p.endpoint_url = j.value("endpoint_url", p.endpoint_url);
    p.model_name = j.value("model_name", p.model_name);
    p.api_key_env_var = j.value("api_key_env_var", p.api_key_env_var);
    p.timeout_s = j.value("timeout_s", p.timeout_s);
    p.batch_size = j.value("batch_size", p.batch_size);
    if (j.contains("retry")) {
        const auto& r = j["retry"];
        p.retry.max_attempts = r.value("max_attempts", p.retry.max_attempts);
        p.retry.base_backoff_s = r.value("base_backoff_s", p.retry.base_backoff_s);
        p.retry.backoff_cap_s = r.value("backoff_cap_s", p.retry.backoff_cap_s);
    }
    p.parallelism = j.value("parallelism", p.parallelism);
    p.temperature = j.value("temperature", p.temperature);
    if (j.contains("offline")) {
        const auto& o = j["offline"];
        p.offline.dim = o.value("dim", p.offline.dim);
        p.offline.seed = o.value("seed", p.offline.seed);
        p.offline.ngram_n = o.value("ngram_n", p.offline.ngram_n);
    }
    p.transcript_path = j.value("transcript_path", p.transcript_path);
    return p;
}

} // namespace

EngineConfig EngineConfig::defaults() {
    EngineConfig cfg;
    cfg.embedding.kind = providers::ProviderKind::embedding;
    cfg.llm.kind = providers::ProviderKind::llm;
    cfg.rerank.kind = providers::ProviderKind::rerank;
    return cfg;
}

EngineConfig EngineConfig::from_json(const json& j) {
    EngineConfig cfg = defaults();
    if (j.contains("data_dir"))
        cfg.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("chunking")) {
        const auto& c = j["chunking"];
        cfg.chunking.chunk_tokens = c.value("chunk_tokens", cfg.chunking.chunk_tokens);
        cfg.chunking.overlap_tokens = c.value("overlap_tokens", cfg.chunking.overlap_tokens);
    }
    if (j.contains("bm25")) {
        const auto& b = j["bm25"];
        cfg.bm25.k1 = b.value("k1", cfg.bm25.k1);
        cfg.bm25.b = b.value("b", cfg.bm25.b);
    }
    if (j.contains("hnsw")) {
        const auto& h = j["hnsw"];
        cfg.hnsw.M = h.value("M", cfg.hnsw.M);
        cfg.hnsw.ef_construction = h.value("ef_construction", cfg.hnsw.ef_construction);
        cfg.hnsw.ef_search = h.value("ef_search", cfg.hnsw.ef_search);
        cfg.hnsw.level_seed = h.value("level_seed", cfg.hnsw.level_seed);
    }
    if (j.contains("fusion")) {
        const auto& f = j["fusion"];
        const std::string method = f.value("method", std::string{"rrf"});
        if (method == "rrf")
            cfg.fusion.method = retrieval::FusionMethod::rrf;
        else if (method == "weighted")
            cfg.fusion.method = retrieval::FusionMethod::weighted;
        else
            throw Error(Errc::bad_config, "fusion method must be 'rrf' or 'weighted', got '" + method + "'");
        cfg.fusion.rrf_c = f.value("rrf_c", cfg.fusion.rrf_c);
        cfg.fusion.vector_weight = f.value("vector_weight", cfg.fusion.vector_weight);
        cfg.fusion.n_candidates = f.value("n_candidates", cfg.fusion.n_candidates);
        cfg.fusion.keep = f.value("keep", cfg.fusion.keep);
    }
    if (j.contains("support")) {
        const auto& s = j["support"];
        cfg.support.threshold = s.value("threshold", cfg.support.threshold);
        cfg.support.max_rounds = s.value("max_rounds", cfg.support.max_rounds);
        cfg.support.strict = s.value("strict", cfg.support.strict);
        cfg.support.check_uncited_against_all =
            s.value("check_uncited_against_all", cfg.support.check_uncited_against_all);
    }
    if (j.contains("costar")) {
        const auto& c = j["costar"];
        cfg.costar.context_preamble = c.value("context", cfg.costar.context_preamble);
        cfg.costar.objective = c.value("objective", cfg.costar.objective);
        cfg.costar.style = c.value("style", cfg.costar.style);
        cfg.costar.tone = c.value("tone", cfg.costar.tone);
        cfg.costar.audience = c.value("audience", cfg.costar.audience);
        cfg.costar.response_rules = c.value("response", cfg.costar.response_rules);
        cfg.costar.max_context_tokens = c.value("max_context_tokens", cfg.costar.max_context_tokens);
    }
    cfg.costar_template_path = j.value("costar_template", cfg.costar_template_path);
    if (j.contains("providers")) {
        const auto& p = j["providers"];
        if (p.contains("embedding"))
            cfg.embedding = provider_from_json(p["embedding"], providers::ProviderKind::embedding, cfg.embedding);
        if (p.contains("llm"))
            cfg.llm = provider_from_json(p["llm"], providers::ProviderKind::llm, cfg.llm);
        if (p.contains("rerank"))
            cfg.rerank = provider_from_json(p["rerank"], providers::ProviderKind::rerank, cfg.rerank);
    }
    if (j.contains("audit"))
        cfg.audit_redact = j["audit"].value("redact", cfg.audit_redact);
    cfg.validate();
    return cfg;
}

json EngineConfig::to_json() const {
    return json{
        {"data_dir", data_dir.string()},
        {"chunking", {{"chunk_tokens", chunking.chunk_tokens}, {"overlap_tokens", chunking.overlap_tokens}}},
        {"bm25", {{"k1", bm25.k1}, {"b", bm25.b}}},
        {"hnsw",
         {{"M", hnsw.M},
          {"ef_construction", hnsw.ef_construction},
          {"ef_search", hnsw.ef_search},
          {"level_seed", hnsw.level_seed}}},
        {"fusion",
         {{"method", fusion.method == retrieval::FusionMethod::rrf ? "rrf" : "weighted"},
          {"rrf_c", fusion.rrf_c},
          {"vector_weight", fusion.vector_weight},
          {"n_candidates", fusion.n_candidates},
          {"keep", fusion.keep}}},
        {"support",
         {{"threshold", support.threshold},
          {"max_rounds", support.max_rounds},
          {"strict", support.strict},
          {"check_uncited_against_all", support.check_uncited_against_all}}},
        {"costar",
         {{"context", costar.context_preamble},
          {"objective", costar.objective},
          {"style", costar.style},
          {"tone", costar.tone},
          {"audience", costar.audience},
          {"response", costar.response_rules},
          {"max_context_tokens", costar.max_context_tokens}}},
        {"costar_template", costar_template_path},
        {"providers",
         {{"embedding", provider_to_json(embedding)},
          {"llm", provider_to_json(llm)},
          {"rerank", provider_to_json(rerank)}}},
        {"audit", {{"redact", audit_redact}}},
    };
}

void EngineConfig::validate() const {
    chunking.validate();
    bm25.validate();
    hnsw.validate();
    fusion.validate();
    support.validate();
    costar.validate();
    embedding.validate();
    llm.validate();
    rerank.validate();
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::io_error, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(Errc::bad_config, path.string() + ": " + e.what());
    }
    return from_json(j);
}

void EngineConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::io_error, "cannot write config " + path.string());
    out << to_json().dump(2) << "\n";
}

} // namespace drk::cli
