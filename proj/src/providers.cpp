#include "drk/providers.hpp"

#include "drk/errors.hpp"
#include "drk/text.hpp"
#include "drk/verify.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <regex>
#include <thread>

namespace drk::providers {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::string env_api_key(const std::string& var_name) {
    if (var_name.empty())
        return {};
    const char* value = std::getenv(var_name.c_str());
    return value ? std::string(value) : std::string{};
}

} // namespace

void OfflineEmbedderSpec::validate() const {
    if (dim < 8)
        throw Error(Errc::bad_config, "offline embedder dim must be at least 8");
    if (ngram_n == 0)
        throw Error(Errc::bad_config, "offline embedder ngram_n must be positive");
}

void ProviderConfig::validate() const {
    if (batch_size == 0)
        throw Error(Errc::bad_config, "provider batch_size must be at least 1");
    if (timeout_s <= 0)
        throw Error(Errc::bad_config, "provider timeout must be positive");
    if (retry.max_attempts < 1)
        throw Error(Errc::bad_config, "provider retry max_attempts must be at least 1");
    if (mode == ProviderMode::remote && endpoint_url.empty())
        throw Error(Errc::bad_config, "remote provider needs an endpoint_url");
    if (mode == ProviderMode::offline && kind == ProviderKind::embedding)
        offline.validate();
}

EmbeddingVector offline_embed(const std::string& text, const OfflineEmbedderSpec& spec) {
    spec.validate();
    if (text.empty())
        throw Error(Errc::empty_input, "cannot embed an empty text");

    const std::string folded = drk::text::fold_case(text);
    const auto cps = drk::text::decode_utf8(folded);
    std::vector<double> values(spec.dim, 0.0);

    auto bump = [&](std::string_view gram) {
        const std::uint64_t h = splitmix64(drk::text::fnv1a64(gram) ^ spec.seed);
        const std::size_t axis = h % spec.dim;
        const double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
        values[axis] += sign;
    };

    if (cps.size() < spec.ngram_n) {
        bump(folded);
    } else {
        for (std::size_t i = 0; i + spec.ngram_n <= cps.size(); ++i) {
            const std::size_t from = cps[i].byte_offset;
            const std::size_t to = i + spec.ngram_n == cps.size() ? folded.size() : cps[i + spec.ngram_n].byte_offset;
            bump(std::string_view(folded).substr(from, to - from));
        }
    }

    EmbeddingVector v{std::move(values), false};
    return l2_normalize(std::move(v));
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
    if (texts.empty())
        throw Error(Errc::empty_input, "embed_batch needs at least one text");
    for (const auto& t : texts)
        if (t.empty())
            throw Error(Errc::empty_input, "embed_batch inputs must be non-empty");
    auto out = embed_impl(texts);
    std::size_t dim = 0;
    for (auto& v : out) {
        if (dim == 0)
            dim = v.dim();
        else if (v.dim() != dim)
            throw Error(Errc::dimension_drift, "provider returned vectors of inconsistent dimensionality");
        if (!v.normalized)
            v = l2_normalize(std::move(v));
    }
    return out;
}

EmbeddingVector EmbeddingProvider::embed(const std::string& text) {
    return embed_batch({text}).front();
}

namespace {

// ---------------------------------------------------------------------------
// Offline providers: pure functions of (input, config), bit-identical across
// calls, no transport.

class OfflineEmbedding final : public EmbeddingProvider {
public:
    explicit OfflineEmbedding(OfflineEmbedderSpec spec) : spec_(spec) { spec_.validate(); }

protected:
    std::vector<EmbeddingVector> embed_impl(const std::vector<std::string>& texts) override {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts)
            out.push_back(offline_embed(t, spec_));
        return out;
    }

private:
    OfflineEmbedderSpec spec_;
};

// Extractive generator: pulls the "[i] text" snippet lines out of the prompt's
// context section and answers with the first sentence of each of the top
// three, each suffixed with its citation marker. Every sentence is verbatim
// snippet text, so verification passes in one round.
class OfflineLlm final : public LlmProvider {
public:
    std::string complete(const std::string& prompt) override {
        static const std::regex snippet_line(R"(^\[(\d+)\]\s+(.*)$)");
        std::vector<std::pair<std::size_t, std::string>> snippets;
        std::istringstream in(prompt);
        std::string line;
        while (std::getline(in, line)) {
            std::smatch m;
            if (std::regex_match(line, m, snippet_line))
                snippets.emplace_back(static_cast<std::size_t>(std::stoul(m[1].str())), m[2].str());
        }

        std::string answer;
        const std::size_t take = std::min<std::size_t>(3, snippets.size());
        for (std::size_t i = 0; i < take; ++i) {
            const auto& [idx, text] = snippets[i];
            const auto sentences = verify::split_sentences(text);
            const std::string first = sentences.empty() ? text : sentences.front();
            if (!answer.empty())
                answer += " ";
            answer += first + " [" + std::to_string(idx) + "]";
        }
        return answer;
    }

    bool offline() const override { return true; }
};

class OfflineRerank final : public RerankProvider {
public:
    std::vector<RerankResult> rerank(const std::string& query, const std::vector<std::string>& documents,
                                     std::size_t top_n) override {
        if (documents.empty())
            throw Error(Errc::empty_input, "rerank needs at least one document");
        top_n = std::min(top_n, documents.size());
        std::vector<RerankResult> scored;
        scored.reserve(documents.size());
        for (std::size_t i = 0; i < documents.size(); ++i)
            scored.push_back({i, verify::support_score(query, documents[i])});
        std::stable_sort(scored.begin(), scored.end(),
                         [](const RerankResult& a, const RerankResult& b) { return a.relevance_score > b.relevance_score; });
        scored.resize(top_n);
        return scored;
    }
};

// ---------------------------------------------------------------------------
// Remote providers.

class RecordingHttpClient final : public HttpClient {
public:
    RecordingHttpClient(std::shared_ptr<HttpClient> inner, std::string path)
        : inner_(std::move(inner)), path_(std::move(path)) {}

    HttpResponse post_json(const std::string& url, const std::string& body,
                           const std::vector<std::pair<std::string, std::string>>& headers,
                           double timeout_s) override {
        HttpResponse res;
        std::string error;
        try {
            res = inner_->post_json(url, body, headers, timeout_s);
        } catch (const Error& e) {
            error = e.what();
        }
        // Bodies only; auth headers stay out of the transcript.
        json line{{"url", url}, {"request", body}, {"status", res.status}, {"response", res.body}};
        if (!error.empty())
            line["error"] = error;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            std::ofstream out(path_, std::ios::app);
            out << line.dump() << "\n";
        }
        if (!error.empty())
            throw Error(Errc::http_error, error);
        return res;
    }

private:
    std::shared_ptr<HttpClient> inner_;
    std::string path_;
    std::mutex mutex_;
};

std::shared_ptr<HttpClient> wrap_transcript(std::shared_ptr<HttpClient> client, const ProviderConfig& config) {
    if (config.transcript_path.empty())
        return client;
    return std::make_shared<RecordingHttpClient>(std::move(client), config.transcript_path);
}

class RemoteBase {
public:
    RemoteBase(ProviderConfig config, std::shared_ptr<HttpClient> http)
        : config_(std::move(config)), http_(std::move(http)) {}

protected:
    json post_with_retry(const json& payload) const {
        std::vector<std::pair<std::string, std::string>> headers;
        const std::string key = env_api_key(config_.api_key_env_var);
        if (!key.empty())
            headers.emplace_back("Authorization", "Bearer " + key);

        const std::string body = payload.dump();
        const int attempts = config_.retry.max_attempts;
        Errc last_code = Errc::http_error;
        std::string last_message = "no attempt made";

        for (int attempt = 1; attempt <= attempts; ++attempt) {
            if (attempt > 1) {
                // Exponential, non-decreasing, capped.
                const double backoff = std::min(config_.retry.backoff_cap_s,
                                                config_.retry.base_backoff_s * std::pow(2.0, attempt - 2));
                std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            }
            bool got_response = false;
            HttpResponse res;
            try {
                res = http_->post_json(config_.endpoint_url, body, headers, config_.timeout_s);
                got_response = true;
            } catch (const Error& e) {
                if (e.code() != Errc::http_error && e.code() != Errc::timeout)
                    throw;
                last_code = e.code();
                last_message = e.what();
            }
            if (got_response) {
                if (res.status >= 200 && res.status < 300) {
                    try {
                        return json::parse(res.body);
                    } catch (const json::exception& e) {
                        // The server answered; a garbage body is not retryable.
                        throw Error(Errc::http_error, std::string("malformed provider response: ") + e.what());
                    }
                }
                last_code = Errc::http_error;
                last_message = config_.endpoint_url + " returned status " + std::to_string(res.status);
            }
        }
        throw Error(last_code, last_message + " (after " + std::to_string(attempts) + " attempts)");
    }

    ProviderConfig config_;
    std::shared_ptr<HttpClient> http_;
};

class RemoteEmbedding final : public EmbeddingProvider, RemoteBase {
public:
    RemoteEmbedding(ProviderConfig config, std::shared_ptr<HttpClient> http)
        : RemoteBase(std::move(config), std::move(http)) {}

protected:
    std::vector<EmbeddingVector> embed_impl(const std::vector<std::string>& texts) override {
        std::vector<std::vector<std::string>> batches;
        for (std::size_t i = 0; i < texts.size(); i += config_.batch_size) {
            const std::size_t end = std::min(i + config_.batch_size, texts.size());
            batches.emplace_back(texts.begin() + static_cast<std::ptrdiff_t>(i),
                                 texts.begin() + static_cast<std::ptrdiff_t>(end));
        }

        std::vector<std::vector<EmbeddingVector>> results(batches.size());
        run_batches(batches, results);

        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (auto& batch : results)
            for (auto& v : batch)
                out.push_back(std::move(v));
        return out;
    }

private:
    void run_batches(const std::vector<std::vector<std::string>>& batches,
                     std::vector<std::vector<EmbeddingVector>>& results) const {
        const std::size_t workers = std::max<std::size_t>(1, std::min(config_.parallelism, batches.size()));
        if (workers == 1) {
            for (std::size_t i = 0; i < batches.size(); ++i)
                results[i] = embed_one_batch(batches[i]);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr error;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= batches.size())
                        return;
                    try {
                        results[i] = embed_one_batch(batches[i]);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool)
            t.join();
        if (error)
            std::rethrow_exception(error);
    }

    std::vector<EmbeddingVector> embed_one_batch(const std::vector<std::string>& batch) const {
        const json payload{{"model", config_.model_name}, {"input", batch}};
        const json reply = post_with_retry(payload);
        if (!reply.contains("data") || !reply["data"].is_array() || reply["data"].size() != batch.size())
            throw Error(Errc::http_error, "embedding response does not match request size");

        std::vector<EmbeddingVector> out(batch.size());
        std::size_t fallback_pos = 0;
        for (const auto& item : reply["data"]) {
            const std::size_t pos = item.contains("index") ? item["index"].get<std::size_t>() : fallback_pos;
            ++fallback_pos;
            if (pos >= out.size())
                throw Error(Errc::http_error, "embedding response index out of range");
            EmbeddingVector v;
            v.values = item.at("embedding").get<std::vector<double>>();
            out[pos] = std::move(v);
        }
        return out;
    }
};

class RemoteLlm final : public LlmProvider, RemoteBase {
public:
    RemoteLlm(ProviderConfig config, std::shared_ptr<HttpClient> http)
        : RemoteBase(std::move(config), std::move(http)) {}

    std::string complete(const std::string& prompt) override {
        if (prompt.empty())
            throw Error(Errc::empty_input, "prompt must be non-empty");
        const json payload{{"model", config_.model_name},
                           {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                           {"temperature", config_.temperature}};
        const json reply = post_with_retry(payload);
        try {
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw Error(Errc::http_error, "chat response is missing choices[0].message.content");
        }
    }

    bool offline() const override { return false; }
};

class RemoteRerank final : public RerankProvider, RemoteBase {
public:
    RemoteRerank(ProviderConfig config, std::shared_ptr<HttpClient> http)
        : RemoteBase(std::move(config), std::move(http)) {}

    std::vector<RerankResult> rerank(const std::string& query, const std::vector<std::string>& documents,
                                     std::size_t top_n) override {
        if (documents.empty())
            throw Error(Errc::empty_input, "rerank needs at least one document");
        top_n = std::min(top_n, documents.size());
        const json payload{
            {"model", config_.model_name}, {"query", query}, {"documents", documents}, {"top_n", top_n}};
        const json reply = post_with_retry(payload);
        std::vector<RerankResult> out;
        try {
            for (const auto& item : reply.at("results")) {
                RerankResult r;
                r.index = item.at("index").get<std::size_t>();
                r.relevance_score = item.at("relevance_score").get<double>();
                if (r.index >= documents.size())
                    throw Error(Errc::http_error, "rerank response index out of range");
                out.push_back(r);
            }
        } catch (const json::exception&) {
            throw Error(Errc::http_error, "rerank response is missing results[].index/relevance_score");
        }
        std::stable_sort(out.begin(), out.end(),
                         [](const RerankResult& a, const RerankResult& b) { return a.relevance_score > b.relevance_score; });
        if (out.size() > top_n)
            out.resize(top_n);
        return out;
    }
};

} // namespace

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config, const HttpClientFactory& http) {
    config.validate();
    if (config.mode == ProviderMode::offline)
        return std::make_unique<OfflineEmbedding>(config.offline);
    return std::make_unique<RemoteEmbedding>(config, wrap_transcript(http(), config));
}

std::unique_ptr<LlmProvider> make_llm_provider(const ProviderConfig& config, const HttpClientFactory& http) {
    config.validate();
    if (config.mode == ProviderMode::offline)
        return std::make_unique<OfflineLlm>();
    return std::make_unique<RemoteLlm>(config, wrap_transcript(http(), config));
}

std::unique_ptr<RerankProvider> make_rerank_provider(const ProviderConfig& config, const HttpClientFactory& http) {
    config.validate();
    if (config.mode == ProviderMode::offline)
        return std::make_unique<OfflineRerank>();
    return std::make_unique<RemoteRerank>(config, wrap_transcript(http(), config));
}

} // namespace drk::providers
