#pragma once

#include "drk/embedding.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace drk::providers {

enum class ProviderKind { embedding, llm, rerank };
enum class ProviderMode { offline, remote };

struct RetryPolicy {
    int max_attempts = 3;
    double base_backoff_s = 0.5;
    double backoff_cap_s = 8.0;
};

struct OfflineEmbedderSpec {
    std::size_t dim = 256;
    std::uint64_t seed = 42;
    std::size_t ngram_n = 3;

    void validate() const; // dim >= 8, ngram_n >= 1
};

struct ProviderConfig {
    ProviderKind kind = ProviderKind::embedding;
    ProviderMode mode = ProviderMode::offline;
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env_var; // secrets are read from the environment, never stored
    double timeout_s = 30.0;
    std::size_t batch_size = 64;
    RetryPolicy retry;
    std::size_t parallelism = 4;
    double temperature = 0.0; // llm only
    OfflineEmbedderSpec offline;
    std::string transcript_path; // when set, remote request/response pairs are appended as JSON lines

    void validate() const;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Thin transport seam so tests can record, replay or forbid traffic.
class HttpClient {
public:
    virtual ~HttpClient() = default;
    virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                   const std::vector<std::pair<std::string, std::string>>& headers,
                                   double timeout_s) = 0;
};

using HttpClientFactory = std::function<std::shared_ptr<HttpClient>()>;

// httplib-backed transport; the factory is only invoked for remote providers,
// so fully-offline configurations never touch the network stack.
HttpClientFactory default_http_factory();

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    // One normalized vector per input, order preserved. Remote transports
    // split the inputs into requests of at most batch_size texts.
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);
    EmbeddingVector embed(const std::string& text);

protected:
    virtual std::vector<EmbeddingVector> embed_impl(const std::vector<std::string>& texts) = 0;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    virtual std::string complete(const std::string& prompt) = 0;
    virtual bool offline() const = 0;
};

struct RerankResult {
    std::size_t index = 0; // position in the input document list
    double relevance_score = 0.0;
};

class RerankProvider {
public:
    virtual ~RerankProvider() = default;
    // Scores descending, at most top_n entries (top_n is clamped to the
    // document count). Ties keep input order.
    virtual std::vector<RerankResult> rerank(const std::string& query, const std::vector<std::string>& documents,
                                             std::size_t top_n) = 0;
};

// Hashed character n-gram embedding: grams are projected onto dim axes with
// seeded pseudorandom signs, then L2-normalized. Near-duplicate texts land
// close in cosine, which keeps offline retrieval meaningful.
EmbeddingVector offline_embed(const std::string& text, const OfflineEmbedderSpec& spec);

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config,
                                                           const HttpClientFactory& http = default_http_factory());
std::unique_ptr<LlmProvider> make_llm_provider(const ProviderConfig& config,
                                               const HttpClientFactory& http = default_http_factory());
std::unique_ptr<RerankProvider> make_rerank_provider(const ProviderConfig& config,
                                                     const HttpClientFactory& http = default_http_factory());

} // namespace drk::providers
