#pragma once

#include "drk/hybrid_index.hpp"
#include "drk/providers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace drk::retrieval {

struct RefinedQuery {
    std::string original;
    std::string refined;
    std::vector<std::string> expansion_terms;
    bool fallback = false; // identity refinement because the provider failed or is offline
};

enum class FusionMethod { rrf, weighted };

struct FusionPolicy {
    FusionMethod method = FusionMethod::rrf;
    double rrf_c = 60.0;
    double vector_weight = 0.5; // weighted fusion only
    std::size_t n_candidates = 200;
    std::size_t keep = 50;

    void validate() const;
};

struct Candidate {
    std::string chunk_id;
    std::optional<std::size_t> bm25_rank; // 1-based
    std::optional<double> bm25_score;
    std::optional<std::size_t> vector_rank; // 1-based
    std::optional<double> vector_similarity;
    double fused_score = 0.0;
    std::size_t fused_rank = 0; // 1-based, a permutation of 1..|set|
};

using CandidateSet = std::vector<Candidate>;

struct Snippet {
    std::string chunk_id;
    std::string text;
    double rerank_score = 0.0;
    std::size_t context_index = 0; // 1-based position used for citation markers
};

struct RerankedContext {
    std::vector<Snippet> snippets;
    bool fallback = false; // fused order used because the rerank provider failed
};

// Rewrites the query through the llm (fixed template: one rewritten query,
// then up to five expansion terms, one per line). Offline providers and
// provider failures fall back to identity refinement.
RefinedQuery refine_query(const std::string& raw, providers::LlmProvider& llm);

// BM25 leg gets the refined terms plus expansion terms; the vector leg embeds
// the refined sentence only. Lists are fused by reciprocal rank (1/(c+rank))
// or by min-max weighted score, then cut to n_candidates.
CandidateSet hybrid_retrieve(const RefinedQuery& refined, const index::HybridIndex& idx,
                             providers::EmbeddingProvider& embedder, const FusionPolicy& policy);

// One provider call over all candidate texts with top_n = keep. On provider
// failure the fused order is kept and flagged. Resulting snippets are ordered
// by rerank score (ties by fused rank) and numbered 1..keep.
RerankedContext rerank_candidates(const RefinedQuery& refined, const CandidateSet& candidates,
                                  const index::HybridIndex& idx, providers::RerankProvider& reranker,
                                  const FusionPolicy& policy, bool fallback_on_error = true);

// Pure fusion core, exposed for the rank-dominance and scale-invariance tests.
CandidateSet fuse_ranked_lists(const std::vector<index::ScoredChunk>& bm25_list,
                               const std::vector<index::ScoredChunk>& vector_list, const FusionPolicy& policy);

} // namespace drk::retrieval
