#include "drk/retrieval.hpp"

#include "drk/errors.hpp"
#include "drk/text.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace drk::retrieval {

namespace {

constexpr std::size_t kMaxExpansionTerms = 5;
constexpr std::size_t kRerankDocumentLimit = 1000;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string refinement_prompt(const std::string& raw) {
    return "Rewrite the search query below so it is unambiguous, expanding abbreviations and "
           "resolving vague references. Then list up to five expansion terms (synonyms or close "
           "variants), one per line. Output only the rewritten query on the first line followed "
           "by the expansion terms, with no labels or commentary.\n\nQuery: " +
           raw;
}

} // namespace

void FusionPolicy::validate() const {
    if (rrf_c <= 0.0)
        throw Error(Errc::bad_config, "fusion rrf_c must be positive");
    if (vector_weight < 0.0 || vector_weight > 1.0)
        throw Error(Errc::bad_config, "fusion vector_weight must lie in [0, 1]");
    if (n_candidates == 0 || keep == 0)
        throw Error(Errc::bad_config, "fusion n_candidates and keep must be positive");
    if (keep > n_candidates)
        throw Error(Errc::bad_config, "fusion keep must not exceed n_candidates");
}

RefinedQuery refine_query(const std::string& raw, providers::LlmProvider& llm) {
    const std::string cleaned = trim(raw);
    if (cleaned.empty())
        throw Error(Errc::empty_query, "query is blank");

    RefinedQuery out;
    out.original = raw;
    out.refined = cleaned;

    if (llm.offline()) {
        out.fallback = true;
        return out;
    }

    std::string reply;
    try {
        reply = llm.complete(refinement_prompt(cleaned));
    } catch (const Error&) {
        out.fallback = true;
        return out;
    }

    std::istringstream in(reply);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (!t.empty())
            lines.push_back(t);
    }
    if (lines.empty()) {
        out.fallback = true;
        return out;
    }
    out.refined = lines.front();
    for (std::size_t i = 1; i < lines.size() && out.expansion_terms.size() < kMaxExpansionTerms; ++i)
        out.expansion_terms.push_back(lines[i]);
    return out;
}

CandidateSet fuse_ranked_lists(const std::vector<index::ScoredChunk>& bm25_list,
                               const std::vector<index::ScoredChunk>& vector_list, const FusionPolicy& policy) {
    policy.validate();
    std::map<std::string, Candidate> by_id;
    for (std::size_t i = 0; i < bm25_list.size(); ++i) {
        auto& c = by_id[bm25_list[i].chunk_id];
        c.chunk_id = bm25_list[i].chunk_id;
        c.bm25_rank = i + 1;
        c.bm25_score = bm25_list[i].score;
    }
    for (std::size_t i = 0; i < vector_list.size(); ++i) {
        auto& c = by_id[vector_list[i].chunk_id];
        c.chunk_id = vector_list[i].chunk_id;
        c.vector_rank = i + 1;
        c.vector_similarity = vector_list[i].score;
    }

    if (policy.method == FusionMethod::rrf) {
        for (auto& [id, c] : by_id) {
            double s = 0.0;
            if (c.bm25_rank)
                s += 1.0 / (policy.rrf_c + static_cast<double>(*c.bm25_rank));
            if (c.vector_rank)
                s += 1.0 / (policy.rrf_c + static_cast<double>(*c.vector_rank));
            c.fused_score = s;
        }
    } else {
        // Min-max normalize each leg over its own members; a constant (or
        // single-element) leg normalizes to 1 for every member.
        auto minmax = [](const std::vector<index::ScoredChunk>& list) {
            double lo = 0.0, hi = 0.0;
            if (!list.empty()) {
                lo = hi = list.front().score;
                for (const auto& s : list) {
                    lo = std::min(lo, s.score);
                    hi = std::max(hi, s.score);
                }
            }
            return std::pair<double, double>{lo, hi};
        };
        const auto [blo, bhi] = minmax(bm25_list);
        const auto [vlo, vhi] = minmax(vector_list);
        auto norm = [](double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 1.0; };
        for (auto& [id, c] : by_id) {
            const double v = c.vector_similarity ? norm(*c.vector_similarity, vlo, vhi) : 0.0;
            const double b = c.bm25_score ? norm(*c.bm25_score, blo, bhi) : 0.0;
            c.fused_score = policy.vector_weight * v + (1.0 - policy.vector_weight) * b;
        }
    }

    CandidateSet fused;
    fused.reserve(by_id.size());
    for (auto& [id, c] : by_id)
        fused.push_back(std::move(c));
    std::sort(fused.begin(), fused.end(), [](const Candidate& a, const Candidate& b) {
        if (a.fused_score != b.fused_score)
            return a.fused_score > b.fused_score;
        return a.chunk_id < b.chunk_id;
    });
    if (fused.size() > policy.n_candidates)
        fused.resize(policy.n_candidates);
    for (std::size_t i = 0; i < fused.size(); ++i)
        fused[i].fused_rank = i + 1;
    return fused;
}

CandidateSet hybrid_retrieve(const RefinedQuery& refined, const index::HybridIndex& idx,
                             providers::EmbeddingProvider& embedder, const FusionPolicy& policy) {
    policy.validate();
    if (idx.size() == 0)
        throw Error(Errc::empty_index, "cannot retrieve from an empty index");

    // Expansion terms feed the lexical leg only.
    std::vector<std::string> terms = index::HybridIndex::index_terms(refined.refined);
    for (const auto& e : refined.expansion_terms)
        for (const auto& t : index::HybridIndex::index_terms(e))
            terms.push_back(t);

    const auto bm25_list = idx.bm25_search(terms, policy.n_candidates);
    const auto vector_list = idx.hnsw_search(embedder.embed(refined.refined), policy.n_candidates);
    return fuse_ranked_lists(bm25_list, vector_list, policy);
}

RerankedContext rerank_candidates(const RefinedQuery& refined, const CandidateSet& candidates,
                                  const index::HybridIndex& idx, providers::RerankProvider& reranker,
                                  const FusionPolicy& policy, bool fallback_on_error) {
    policy.validate();
    if (candidates.empty())
        throw Error(Errc::empty_input, "no candidates to rerank");

    // Candidates arrive fused-rank ordered; enforce it and honor the provider
    // document limit by pre-truncating the tail.
    CandidateSet pool = candidates;
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) { return a.fused_rank < b.fused_rank; });
    if (pool.size() > kRerankDocumentLimit)
        pool.resize(kRerankDocumentLimit);

    std::vector<std::string> texts;
    texts.reserve(pool.size());
    for (const auto& c : pool)
        texts.push_back(idx.chunk(c.chunk_id).text);

    RerankedContext out;
    std::vector<providers::RerankResult> results;
    try {
        results = reranker.rerank(refined.refined, texts, policy.keep);
    } catch (const Error& e) {
        if (e.code() != Errc::http_error && e.code() != Errc::timeout)
            throw;
        if (!fallback_on_error)
            throw;
        out.fallback = true;
        const std::size_t take = std::min(policy.keep, pool.size());
        for (std::size_t i = 0; i < take; ++i)
            results.push_back({i, pool[i].fused_score});
    }

    // Order by score descending with ties broken by fused rank ascending.
    std::sort(results.begin(), results.end(), [&](const providers::RerankResult& a, const providers::RerankResult& b) {
        if (a.relevance_score != b.relevance_score)
            return a.relevance_score > b.relevance_score;
        return pool[a.index].fused_rank < pool[b.index].fused_rank;
    });
    if (results.size() > policy.keep)
        results.resize(policy.keep);

    out.snippets.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        Snippet s;
        s.chunk_id = pool[results[i].index].chunk_id;
        s.text = texts[results[i].index];
        s.rerank_score = results[i].relevance_score;
        s.context_index = i + 1;
        out.snippets.push_back(std::move(s));
    }
    return out;
}

} // namespace drk::retrieval
