#include "drk/hybrid_index.hpp"

#include "drk/errors.hpp"
#include "drk/text.hpp"

#include <algorithm>

namespace drk::index {

HybridIndex::HybridIndex(Bm25Params bm25, HnswParams hnsw) : bm25_(bm25), hnsw_(hnsw) {}

std::vector<std::string> HybridIndex::index_terms(std::string_view chunk_text) {
    std::vector<std::string> terms;
    for (const auto& token : ingest::tokenize(chunk_text))
        terms.push_back(text::fold_case(token.surface));
    return terms;
}

void HybridIndex::add(ingest::Chunk chunk, EmbeddingVector vector) {
    if (slot_by_id_.count(chunk.chunk_id))
        throw Error(Errc::duplicate_chunk_id, chunk.chunk_id);
    if (dim() != 0 && vector.dim() != dim())
        throw Error(Errc::dimension_mismatch, "vector dim " + std::to_string(vector.dim()) +
                                                  " does not match index dim " + std::to_string(dim()));
    if (!vector.normalized)
        vector = l2_normalize(std::move(vector));

    const std::uint32_t bm25_slot = bm25_.add(index_terms(chunk.text));
    const std::uint32_t hnsw_slot = hnsw_.add(std::move(vector.values));
    (void)bm25_slot;
    (void)hnsw_slot;
    slot_by_id_.emplace(chunk.chunk_id, static_cast<std::uint32_t>(chunks_.size()));
    chunks_.push_back(std::move(chunk));
}

std::uint32_t HybridIndex::slot_of(const std::string& chunk_id) const {
    const auto it = slot_by_id_.find(chunk_id);
    if (it == slot_by_id_.end())
        throw Error(Errc::unknown_chunk, chunk_id);
    return it->second;
}

const ingest::Chunk& HybridIndex::chunk(const std::string& chunk_id) const {
    return chunks_[slot_of(chunk_id)];
}

double HybridIndex::bm25_score(const std::vector<std::string>& query_terms, const std::string& chunk_id) const {
    std::vector<std::string> folded;
    folded.reserve(query_terms.size());
    for (const auto& t : query_terms)
        folded.push_back(text::fold_case(t));
    return bm25_.score(folded, slot_of(chunk_id));
}

std::vector<ScoredChunk> HybridIndex::rank(std::vector<std::pair<std::uint32_t, double>> scored, std::size_t k) const {
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return chunks_[a.first].chunk_id < chunks_[b.first].chunk_id;
    });
    if (scored.size() > k)
        scored.resize(k);
    std::vector<ScoredChunk> out;
    out.reserve(scored.size());
    for (const auto& [slot, score] : scored)
        out.push_back({chunks_[slot].chunk_id, score});
    return out;
}

std::vector<ScoredChunk> HybridIndex::bm25_search(const std::vector<std::string>& query_terms, std::size_t k) const {
    std::vector<std::string> folded;
    folded.reserve(query_terms.size());
    for (const auto& t : query_terms)
        folded.push_back(text::fold_case(t));
    return rank(bm25_.match(folded), k);
}

std::vector<ScoredChunk> HybridIndex::hnsw_search(const EmbeddingVector& query, std::size_t k) const {
    return hnsw_search(query, k, hnsw_.params().ef_search);
}

std::vector<ScoredChunk> HybridIndex::hnsw_search(const EmbeddingVector& query, std::size_t k, std::size_t ef) const {
    if (size() == 0)
        return {};
    EmbeddingVector q = query;
    if (!q.normalized)
        q = l2_normalize(std::move(q));
    auto hits = hnsw_.search(q.values, k, ef);
    // Equal similarities rank by ascending chunk_id, mirroring the BM25 leg.
    std::sort(hits.begin(), hits.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return chunks_[a.first].chunk_id < chunks_[b.first].chunk_id;
    });
    std::vector<ScoredChunk> out;
    out.reserve(hits.size());
    for (const auto& [slot, sim] : hits)
        out.push_back({chunks_[slot].chunk_id, sim});
    return out;
}

HybridIndex HybridIndex::from_parts(Bm25Index bm25, HnswIndex hnsw, std::vector<ingest::Chunk> chunks) {
    HybridIndex idx(bm25.params(), hnsw.params());
    idx.bm25_ = std::move(bm25);
    idx.hnsw_ = std::move(hnsw);
    idx.chunks_ = std::move(chunks);
    for (std::uint32_t i = 0; i < idx.chunks_.size(); ++i)
        idx.slot_by_id_.emplace(idx.chunks_[i].chunk_id, i);
    return idx;
}

} // namespace drk::index
