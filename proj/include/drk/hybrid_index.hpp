#pragma once

#include "drk/bm25.hpp"
#include "drk/embedding.hpp"
#include "drk/hnsw.hpp"
#include "drk/ingest.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace drk::index {

struct ScoredChunk {
    std::string chunk_id;
    double score = 0.0;
};

/// Chunk store + BM25 inverted index + HNSW graph over the same slots.
/// Raw chunk text stays retrievable by id so answers can cite it directly.
/// Readers may run concurrently; building is single-writer.
class HybridIndex {
public:
    HybridIndex(Bm25Params bm25 = {}, HnswParams hnsw = {});

    // Indexes one chunk under both legs. The first insertion fixes the vector
    // dimensionality; the vector is L2-normalized here unless already flagged.
    void add(ingest::Chunk chunk, EmbeddingVector vector);

    double bm25_score(const std::vector<std::string>& query_terms, const std::string& chunk_id) const;
    std::vector<ScoredChunk> bm25_search(const std::vector<std::string>& query_terms, std::size_t k) const;
    // Cosine similarity leg; ef defaults to the configured ef_search.
    std::vector<ScoredChunk> hnsw_search(const EmbeddingVector& query, std::size_t k) const;
    std::vector<ScoredChunk> hnsw_search(const EmbeddingVector& query, std::size_t k, std::size_t ef) const;

    const ingest::Chunk& chunk(const std::string& chunk_id) const;
    const ingest::Chunk& chunk_at(std::uint32_t slot) const { return chunks_[slot]; }
    bool contains(const std::string& chunk_id) const { return slot_by_id_.count(chunk_id) != 0; }

    std::size_t size() const { return chunks_.size(); }
    std::size_t dim() const { return hnsw_.dim(); }

    const Bm25Index& bm25() const { return bm25_; }
    const HnswIndex& hnsw() const { return hnsw_; }
    const std::vector<ingest::Chunk>& chunks() const { return chunks_; }

    // Indexing-side term normalization: tokenize, then ASCII case fold.
    static std::vector<std::string> index_terms(std::string_view chunk_text);

    static HybridIndex from_parts(Bm25Index bm25, HnswIndex hnsw, std::vector<ingest::Chunk> chunks);

private:
    std::uint32_t slot_of(const std::string& chunk_id) const;
    std::vector<ScoredChunk> rank(std::vector<std::pair<std::uint32_t, double>> scored, std::size_t k) const;

    Bm25Index bm25_;
    HnswIndex hnsw_;
    std::vector<ingest::Chunk> chunks_;
    std::unordered_map<std::string, std::uint32_t> slot_by_id_;
};

} // namespace drk::index
