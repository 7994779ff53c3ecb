#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace drk::index {

struct HnswParams {
    std::size_t M = 16;               // max neighbors per node on layers > 0
    std::size_t ef_construction = 200;
    std::size_t ef_search = 100;
    std::uint64_t level_seed = 0x9e3779b97f4a7c15ull;

    void validate() const; // M >= 2
};

/// Hierarchical navigable small-world graph over unit vectors with cosine
/// similarity (vectors must be L2-normalized before insertion, so distance
/// reduces to 1 - dot). Layer assignment is geometric with normalization
/// 1/ln(M); layer 0 allows 2*M neighbors; neighbor selection keeps the
/// plain nearest candidates. Single writer, many concurrent readers.
class HnswIndex {
public:
    explicit HnswIndex(HnswParams params = {});

    // Inserts a normalized vector, returns its slot. The first insertion
    // fixes the index dimensionality.
    std::uint32_t add(std::vector<double> normalized_values);

    // Approximate k nearest neighbors: (slot, cosine similarity), similarity
    // descending, ties by ascending slot. ef is raised to k when smaller.
    std::vector<std::pair<std::uint32_t, double>> search(std::span<const double> normalized_query, std::size_t k,
                                                         std::size_t ef) const;

    std::size_t size() const { return levels_.size(); }
    std::size_t dim() const { return dim_; }
    const HnswParams& params() const { return params_; }

    std::uint32_t entry_point() const { return entry_point_; }
    int max_level() const { return max_level_; }
    int level_of(std::uint32_t slot) const { return levels_[slot]; }
    // node -> layer -> neighbor slots
    const std::vector<std::vector<std::vector<std::uint32_t>>>& neighbors() const { return neighbors_; }
    std::span<const double> vector_of(std::uint32_t slot) const;

    static HnswIndex from_parts(HnswParams params, std::size_t dim, std::vector<double> flat_vectors,
                                std::vector<int> levels, std::vector<std::vector<std::vector<std::uint32_t>>> neighbors,
                                std::uint32_t entry_point, int max_level);

private:
    struct Hit {
        double dist;
        std::uint32_t slot;
        bool operator<(const Hit& o) const { return dist < o.dist || (dist == o.dist && slot < o.slot); }
        bool operator>(const Hit& o) const { return o < *this; }
    };

    double distance(std::span<const double> q, std::uint32_t slot) const;
    int draw_level();
    std::uint32_t greedy_descend(std::span<const double> q, std::uint32_t start, int layer) const;
    // Best-first beam search on one layer; result sorted by ascending distance.
    std::vector<Hit> search_layer(std::span<const double> q, std::uint32_t start, std::size_t ef, int layer) const;
    std::size_t max_degree(int layer) const { return layer == 0 ? 2 * params_.M : params_.M; }
    void prune_neighbors(std::uint32_t slot, int layer);

    HnswParams params_;
    std::size_t dim_ = 0;
    std::vector<double> vectors_; // flat, size() * dim_
    std::vector<int> levels_;
    std::vector<std::vector<std::vector<std::uint32_t>>> neighbors_;
    std::uint32_t entry_point_ = 0;
    int max_level_ = -1;
    std::mt19937_64 level_rng_;
    double inv_log_m_ = 0.0;
};

} // namespace drk::index
