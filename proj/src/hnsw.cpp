#include "drk/hnsw.hpp"

#include "drk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace drk::index {

void HnswParams::validate() const {
    if (M < 2)
        throw Error(Errc::bad_config, "hnsw M must be at least 2");
    if (ef_construction == 0 || ef_search == 0)
        throw Error(Errc::bad_config, "hnsw ef parameters must be positive");
}

HnswIndex::HnswIndex(HnswParams params) : params_(params), level_rng_(params.level_seed) {
    params_.validate();
    inv_log_m_ = 1.0 / std::log(static_cast<double>(params_.M));
}

double HnswIndex::distance(std::span<const double> q, std::uint32_t slot) const {
    const double* v = vectors_.data() + static_cast<std::size_t>(slot) * dim_;
    double dot = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
        dot += q[i] * v[i];
    return 1.0 - dot;
}

int HnswIndex::draw_level() {
    // One engine call per draw; maps the top 53 bits into (0, 1).
    const std::uint64_t r = level_rng_();
    const double u = (static_cast<double>(r >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    return static_cast<int>(-std::log(u) * inv_log_m_);
}

std::uint32_t HnswIndex::greedy_descend(std::span<const double> q, std::uint32_t start, int layer) const {
    std::uint32_t current = start;
    double best = distance(q, current);
    bool improved = true;
    while (improved) {
        improved = false;
        for (const std::uint32_t n : neighbors_[current][static_cast<std::size_t>(layer)]) {
            const double d = distance(q, n);
            if (d < best) {
                best = d;
                current = n;
                improved = true;
            }
        }
    }
    return current;
}

std::vector<HnswIndex::Hit> HnswIndex::search_layer(std::span<const double> q, std::uint32_t start, std::size_t ef,
                                                    int layer) const {
    std::vector<char> visited(size(), 0);
    std::priority_queue<Hit, std::vector<Hit>, std::greater<>> candidates; // nearest first
    std::priority_queue<Hit> found;                                        // farthest first, capped at ef

    const Hit first{distance(q, start), start};
    visited[start] = 1;
    candidates.push(first);
    found.push(first);

    while (!candidates.empty()) {
        const Hit c = candidates.top();
        candidates.pop();
        if (found.size() >= ef && c.dist > found.top().dist)
            break;
        for (const std::uint32_t n : neighbors_[c.slot][static_cast<std::size_t>(layer)]) {
            if (visited[n])
                continue;
            visited[n] = 1;
            const double d = distance(q, n);
            if (found.size() < ef || d < found.top().dist) {
                candidates.push({d, n});
                found.push({d, n});
                if (found.size() > ef)
                    found.pop();
            }
        }
    }

    std::vector<Hit> out;
    out.reserve(found.size());
    while (!found.empty()) {
        out.push_back(found.top());
        found.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

void HnswIndex::prune_neighbors(std::uint32_t slot, int layer) {
    auto& list = neighbors_[slot][static_cast<std::size_t>(layer)];
    const std::size_t cap = max_degree(layer);
    if (list.size() <= cap)
        return;
    const std::span<const double> own{vectors_.data() + static_cast<std::size_t>(slot) * dim_, dim_};
    std::vector<Hit> scored;
    scored.reserve(list.size());
    for (const std::uint32_t n : list)
        scored.push_back({distance(own, n), n});
    std::sort(scored.begin(), scored.end());
    list.clear();
    for (std::size_t i = 0; i < cap; ++i)
        list.push_back(scored[i].slot);
}

std::uint32_t HnswIndex::add(std::vector<double> normalized_values) {
    if (dim_ == 0) {
        dim_ = normalized_values.size();
        if (dim_ == 0)
            throw Error(Errc::dimension_mismatch, "cannot index an empty vector");
    } else if (normalized_values.size() != dim_) {
        throw Error(Errc::dimension_mismatch, "vector dim " + std::to_string(normalized_values.size()) +
                                                  " does not match index dim " + std::to_string(dim_));
    }

    const auto slot = static_cast<std::uint32_t>(size());
    const int level = draw_level();
    vectors_.insert(vectors_.end(), normalized_values.begin(), normalized_values.end());
    levels_.push_back(level);
    neighbors_.emplace_back(static_cast<std::size_t>(level) + 1);

    if (slot == 0) {
        entry_point_ = 0;
        max_level_ = level;
        return slot;
    }

    const std::span<const double> q{vectors_.data() + static_cast<std::size_t>(slot) * dim_, dim_};
    std::uint32_t ep = entry_point_;
    for (int layer = max_level_; layer > level; --layer)
        ep = greedy_descend(q, ep, layer);

    for (int layer = std::min(max_level_, level); layer >= 0; --layer) {
        const auto found = search_layer(q, ep, params_.ef_construction, layer);
        const std::size_t take = std::min(params_.M, found.size());
        auto& own = neighbors_[slot][static_cast<std::size_t>(layer)];
        for (std::size_t i = 0; i < take; ++i) {
            const std::uint32_t n = found[i].slot;
            own.push_back(n);
            neighbors_[n][static_cast<std::size_t>(layer)].push_back(slot);
            prune_neighbors(n, layer);
        }
        ep = found.front().slot;
    }

    if (level > max_level_) {
        max_level_ = level;
        entry_point_ = slot;
    }
    return slot;
}

std::vector<std::pair<std::uint32_t, double>> HnswIndex::search(std::span<const double> normalized_query,
                                                                std::size_t k, std::size_t ef) const {
    if (size() == 0)
        return {};
    if (normalized_query.size() != dim_)
        throw Error(Errc::dimension_mismatch, "query dim " + std::to_string(normalized_query.size()) +
                                                  " does not match index dim " + std::to_string(dim_));
    ef = std::max(ef, k);

    std::uint32_t ep = entry_point_;
    for (int layer = max_level_; layer >= 1; --layer)
        ep = greedy_descend(normalized_query, ep, layer);

    auto found = search_layer(normalized_query, ep, ef, 0);
    if (found.size() > k)
        found.resize(k);
    std::vector<std::pair<std::uint32_t, double>> out;
    out.reserve(found.size());
    for (const auto& hit : found)
        out.emplace_back(hit.slot, 1.0 - hit.dist);
    return out;
}

std::span<const double> HnswIndex::vector_of(std::uint32_t slot) const {
    return {vectors_.data() + static_cast<std::size_t>(slot) * dim_, dim_};
}

HnswIndex HnswIndex::from_parts(HnswParams params, std::size_t dim, std::vector<double> flat_vectors,
                                std::vector<int> levels, std::vector<std::vector<std::vector<std::uint32_t>>> neighbors,
                                std::uint32_t entry_point, int max_level) {
    HnswIndex idx(params);
    idx.dim_ = dim;
    idx.vectors_ = std::move(flat_vectors);
    idx.levels_ = std::move(levels);
    idx.neighbors_ = std::move(neighbors);
    idx.entry_point_ = entry_point;
    idx.max_level_ = max_level;
    // Keep later insertions identical to a never-serialized index: the level
    // generator has already produced one draw per node.
    idx.level_rng_.discard(idx.levels_.size());
    return idx;
}

} // namespace drk::index
