#include "drk/bm25.hpp"

#include "drk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace drk::index {

void Bm25Params::validate() const {
    if (k1 < 0.0)
        throw Error(Errc::bad_config, "bm25 k1 must be non-negative");
    if (b < 0.0 || b > 1.0)
        throw Error(Errc::bad_config, "bm25 b must lie in [0, 1]");
}

Bm25Index::Bm25Index(Bm25Params params) : params_(params) {
    params_.validate();
}

std::uint32_t Bm25Index::add(const std::vector<std::string>& terms) {
    const auto slot = static_cast<std::uint32_t>(doc_lengths_.size());
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : terms)
        ++tf[t];
    for (const auto& [term, freq] : tf)
        postings_[term].emplace_back(slot, freq);
    doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
    total_tokens_ += terms.size();
    return slot;
}

double Bm25Index::avgdl() const {
    if (doc_lengths_.empty())
        return 0.0;
    return static_cast<double>(total_tokens_) / static_cast<double>(doc_lengths_.size());
}

double Bm25Index::idf(const std::string& term) const {
    const auto it = postings_.find(term);
    const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    const double n = static_cast<double>(doc_lengths_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::term_score(double tf, double df, double dl) const {
    const double n = static_cast<double>(doc_lengths_.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double denom = tf + params_.k1 * (1.0 - params_.b + params_.b * dl / avgdl());
    return idf * tf * (params_.k1 + 1.0) / denom;
}

double Bm25Index::score(const std::vector<std::string>& query_terms, std::uint32_t slot) const {
    if (slot >= doc_lengths_.size())
        throw Error(Errc::unknown_chunk, "slot " + std::to_string(slot) + " is not indexed");
    const std::set<std::string> unique(query_terms.begin(), query_terms.end());
    double total = 0.0;
    for (const auto& term : unique) {
        const auto it = postings_.find(term);
        if (it == postings_.end())
            continue;
        const auto& list = it->second;
        const auto pit = std::lower_bound(list.begin(), list.end(), slot,
                                          [](const Posting& p, std::uint32_t s) { return p.first < s; });
        if (pit == list.end() || pit->first != slot)
            continue;
        total += term_score(static_cast<double>(pit->second), static_cast<double>(list.size()),
                            static_cast<double>(doc_lengths_[slot]));
    }
    return total;
}

std::vector<std::pair<std::uint32_t, double>> Bm25Index::match(const std::vector<std::string>& query_terms) const {
    const std::set<std::string> unique(query_terms.begin(), query_terms.end());
    std::map<std::uint32_t, double> scores;
    for (const auto& term : unique) {
        const auto it = postings_.find(term);
        if (it == postings_.end())
            continue;
        const double df = static_cast<double>(it->second.size());
        for (const auto& [slot, tf] : it->second)
            scores[slot] += term_score(static_cast<double>(tf), df, static_cast<double>(doc_lengths_[slot]));
    }
    return {scores.begin(), scores.end()};
}

Bm25Index Bm25Index::from_parts(Bm25Params params, std::map<std::string, std::vector<Posting>> postings,
                                std::vector<std::uint32_t> doc_lengths) {
    Bm25Index idx(params);
    idx.postings_ = std::move(postings);
    idx.doc_lengths_ = std::move(doc_lengths);
    idx.total_tokens_ = std::accumulate(idx.doc_lengths_.begin(), idx.doc_lengths_.end(), std::uint64_t{0});
    return idx;
}

} // namespace drk::index
