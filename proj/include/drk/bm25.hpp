#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace drk::index {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const; // k1 >= 0, 0 <= b <= 1
};

/// Okapi BM25 over documents addressed by dense slots (insertion order).
/// idf uses the +1-inside-log form, ln(1 + (N - df + 0.5) / (df + 0.5)), so
/// scores stay non-negative even for terms present in every document.
/// Duplicate query terms are collapsed; each unique term contributes once.
class Bm25Index {
public:
    using Posting = std::pair<std::uint32_t, std::uint32_t>; // (slot, term frequency)

    explicit Bm25Index(Bm25Params params = {});

    // Indexes one document's terms, returns its slot.
    std::uint32_t add(const std::vector<std::string>& terms);

    double score(const std::vector<std::string>& query_terms, std::uint32_t slot) const;

    // Scores every document containing at least one query term. Unordered
    // apart from ascending slot; the caller ranks and truncates.
    std::vector<std::pair<std::uint32_t, double>> match(const std::vector<std::string>& query_terms) const;

    double idf(const std::string& term) const;
    double avgdl() const;
    std::size_t size() const { return doc_lengths_.size(); }

    const Bm25Params& params() const { return params_; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }

    static Bm25Index from_parts(Bm25Params params, std::map<std::string, std::vector<Posting>> postings,
                                std::vector<std::uint32_t> doc_lengths);

private:
    double term_score(double tf, double df, double dl) const;

    Bm25Params params_;
    std::map<std::string, std::vector<Posting>> postings_;
    std::vector<std::uint32_t> doc_lengths_;
    std::uint64_t total_tokens_ = 0;
};

} // namespace drk::index
