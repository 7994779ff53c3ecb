#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drk/bm25.hpp"
#include "drk/errors.hpp"
#include "drk/hybrid_index.hpp"
#include "drk/providers.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace drk;
using namespace drk::index;

namespace {

// Direct evaluation of the Okapi formula from raw corpus statistics,
// independent of the inverted index.
struct OracleCorpus {
    std::vector<std::vector<std::string>> docs;

    double avgdl() const {
        double total = 0;
        for (const auto& d : docs)
            total += static_cast<double>(d.size());
        return total / static_cast<double>(docs.size());
    }
    std::size_t df(const std::string& term) const {
        std::size_t n = 0;
        for (const auto& d : docs)
            n += std::count(d.begin(), d.end(), term) > 0 ? 1 : 0;
        return n;
    }
    std::size_t tf(const std::string& term, std::size_t doc) const {
        return static_cast<std::size_t>(std::count(docs[doc].begin(), docs[doc].end(), term));
    }
    double idf(const std::string& term) const {
        const double n = static_cast<double>(docs.size());
        const double d = static_cast<double>(df(term));
        return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
    }
    double score(const std::vector<std::string>& query, std::size_t doc, const Bm25Params& p) const {
        const std::set<std::string> unique(query.begin(), query.end());
        double total = 0;
        for (const auto& term : unique) {
            const double f = static_cast<double>(tf(term, doc));
            if (f == 0)
                continue;
            const double dl = static_cast<double>(docs[doc].size());
            total += idf(term) * f * (p.k1 + 1.0) / (f + p.k1 * (1.0 - p.b + p.b * dl / avgdl()));
        }
        return total;
    }
};

Bm25Index build(const OracleCorpus& corpus, Bm25Params params = {}) {
    Bm25Index idx(params);
    for (const auto& d : corpus.docs)
        idx.add(d);
    return idx;
}

OracleCorpus random_corpus(std::mt19937& rng, std::size_t max_docs = 50, std::size_t max_len = 200) {
    static const std::vector<std::string> vocab = {
        "lease",  "term",    "rent",   "due",    "monthly", "interest", "rate",  "clause",  "party",  "notice",
        "breach", "penalty", "renewal", "deposit", "tax",    "audit",   "scope", "license", "assign", "waiver",
        "court",  "law",     "state",  "sign",    "date",    "amend",   "annex", "exhibit", "seller", "buyer"};
    OracleCorpus corpus;
    std::uniform_int_distribution<std::size_t> n_docs(1, max_docs);
    std::uniform_int_distribution<std::size_t> n_len(1, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    const std::size_t docs = n_docs(rng);
    for (std::size_t d = 0; d < docs; ++d) {
        std::vector<std::string> doc;
        const std::size_t len = n_len(rng);
        for (std::size_t t = 0; t < len; ++t)
            doc.push_back(vocab[pick(rng)]);
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

std::vector<std::string> random_query(std::mt19937& rng, const OracleCorpus& corpus) {
    std::uniform_int_distribution<std::size_t> n_terms(1, 4);
    std::vector<std::string> query;
    const std::size_t n = n_terms(rng);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& doc = corpus.docs[rng() % corpus.docs.size()];
        query.push_back(doc[rng() % doc.size()]);
    }
    return query;
}

// Exhaustive scoring: every document with a positive score, ranked by score
// descending with ties by ascending slot.
std::vector<std::pair<std::uint32_t, double>> oracle_search(const OracleCorpus& corpus,
                                                            const std::vector<std::string>& query,
                                                            const Bm25Params& params, std::size_t k) {
    std::vector<std::pair<std::uint32_t, double>> scored;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
        const double s = corpus.score(query, d, params);
        if (s > 0)
            scored.emplace_back(static_cast<std::uint32_t>(d), s);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > k)
        scored.resize(k);
    return scored;
}

} // namespace

TEST_CASE("bm25 score matches the formula oracle on a 3-doc toy corpus") {
    OracleCorpus corpus;
    corpus.docs = {{"lease", "term", "rent"}, {"rent", "rent", "due"}, {"tax", "law"}};
    const auto idx = build(corpus);
    for (const std::string term : {"lease", "rent", "tax", "absent"}) {
        for (std::uint32_t d = 0; d < 3; ++d) {
            CAPTURE(term);
            CAPTURE(d);
            CHECK(near(idx.score({term}, d), corpus.score({term}, d, {})));
        }
    }
}

TEST_CASE("query terms absent from a chunk contribute zero") {
    OracleCorpus corpus;
    corpus.docs = {{"lease", "term"}, {"rent"}};
    const auto idx = build(corpus);
    CHECK(idx.score({"absent", "missing"}, 0) == 0.0);
    CHECK(idx.score({"rent"}, 0) == 0.0);
    CHECK(idx.score({"rent", "absent"}, 1) == idx.score({"rent"}, 1));
}

TEST_CASE("duplicate query terms are collapsed") {
    OracleCorpus corpus;
    corpus.docs = {{"lease", "term"}, {"rent"}};
    const auto idx = build(corpus);
    CHECK(idx.score({"lease", "lease", "lease"}, 0) == idx.score({"lease"}, 0));
}

TEST_CASE("doubling the corpus keeps idf on the formula within 1e-9") {
    OracleCorpus corpus;
    corpus.docs = {{"lease", "term"}, {"rent", "lease"}, {"tax"}};
    auto idx = build(corpus);
    const double n = 3, df = 2;
    CHECK(near(idx.idf("lease"), std::log(1 + (n - df + 0.5) / (df + 0.5))));

    OracleCorpus doubled;
    doubled.docs = corpus.docs;
    doubled.docs.insert(doubled.docs.end(), corpus.docs.begin(), corpus.docs.end());
    const auto idx2 = build(doubled);
    CHECK(near(idx2.idf("lease"), std::log(1 + (2 * n - 2 * df + 0.5) / (2 * df + 0.5))));
}

TEST_CASE("random toy corpora: scores and search match the oracle") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const auto corpus = random_corpus(rng);
        const auto idx = build(corpus);
        const auto query = random_query(rng, corpus);
        CAPTURE(trial);

        for (std::size_t d = 0; d < corpus.docs.size(); ++d)
            CHECK(near(idx.score(query, static_cast<std::uint32_t>(d)), corpus.score(query, d, {})));

        const auto expected = oracle_search(corpus, query, {}, 10);
        auto matches = idx.match(query);
        std::sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second)
                return a.second > b.second;
            return a.first < b.first;
        });
        if (matches.size() > 10)
            matches.resize(10);
        REQUIRE(matches.size() == expected.size());
        for (std::size_t i = 0; i < matches.size(); ++i) {
            CHECK(matches[i].first == expected[i].first);
            CHECK(near(matches[i].second, expected[i].second));
        }
    }
}

TEST_CASE("single-term monotonicity: one more occurrence never lowers the oracle score") {
    std::mt19937 rng(211);
    for (int trial = 0; trial < 200; ++trial) {
        auto corpus = random_corpus(rng, 20, 60);
        const std::size_t doc = rng() % corpus.docs.size();
        const std::string term = corpus.docs[rng() % corpus.docs.size()][0];
        const double before = corpus.score({term}, doc, {});
        corpus.docs[doc].push_back(term);
        const double after = corpus.score({term}, doc, {});
        CAPTURE(trial);
        CHECK(after >= before - 1e-12);
        // And the index agrees with the oracle on the mutated corpus.
        const auto idx = build(corpus);
        CHECK(near(idx.score({term}, static_cast<std::uint32_t>(doc)), after));
    }
}

TEST_CASE("hybrid index bm25 surface") {
    providers::OfflineEmbedderSpec spec;
    spec.dim = 16;
    HybridIndex idx({}, {4, 20, 20, 1});

    auto add = [&](const std::string& id, const std::string& text) {
        ingest::Chunk c;
        c.chunk_id = id;
        c.doc_id = "d";
        c.text = text;
        idx.add(c, providers::offline_embed(text, spec));
    };
    add("c1", "The lease term is five years.");
    add("c2", "Rent is due monthly.");
    add("c3", "Late rent accrues interest.");

    SUBCASE("single doc containing the term ranks first") {
        const auto hits = idx.bm25_search({"lease"}, 10);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].chunk_id == "c1");
    }
    SUBCASE("search is case folded like the index") {
        CHECK(idx.bm25_score({"LEASE"}, "c1") == idx.bm25_score({"lease"}, "c1"));
    }
    SUBCASE("k larger than the corpus returns every scored doc") {
        CHECK(idx.bm25_search({"rent"}, 50).size() == 2);
    }
    SUBCASE("unknown chunk id raises") {
        CHECK_THROWS_WITH_AS(idx.bm25_score({"rent"}, "nope"), doctest::Contains("UnknownChunk"), Error);
    }
    SUBCASE("duplicate chunk id raises") {
        ingest::Chunk c;
        c.chunk_id = "c1";
        c.text = "dup";
        CHECK_THROWS_WITH_AS(idx.add(c, providers::offline_embed("dup", spec)),
                             doctest::Contains("DuplicateChunkId"), Error);
    }
    SUBCASE("dimension mismatch raises") {
        providers::OfflineEmbedderSpec other;
        other.dim = 8;
        ingest::Chunk c;
        c.chunk_id = "c4";
        c.text = "text";
        CHECK_THROWS_WITH_AS(idx.add(c, providers::offline_embed("text", other)),
                             doctest::Contains("DimensionMismatch"), Error);
    }
}

TEST_CASE("bm25 params are validated") {
    CHECK_THROWS_AS(Bm25Index(Bm25Params{-1.0, 0.5}), Error);
    CHECK_THROWS_AS(Bm25Index(Bm25Params{1.2, 1.5}), Error);
}
