#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drk/errors.hpp"
#include "drk/hnsw.hpp"
#include "drk/hybrid_index.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <set>

using namespace drk;
using namespace drk::index;

namespace {

std::vector<double> random_unit(std::mt19937& rng, std::size_t dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(dim);
    double norm = 0;
    do {
        norm = 0;
        for (auto& x : v) {
            x = gauss(rng);
            norm += x * x;
        }
    } while (norm == 0);
    norm = std::sqrt(norm);
    for (auto& x : v)
        x /= norm;
    return v;
}

// Exact kNN by exhaustive dot products.
std::vector<std::uint32_t> brute_force_knn(const std::vector<std::vector<double>>& data,
                                           const std::vector<double>& query, std::size_t k) {
    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(data.size());
    for (std::uint32_t i = 0; i < data.size(); ++i) {
        double dot = 0;
        for (std::size_t d = 0; d < query.size(); ++d)
            dot += data[i][d] * query[d];
        scored.emplace_back(dot, i);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i)
        out.push_back(scored[i].second);
    return out;
}

} // namespace

TEST_CASE("self-query returns the inserted vector at rank 1 with similarity 1") {
    std::mt19937 rng(5);
    HnswIndex idx({8, 50, 50, 99});
    std::vector<std::vector<double>> data;
    for (int i = 0; i < 64; ++i) {
        data.push_back(random_unit(rng, 16));
        idx.add(data.back());
    }
    for (std::uint32_t probe : {0u, 7u, 31u, 63u}) {
        const auto hits = idx.search(data[probe], 1, 50);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].first == probe);
        CHECK(near(hits[0].second, 1.0, 1e-6));
    }
}

TEST_CASE("empty index searches return nothing") {
    HnswIndex idx;
    CHECK(idx.search(std::vector<double>{1.0, 0.0}, 5, 10).empty());
}

TEST_CASE("dimension mismatches are rejected") {
    HnswIndex idx;
    idx.add({1.0, 0.0, 0.0});
    CHECK_THROWS_WITH_AS(idx.add({1.0, 0.0}), doctest::Contains("DimensionMismatch"), Error);
    CHECK_THROWS_WITH_AS(idx.search(std::vector<double>{1.0}, 1, 10), doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("recall@10 against brute force stays above 0.9") {
    std::mt19937 rng(42);
    const std::size_t dim = 32;
    const std::size_t n = 600;
    HnswIndex idx({16, 200, 100, 7});
    std::vector<std::vector<double>> data;
    data.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        data.push_back(random_unit(rng, dim));
        idx.add(data.back());
    }

    std::size_t hit = 0, total = 0;
    for (int q = 0; q < 40; ++q) {
        const auto query = random_unit(rng, dim);
        const auto exact = brute_force_knn(data, query, 10);
        const auto approx = idx.search(query, 10, 100);
        const std::set<std::uint32_t> exact_set(exact.begin(), exact.end());
        for (const auto& [slot, sim] : approx)
            hit += exact_set.count(slot);
        total += exact.size();
    }
    CHECK(static_cast<double>(hit) / static_cast<double>(total) >= 0.9);
}

TEST_CASE("search results are similarity-descending and ef is raised to k") {
    std::mt19937 rng(8);
    HnswIndex idx({8, 60, 4, 3});
    std::vector<std::vector<double>> data;
    for (int i = 0; i < 128; ++i) {
        data.push_back(random_unit(rng, 8));
        idx.add(data.back());
    }
    const auto query = random_unit(rng, 8);
    const auto hits = idx.search(query, 12, 4); // ef below k gets clamped
    REQUIRE(hits.size() == 12);
    for (std::size_t i = 1; i < hits.size(); ++i)
        CHECK(hits[i - 1].second >= hits[i].second);
}

TEST_CASE("neighbor lists respect the per-layer degree caps") {
    std::mt19937 rng(21);
    const std::size_t M = 6;
    HnswIndex idx({M, 80, 40, 17});
    for (int i = 0; i < 300; ++i)
        idx.add(random_unit(rng, 12));

    for (std::uint32_t s = 0; s < idx.size(); ++s) {
        const auto& layers = idx.neighbors()[s];
        for (std::size_t layer = 0; layer < layers.size(); ++layer) {
            const std::size_t cap = layer == 0 ? 2 * M : M;
            CHECK(layers[layer].size() <= cap);
            for (const auto n : layers[layer])
                CHECK(n != s);
        }
    }
}

TEST_CASE("every node is reachable from the entry point on layer 0") {
    std::mt19937 rng(33);
    HnswIndex idx({16, 100, 50, 11});
    for (int i = 0; i < 400; ++i)
        idx.add(random_unit(rng, 10));

    std::vector<char> seen(idx.size(), 0);
    std::queue<std::uint32_t> frontier;
    frontier.push(idx.entry_point());
    seen[idx.entry_point()] = 1;
    std::size_t visited = 0;
    while (!frontier.empty()) {
        const auto cur = frontier.front();
        frontier.pop();
        ++visited;
        for (const auto n : idx.neighbors()[cur][0]) {
            if (!seen[n]) {
                seen[n] = 1;
                frontier.push(n);
            }
        }
    }
    CHECK(visited == idx.size());
}

TEST_CASE("cosine similarity of unit vectors stays within [-1, 1]") {
    std::mt19937 rng(55);
    HnswIndex idx({8, 40, 30, 2});
    for (int i = 0; i < 100; ++i)
        idx.add(random_unit(rng, 6));
    for (int q = 0; q < 10; ++q) {
        for (const auto& [slot, sim] : idx.search(random_unit(rng, 6), 10, 30)) {
            CHECK(sim <= 1.0 + 1e-9);
            CHECK(sim >= -1.0 - 1e-9);
        }
    }
}

TEST_CASE("level draws are deterministic per seed") {
    std::mt19937 rng(77);
    std::vector<std::vector<double>> data;
    for (int i = 0; i < 50; ++i)
        data.push_back(random_unit(rng, 8));

    HnswIndex a({8, 40, 30, 123});
    HnswIndex b({8, 40, 30, 123});
    for (const auto& v : data) {
        a.add(v);
        b.add(v);
    }
    CHECK(a.entry_point() == b.entry_point());
    CHECK(a.max_level() == b.max_level());
    CHECK(a.neighbors() == b.neighbors());
}

TEST_CASE("hnsw params are validated") {
    CHECK_THROWS_AS(HnswIndex({1, 10, 10, 0}), Error);
    CHECK_THROWS_AS(HnswIndex({8, 0, 10, 0}), Error);
}
