#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drk/errors.hpp"
#include "drk/providers.hpp"
#include "drk/snapshot.hpp"
#include "drk/text.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace drk;
using namespace drk::index;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("drk_snap_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

HybridIndex toy_index(std::size_t n_chunks) {
    providers::OfflineEmbedderSpec spec;
    spec.dim = 24;
    HybridIndex idx({1.2, 0.75}, {6, 40, 30, 404});
    static const std::vector<std::string> words = {"lease", "rent", "tax", "audit", "law", "term", "fee", "deed"};
    std::mt19937 rng(99);
    for (std::size_t i = 0; i < n_chunks; ++i) {
        ingest::Chunk c;
        c.chunk_id = "chunk-" + std::to_string(i);
        c.doc_id = "doc-" + std::to_string(i / 4);
        c.seq_no = i % 4;
        std::string text;
        const std::size_t len = 4 + rng() % 12;
        for (std::size_t t = 0; t < len; ++t)
            text += (t ? " " : "") + words[rng() % words.size()];
        c.text = text + ".";
        c.char_start = 0;
        c.char_end = c.text.size();
        idx.add(c, providers::offline_embed(c.text, spec));
    }
    return idx;
}

std::vector<std::string> probe_terms(std::mt19937& rng) {
    static const std::vector<std::string> words = {"lease", "rent", "tax", "audit", "law", "term", "fee", "deed"};
    std::vector<std::string> q;
    const std::size_t n = 1 + rng() % 3;
    for (std::size_t i = 0; i < n; ++i)
        q.push_back(words[rng() % words.size()]);
    return q;
}

} // namespace

TEST_CASE("round-trip preserves a 100-query probe set bit for bit") {
    TempDir tmp;
    const auto original = toy_index(40);
    const auto file = tmp.path / "snap.drk";
    snapshot_save(original, file);
    const auto loaded = snapshot_load(file);

    REQUIRE(loaded.size() == original.size());
    providers::OfflineEmbedderSpec spec;
    spec.dim = 24;
    std::mt19937 rng(7);
    for (int q = 0; q < 100; ++q) {
        const auto terms = probe_terms(rng);
        const auto a = original.bm25_search(terms, 10);
        const auto b = loaded.bm25_search(terms, 10);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].chunk_id == b[i].chunk_id);
            CHECK(a[i].score == b[i].score); // bit-exact
        }
        const auto qv = providers::offline_embed("probe " + std::to_string(q) + " rent tax", spec);
        const auto va = original.hnsw_search(qv, 5);
        const auto vb = loaded.hnsw_search(qv, 5);
        REQUIRE(va.size() == vb.size());
        for (std::size_t i = 0; i < va.size(); ++i) {
            CHECK(va[i].chunk_id == vb[i].chunk_id);
            CHECK(va[i].score == vb[i].score);
        }
    }
}

TEST_CASE("chunk text survives the round trip") {
    TempDir tmp;
    const auto original = toy_index(12);
    const auto file = tmp.path / "snap.drk";
    snapshot_save(original, file);
    const auto loaded = snapshot_load(file);
    for (const auto& c : original.chunks())
        CHECK(loaded.chunk(c.chunk_id).text == c.text);
}

TEST_CASE("empty index round trips") {
    TempDir tmp;
    HybridIndex empty;
    const auto file = tmp.path / "empty.drk";
    snapshot_save(empty, file);
    const auto loaded = snapshot_load(file);
    CHECK(loaded.size() == 0);
    CHECK(loaded.bm25_search({"anything"}, 5).empty());
}

TEST_CASE("truncated snapshot is rejected with a checksum mismatch") {
    TempDir tmp;
    const auto file = tmp.path / "snap.drk";
    snapshot_save(toy_index(10), file);

    std::string bytes;
    {
        std::ifstream in(file, std::ios::binary);
        bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    for (const std::size_t keep : {bytes.size() - 1, bytes.size() / 2, std::size_t{10}}) {
        const auto cut = tmp.path / "cut.drk";
        std::ofstream(cut, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(keep));
        CHECK_THROWS_WITH_AS(snapshot_load(cut), doctest::Contains("ChecksumMismatch"), Error);
    }
}

TEST_CASE("corrupted byte is rejected with a checksum mismatch") {
    TempDir tmp;
    const auto file = tmp.path / "snap.drk";
    snapshot_save(toy_index(10), file);
    std::string bytes;
    {
        std::ifstream in(file, std::ios::binary);
        bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    bytes[bytes.size() / 3] ^= 0x40;
    const auto bad = tmp.path / "bad.drk";
    std::ofstream(bad, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_WITH_AS(snapshot_load(bad), doctest::Contains("ChecksumMismatch"), Error);
}

TEST_CASE("foreign magic is rejected as a version mismatch") {
    const auto original = toy_index(4);
    std::string bytes = snapshot_serialize(original);
    // Flip the magic and re-stamp the checksum so only the magic is wrong.
    bytes[0] = 'X';
    const std::string body = bytes.substr(0, bytes.size() - 8);
    const std::uint64_t sum = drk::text::fnv1a64(body);
    for (int i = 0; i < 8; ++i)
        bytes[bytes.size() - 8 + static_cast<std::size_t>(i)] = static_cast<char>((sum >> (8 * i)) & 0xFF);
    CHECK_THROWS_WITH_AS(snapshot_parse(bytes), doctest::Contains("VersionMismatch"), Error);
}

TEST_CASE("snapshot file starts with the DRK1 magic") {
    const auto bytes = snapshot_serialize(toy_index(2));
    REQUIRE(bytes.size() >= 4);
    CHECK(bytes.substr(0, 4) == "DRK1");
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_WITH_AS(snapshot_load("/nonexistent/dir/snap.drk"), doctest::Contains("IoError"), Error);
}

TEST_CASE("inserting after a reload matches inserting without one") {
    TempDir tmp;
    providers::OfflineEmbedderSpec spec;
    spec.dim = 24;

    auto grown = toy_index(20);
    const auto file = tmp.path / "snap.drk";
    snapshot_save(grown, file);
    auto reloaded = snapshot_load(file);

    for (int i = 0; i < 10; ++i) {
        ingest::Chunk c;
        c.chunk_id = "late-" + std::to_string(i);
        c.doc_id = "late";
        c.text = "extra lease clause number " + std::to_string(i) + ".";
        c.char_end = c.text.size();
        const auto v = providers::offline_embed(c.text, spec);
        grown.add(c, v);
        reloaded.add(c, v);
    }
    const auto qv = providers::offline_embed("lease clause", spec);
    const auto a = grown.hnsw_search(qv, 8);
    const auto b = reloaded.hnsw_search(qv, 8);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].chunk_id == b[i].chunk_id);
        CHECK(a[i].score == b[i].score);
    }
}
