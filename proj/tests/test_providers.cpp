#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drk/embedding.hpp"
#include "drk/errors.hpp"
#include "drk/providers.hpp"

#include "mock_http.hpp"
#include "test_util.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

using namespace drk;
using namespace drk::providers;
using nlohmann::json;

namespace {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    return dot(a.values, b.values);
}

ProviderConfig remote_config(ProviderKind kind, const std::string& url, int attempts = 3) {
    ProviderConfig cfg;
    cfg.kind = kind;
    cfg.mode = ProviderMode::remote;
    cfg.endpoint_url = url;
    cfg.model_name = "mock-model";
    cfg.timeout_s = 5.0;
    cfg.retry.max_attempts = attempts;
    cfg.retry.base_backoff_s = 0.001; // keep test retries fast
    cfg.retry.backoff_cap_s = 0.002;
    return cfg;
}

} // namespace

TEST_CASE("offline embedder is deterministic and unit-norm") {
    OfflineEmbedderSpec spec;
    const auto a = offline_embed("lease term", spec);
    const auto b = offline_embed("lease term", spec);
    CHECK(a.values == b.values);
    CHECK(near(cosine(a, b), 1.0));

    double norm = 0;
    for (const auto x : a.values)
        norm += x * x;
    CHECK(near(std::sqrt(norm), 1.0));

    CHECK_THROWS_WITH_AS(offline_embed("", spec), doctest::Contains("EmptyInput"), Error);
}

TEST_CASE("offline embedder keeps near-duplicates closer than unrelated text") {
    OfflineEmbedderSpec spec;
    const std::string unrelated =
        "Completely different subject matter about astronomy telescopes orbiting satellites and the "
        "measurement of stellar parallax over long observational baselines with adaptive optics systems "
        "calibrated against reference stars during clear desert nights in high altitude observatories";

    static const std::vector<std::string> stems = {
        "the lease term begins on the first of the month",
        "rent is payable within ten business days",
        "the tenant shall maintain insurance coverage",
        "late payments accrue interest at the statutory rate",
        "either party may terminate with ninety days notice"};
    std::mt19937 rng(3);
    int wins = 0;
    const int trials = 100;
    for (int i = 0; i < trials; ++i) {
        const std::string base = stems[static_cast<std::size_t>(i) % stems.size()] + " case " + std::to_string(i);
        const std::string dup = base + " indeed";
        const auto v = offline_embed(base, spec);
        if (cosine(v, offline_embed(dup, spec)) > cosine(v, offline_embed(unrelated, spec)))
            ++wins;
    }
    CHECK(wins == trials);
}

TEST_CASE("offline embedder dim and seed shape the output") {
    OfflineEmbedderSpec small;
    small.dim = 16;
    CHECK(offline_embed("abc def", small).dim() == 16);

    OfflineEmbedderSpec s1, s2;
    s2.seed = s1.seed + 1;
    CHECK(offline_embed("abc def", s1).values != offline_embed("abc def", s2).values);

    OfflineEmbedderSpec bad;
    bad.dim = 4;
    CHECK_THROWS_AS(offline_embed("abc", bad), Error);
}

TEST_CASE("offline embedding provider validates inputs") {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::embedding;
    auto provider = make_embedding_provider(cfg);
    CHECK_THROWS_WITH_AS(provider->embed_batch({}), doctest::Contains("EmptyInput"), Error);
    CHECK_THROWS_WITH_AS(provider->embed_batch({"ok", ""}), doctest::Contains("EmptyInput"), Error);
    const auto out = provider->embed_batch({"one", "two", "one"});
    REQUIRE(out.size() == 3);
    CHECK(out[0].values == out[2].values);
}

TEST_CASE("remote embedding splits 150 texts into 64/64/22 requests preserving order") {
    MockServer mock([](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        json data = json::array();
        std::size_t i = 0;
        for (const auto& text : body.at("input")) {
            // Two fixed axes derived from the input's numeric suffix keep the
            // mapping trivially checkable after normalization.
            const double v = static_cast<double>(std::stoul(text.get<std::string>().substr(5)));
            data.push_back({{"index", i++}, {"embedding", {v, 1.0}}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });

    auto cfg = remote_config(ProviderKind::embedding, mock.url());
    cfg.batch_size = 64;
    cfg.parallelism = 1;
    auto provider = make_embedding_provider(cfg);

    std::vector<std::string> texts;
    for (int i = 0; i < 150; ++i)
        texts.push_back("text-" + std::to_string(i));
    const auto out = provider->embed_batch(texts);

    REQUIRE(out.size() == 150);
    const auto bodies = mock.request_bodies();
    REQUIRE(bodies.size() == 3);
    CHECK(json::parse(bodies[0]).at("input").size() == 64);
    CHECK(json::parse(bodies[1]).at("input").size() == 64);
    CHECK(json::parse(bodies[2]).at("input").size() == 22);

    for (int i = 0; i < 150; ++i) {
        const double expected = static_cast<double>(i) / std::hypot(static_cast<double>(i), 1.0);
        CHECK(near(out[static_cast<std::size_t>(i)].values[0], expected));
    }
}

TEST_CASE("parallel batch dispatch preserves order and item counts") {
    MockServer mock([](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        json data = json::array();
        std::size_t i = 0;
        for (const auto& text : body.at("input")) {
            const double v = static_cast<double>(text.get<std::string>().size());
            data.push_back({{"index", i++}, {"embedding", {v, 2.0, 3.0}}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    auto cfg = remote_config(ProviderKind::embedding, mock.url());
    cfg.batch_size = 8;
    cfg.parallelism = 4;
    auto provider = make_embedding_provider(cfg);

    std::vector<std::string> texts;
    std::size_t total = 0;
    for (int i = 0; i < 61; ++i)
        texts.push_back(std::string(1 + static_cast<std::size_t>(i) % 13, 'x'));
    const auto out = provider->embed_batch(texts);
    REQUIRE(out.size() == 61);
    for (const auto& body : mock.request_bodies()) {
        const auto n = json::parse(body).at("input").size();
        CHECK(n <= 8);
        total += n;
    }
    CHECK(total == 61);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double len = static_cast<double>(texts[i].size());
        const double norm = std::sqrt(len * len + 4.0 + 9.0);
        CHECK(near(out[i].values[0], len / norm));
    }
}

TEST_CASE("a server failing thrice exhausts max_attempts and raises HttpError") {
    MockServer mock([](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("{}", "application/json");
    });
    auto cfg = remote_config(ProviderKind::llm, mock.url(), 3);
    auto llm = make_llm_provider(cfg);
    CHECK_THROWS_WITH_AS(llm->complete("hello"), doctest::Contains("HttpError"), Error);
    CHECK(mock.request_count() == 3);
}

TEST_CASE("a server recovering on the second attempt succeeds") {
    int hits = 0;
    MockServer mock([&hits](const httplib::Request&, httplib::Response& res) {
        if (++hits < 2) {
            res.status = 503;
            res.set_content("{}", "application/json");
            return;
        }
        res.set_content(json{{"choices", {{{"message", {{"content", "recovered"}}}}}}}.dump(),
                        "application/json");
    });
    auto llm = make_llm_provider(remote_config(ProviderKind::llm, mock.url(), 3));
    CHECK(llm->complete("hello") == "recovered");
    CHECK(mock.request_count() == 2);
}

TEST_CASE("remote chat echo returns the mock payload and carries the prompt") {
    MockServer mock([](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        const std::string prompt = body.at("messages").at(0).at("content").get<std::string>();
        res.set_content(json{{"choices", {{{"message", {{"content", "echo:" + prompt}}}}}}}.dump(),
                        "application/json");
    });
    auto llm = make_llm_provider(remote_config(ProviderKind::llm, mock.url()));
    CHECK(llm->complete("the prompt") == "echo:the prompt");
    CHECK(llm->offline() == false);

    const json body = json::parse(mock.request_bodies().at(0));
    CHECK(body.at("model") == "mock-model");
    CHECK(body.at("temperature") == 0.0);
}

TEST_CASE("api keys come from the configured environment variable only") {
    MockServer mock([](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"choices", {{{"message", {{"content", "ok"}}}}}}}.dump(), "application/json");
    });
    ::setenv("DRK_TEST_API_KEY", "sk-secret-123", 1);
    auto cfg = remote_config(ProviderKind::llm, mock.url());
    cfg.api_key_env_var = "DRK_TEST_API_KEY";
    make_llm_provider(cfg)->complete("x");
    const auto auths = mock.authorizations();
    REQUIRE(auths.size() == 1);
    CHECK(auths[0] == "Bearer sk-secret-123");
    ::unsetenv("DRK_TEST_API_KEY");
}

TEST_CASE("transcript recording captures bodies but never the api key") {
    const auto path = std::filesystem::temp_directory_path() / "drk_transcript_test.jsonl";
    std::filesystem::remove(path);

    MockServer mock([](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"choices", {{{"message", {{"content", "hi"}}}}}}}.dump(), "application/json");
    });
    ::setenv("DRK_TEST_API_KEY", "sk-secret-456", 1);
    auto cfg = remote_config(ProviderKind::llm, mock.url());
    cfg.api_key_env_var = "DRK_TEST_API_KEY";
    cfg.transcript_path = path.string();
    make_llm_provider(cfg)->complete("question one");
    ::unsetenv("DRK_TEST_API_KEY");

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    const json entry = json::parse(line);
    CHECK(entry.at("status") == 200);
    CHECK(entry.at("request").get<std::string>().find("question one") != std::string::npos);
    CHECK(line.find("sk-secret-456") == std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("offline llm extracts the first sentence of the top snippets") {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::llm;
    auto llm = make_llm_provider(cfg);
    CHECK(llm->offline());

    const std::string prompt = "# Context\n"
                               "Answer from the snippets.\n"
                               "[1] The rent is due monthly. More text follows here.\n"
                               "[2] Deposits are refundable. Unless damaged.\n"
                               "[3] Notice period is 90 days.\n"
                               "[4] This one is ignored.\n"
                               "\n# Objective\nAnswer.\n";
    const std::string answer = llm->complete(prompt);
    CHECK(answer.find("The rent is due monthly. [1]") != std::string::npos);
    CHECK(answer.find("Deposits are refundable. [2]") != std::string::npos);
    CHECK(answer.find("Notice period is 90 days. [3]") != std::string::npos);
    CHECK(answer.find("[4]") == std::string::npos);
    CHECK(llm->complete(prompt) == answer);
}

TEST_CASE("offline rerank orders by lexical overlap with the query") {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::rerank;
    auto reranker = make_rerank_provider(cfg);

    const std::vector<std::string> docs = {
        "totally unrelated botanical trivia",
        "the arbitration clause covers disputes",
        "arbitration clause",
    };
    const auto out = reranker->rerank("arbitration clause", docs, 3);
    REQUIRE(out.size() == 3);
    CHECK(out[0].relevance_score >= out[1].relevance_score);
    CHECK(out.back().index == 0); // the vocabulary-disjoint doc sinks

    const auto top2 = reranker->rerank("arbitration clause", docs, 2);
    CHECK(top2.size() == 2);

    CHECK_THROWS_WITH_AS(reranker->rerank("q", {}, 1), doctest::Contains("EmptyInput"), Error);
}

TEST_CASE("remote rerank respects scripted scores") {
    MockServer mock([](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        CHECK(body.at("documents").size() == 2);
        res.set_content(json{{"results",
                              {{{"index", 0}, {"relevance_score", 0.1}}, {{"index", 1}, {"relevance_score", 0.9}}}}}
                            .dump(),
                        "application/json");
    });
    auto reranker = make_rerank_provider(remote_config(ProviderKind::rerank, mock.url()));
    const auto out = reranker->rerank("q", {"doc zero", "doc one"}, 2);
    REQUIRE(out.size() == 2);
    CHECK(out[0].index == 1);
    CHECK(near(out[0].relevance_score, 0.9));
    CHECK(out[1].index == 0);
}

TEST_CASE("provider config validation") {
    ProviderConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.mode = ProviderMode::remote;
    CHECK_THROWS_AS(cfg.validate(), Error); // remote without endpoint
    cfg = {};
    cfg.timeout_s = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
