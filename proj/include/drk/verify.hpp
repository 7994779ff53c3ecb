#pragma once

#include "drk/generation.hpp"
#include "drk/providers.hpp"
#include "drk/retrieval.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drk::verify {

struct SupportPolicy {
    double threshold = 0.6; // minimum token-LCS overlap for a sentence to pass
    int max_rounds = 3;
    bool strict = false;                  // refuse instead of returning a best-effort answer
    bool check_uncited_against_all = true;

    void validate() const;
};

struct SentenceVerdict {
    std::string sentence;
    double best_support = 0.0;
    std::optional<std::string> supporting_chunk_id;
    std::vector<std::string> cited_chunk_ids;
    bool pass = false;
    bool missing_citation = false;
};

struct VerificationReport {
    std::vector<SentenceVerdict> verdicts;
    int rounds_used = 0;
    bool all_pass = false;
    double unsupported_fraction = 0.0; // failing sentences / total sentences
    bool empty_draft = false;
};

nlohmann::json report_to_json(const VerificationReport& report);

enum class AnswerStatus { grounded, best_effort, refused };
std::string_view status_name(AnswerStatus status);

struct SentenceCitation {
    std::string sentence;
    std::vector<std::string> chunk_ids;
    double support = 0.0;
};

struct FinalAnswer {
    AnswerStatus status = AnswerStatus::best_effort;
    std::string text;
    std::vector<SentenceCitation> citations;
    VerificationReport report;
};

inline constexpr std::string_view kRefusalText = "Insufficient evidence in the provided documents.";

// Splits at '.', '!' or '?' followed by whitespace and an uppercase letter
// (or end of text); a shipped abbreviation list suppresses false splits.
std::vector<std::string> split_sentences(std::string_view text);
// Byte spans of the same sentences, for callers that need positions.
std::vector<std::pair<std::size_t, std::size_t>> split_sentence_spans(std::string_view text);

// Longest common token subsequence between the case-folded content tokens,
// divided by the sentence's content token count. 1.0 means the sentence is
// contained in the snippet in order.
double support_score(std::string_view sentence, std::string_view snippet_text);

// Scores every sentence against its cited snippets; uncited sentences are
// checked against all snippets (when enabled) and always flagged.
VerificationReport verify_draft(const generation::DraftAnswer& draft,
                                const std::vector<generation::ManifestEntry>& snippets, const SupportPolicy& policy);

// Generate -> parse -> verify, regenerating with corrective instructions up
// to max_rounds. Strict mode refuses when grounding cannot be reached;
// otherwise the round with the lowest unsupported fraction wins (ties take
// the latest round).
FinalAnswer grounded_answer_loop(const retrieval::RefinedQuery& query, const std::vector<retrieval::Snippet>& snippets,
                                 providers::LlmProvider& llm, const generation::CoStarSpec& spec,
                                 const SupportPolicy& policy);

} // namespace drk::verify
