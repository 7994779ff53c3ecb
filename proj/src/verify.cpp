#include "drk/verify.hpp"

#include "drk/align.hpp"
#include "drk/errors.hpp"
#include "drk/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace drk::verify {

namespace {

// Suppresses sentence splits after common abbreviations. Matched against the
// whitespace-delimited word ending at the period, case-sensitively.
constexpr std::array<std::string_view, 23> kAbbreviations = {
    "e.g.", "i.e.", "etc.", "cf.",  "vs.",  "No.",  "Nos.", "Inc.", "Ltd.", "Corp.", "Co.", "Mr.",
    "Mrs.", "Ms.",  "Dr.",  "Prof.", "Jr.", "Sr.",  "St.",  "Fig.", "Eq.",  "Sec.",  "approx."};

bool is_upper_ascii(char32_t cp) {
    return cp >= U'A' && cp <= U'Z';
}

bool is_terminator(char32_t cp) {
    return cp == U'.' || cp == U'!' || cp == U'?';
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

void SupportPolicy::validate() const {
    if (threshold <= 0.0 || threshold > 1.0)
        throw Error(Errc::bad_config, "support threshold must lie in (0, 1]");
    if (max_rounds < 1)
        throw Error(Errc::bad_config, "max_rounds must be at least 1");
}

std::vector<std::pair<std::size_t, std::size_t>> split_sentence_spans(std::string_view text) {
    const auto cps = text::decode_utf8(text);
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    if (cps.empty())
        return spans;

    auto byte_at = [&](std::size_t cp_index) {
        return cp_index == cps.size() ? text.size() : cps[cp_index].byte_offset;
    };
    auto push_span = [&](std::size_t from_cp, std::size_t to_cp) {
        while (from_cp < to_cp && text::is_space(cps[from_cp].value))
            ++from_cp;
        while (to_cp > from_cp && text::is_space(cps[to_cp - 1].value))
            --to_cp;
        if (from_cp < to_cp)
            spans.emplace_back(byte_at(from_cp), byte_at(to_cp));
    };

    auto ends_with_abbreviation = [&](std::size_t dot_cp) {
        std::size_t w = dot_cp;
        while (w > 0 && !text::is_space(cps[w - 1].value))
            --w;
        // Ignore leading punctuation like an opening parenthesis.
        while (w < dot_cp && text::is_punct(cps[w].value) && cps[w].value != U'.')
            ++w;
        const std::string word(text.substr(byte_at(w), byte_at(dot_cp + 1) - byte_at(w)));
        return std::any_of(kAbbreviations.begin(), kAbbreviations.end(),
                           [&](std::string_view a) { return a == word; });
    };

    std::size_t start = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (!is_terminator(cps[i].value))
            continue;
        std::size_t j = i + 1;
        while (j < cps.size() && text::is_space(cps[j].value))
            ++j;
        const bool at_end = j == cps.size();
        const bool next_upper = !at_end && j > i + 1 && is_upper_ascii(cps[j].value);
        if (!at_end && !next_upper)
            continue;
        if (cps[i].value == U'.' && !at_end && ends_with_abbreviation(i))
            continue;
        push_span(start, i + 1);
        start = j;
        i = j == 0 ? 0 : j - 1;
    }
    push_span(start, cps.size());
    return spans;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& [from, to] : split_sentence_spans(text))
        out.push_back(std::string(text.substr(from, to - from)));
    return out;
}

double support_score(std::string_view sentence, std::string_view snippet_text) {
    if (trim(sentence).empty())
        throw Error(Errc::empty_sentence, "support_score needs a non-empty sentence");
    const auto s = align::content_tokens(sentence);
    if (s.empty())
        return 0.0; // punctuation-only sentence carries no checkable claim
    const auto t = align::content_tokens(snippet_text);
    return static_cast<double>(align::lcs_length(s, t)) / static_cast<double>(s.size());
}

VerificationReport verify_draft(const generation::DraftAnswer& draft,
                                const std::vector<generation::ManifestEntry>& snippets, const SupportPolicy& policy) {
    policy.validate();
    VerificationReport report;
    if (draft.sentences.empty()) {
        report.empty_draft = true;
        report.all_pass = true; // vacuously
        return report;
    }

    std::size_t failing = 0;
    for (const auto& sentence : draft.sentences) {
        SentenceVerdict verdict;
        verdict.sentence = sentence.text;
        verdict.missing_citation = sentence.cited.empty();

        std::vector<const generation::ManifestEntry*> targets;
        if (!sentence.cited.empty()) {
            for (const auto idx : sentence.cited)
                for (const auto& entry : snippets)
                    if (entry.context_index == idx) {
                        targets.push_back(&entry);
                        verdict.cited_chunk_ids.push_back(entry.chunk_id);
                    }
        } else if (policy.check_uncited_against_all) {
            for (const auto& entry : snippets)
                targets.push_back(&entry);
        }

        if (!trim(verdict.sentence).empty()) {
            for (const auto* entry : targets) {
                const double score = support_score(verdict.sentence, entry->text);
                if (score > verdict.best_support) {
                    verdict.best_support = score;
                    verdict.supporting_chunk_id = entry->chunk_id;
                }
            }
        }
        verdict.pass = verdict.best_support >= policy.threshold;
        if (!verdict.pass)
            ++failing;
        report.verdicts.push_back(std::move(verdict));
    }
    report.all_pass = failing == 0;
    report.unsupported_fraction = static_cast<double>(failing) / static_cast<double>(report.verdicts.size());
    return report;
}

nlohmann::json report_to_json(const VerificationReport& report) {
    nlohmann::json sentences = nlohmann::json::array();
    for (const auto& v : report.verdicts) {
        nlohmann::json entry{{"text", v.sentence},
                             {"best_support", v.best_support},
                             {"cited", v.cited_chunk_ids},
                             {"pass", v.pass},
                             {"missing_citation", v.missing_citation}};
        if (v.supporting_chunk_id)
            entry["supporting_chunk_id"] = *v.supporting_chunk_id;
        sentences.push_back(std::move(entry));
    }
    return nlohmann::json{{"sentences", std::move(sentences)},
                          {"rounds_used", report.rounds_used},
                          {"all_pass", report.all_pass},
                          {"unsupported_fraction", report.unsupported_fraction},
                          {"empty_draft", report.empty_draft}};
}

std::string_view status_name(AnswerStatus status) {
    switch (status) {
    case AnswerStatus::grounded: return "grounded";
    case AnswerStatus::best_effort: return "best_effort";
    case AnswerStatus::refused: return "refused";
    }
    return "best_effort";
}

namespace {

struct RoundState {
    generation::DraftAnswer draft;
    std::vector<generation::ManifestEntry> manifest;
    VerificationReport report;
    double fraction = 1.0;
};

std::string corrective_directive(const std::vector<std::string>& failing_sentences) {
    std::string directive = "Revision required. The following sentences were not supported by the numbered context:";
    for (const auto& s : failing_sentences)
        directive += "\n- " + s;
    if (failing_sentences.empty())
        directive += "\n- (the draft could not be parsed into cited sentences)";
    directive += "\nRestate using only wording supported by the numbered context, or remove the claim. "
                 "End every sentence with its citation marker [i].";
    return directive;
}

FinalAnswer assemble(AnswerStatus status, const RoundState& round) {
    FinalAnswer out;
    out.status = status;
    out.report = round.report;
    std::string joined;
    for (std::size_t i = 0; i < round.draft.sentences.size(); ++i) {
        const auto& sentence = round.draft.sentences[i];
        if (!joined.empty())
            joined += " ";
        joined += sentence.text;
        SentenceCitation citation;
        citation.sentence = sentence.text;
        for (const auto idx : sentence.cited)
            for (const auto& entry : round.manifest)
                if (entry.context_index == idx)
                    citation.chunk_ids.push_back(entry.chunk_id);
        if (i < round.report.verdicts.size())
            citation.support = round.report.verdicts[i].best_support;
        out.citations.push_back(std::move(citation));
    }
    out.text = joined;
    return out;
}

} // namespace

FinalAnswer grounded_answer_loop(const retrieval::RefinedQuery& query, const std::vector<retrieval::Snippet>& snippets,
                                 providers::LlmProvider& llm, const generation::CoStarSpec& spec,
                                 const SupportPolicy& policy) {
    policy.validate();
    if (snippets.empty()) {
        if (policy.strict) {
            FinalAnswer refused;
            refused.status = AnswerStatus::refused;
            refused.text = std::string(kRefusalText);
            return refused;
        }
        throw Error(Errc::no_snippets, "no snippets to ground an answer in");
    }

    generation::CoStarSpec round_spec = spec;
    RoundState best;
    bool have_best = false;
    RoundState last;

    for (int round = 1; round <= policy.max_rounds; ++round) {
        const generation::Prompt prompt = generation::build_costar_prompt(query, snippets, round_spec);
        const std::string raw = llm.complete(prompt.text);

        RoundState state;
        state.manifest = prompt.manifest;
        std::vector<std::string> failing;
        try {
            state.draft = generation::parse_answer(raw, prompt.manifest);
            state.report = verify_draft(state.draft, prompt.manifest, policy);
            if (state.report.empty_draft) {
                state.report.all_pass = false;
                state.fraction = 1.0;
            } else {
                state.fraction = state.report.unsupported_fraction;
            }
            for (const auto& v : state.report.verdicts)
                if (!v.pass)
                    failing.push_back(v.sentence);
        } catch (const Error& e) {
            if (e.code() != Errc::invalid_citation && e.code() != Errc::empty_answer)
                throw;
            // Unusable draft: count the round, feed the directive back.
            state.report.all_pass = false;
            state.report.unsupported_fraction = 1.0;
            state.fraction = 1.0;
        }
        state.report.rounds_used = round;

        if (state.report.all_pass)
            return assemble(AnswerStatus::grounded, state);

        if (!have_best || state.fraction <= best.fraction) { // ties keep the latest round
            best = state;
            have_best = true;
        }
        last = state;
        round_spec.response_rules = spec.response_rules + "\n\n" + corrective_directive(failing);
    }

    if (policy.strict) {
        FinalAnswer refused;
        refused.status = AnswerStatus::refused;
        refused.text = std::string(kRefusalText);
        refused.report = last.report;
        return refused;
    }
    return assemble(AnswerStatus::best_effort, best);
}

} // namespace drk::verify
