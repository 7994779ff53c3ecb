#pragma once

#include "drk/retrieval.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace drk::generation {

// Six-section prompt spec: Context, Objective, Style, Tone, Audience,
// Response. The response rules must keep demanding per-sentence "[i]"
// citation markers or verification has nothing to anchor on.
struct CoStarSpec {
    std::string context_preamble;
    std::string objective;
    std::string style;
    std::string tone;
    std::string audience;
    std::string response_rules;
    std::size_t max_context_tokens = 6000;
    std::string template_text; // layout with {context}/{objective}/.../{query}/{snippets} placeholders

    static CoStarSpec defaults();
    void validate() const; // all six sections non-empty
};

struct ManifestEntry {
    std::size_t context_index = 0;
    std::string chunk_id;
    std::string text;
};

struct Prompt {
    std::string text;
    std::vector<ManifestEntry> manifest; // surviving snippets, context_index ascending
};

struct DraftSentence {
    std::string text; // citation markers stripped
    std::vector<std::size_t> cited;
    bool missing_citation = false;
};

struct DraftAnswer {
    std::string raw;
    std::vector<DraftSentence> sentences;
};

// The built-in layout; identical to templates/costar_default.txt.
const std::string& default_costar_template();
std::string load_costar_template(const std::string& path);

// Renders the six sections in C,O,S,T,A,R order with snippets listed as
// "[i] <text>" lines. Snippets that push the prompt past max_context_tokens
// are dropped whole, lowest-ranked first; the manifest reflects survivors.
Prompt build_costar_prompt(const retrieval::RefinedQuery& query, const std::vector<retrieval::Snippet>& snippets,
                           const CoStarSpec& spec);

// Splits the draft into sentences and attaches each trailing run of "[i]"
// markers to its sentence. Sentences without markers are flagged.
DraftAnswer parse_answer(const std::string& raw, const std::vector<ManifestEntry>& manifest);

} // namespace drk::generation
