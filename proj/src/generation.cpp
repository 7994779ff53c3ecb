#include "drk/generation.hpp"

#include "drk/errors.hpp"
#include "drk/ingest.hpp"
#include "drk/verify.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

namespace drk::generation {

namespace {

constexpr std::string_view kDefaultTemplate =
    "# Context\n"
    "{context}\n"
    "\n"
    "{snippets}\n"
    "\n"
    "# Objective\n"
    "{objective}\n"
    "\n"
    "Question: {query}\n"
    "\n"
    "# Style\n"
    "{style}\n"
    "\n"
    "# Tone\n"
    "{tone}\n"
    "\n"
    "# Audience\n"
    "{audience}\n"
    "\n"
    "# Response\n"
    "{response}\n";

std::string replace_all(std::string text, std::string_view needle, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

std::string flatten(std::string_view text) {
    std::string out(text);
    for (auto& c : out)
        if (c == '\n' || c == '\r')
            c = ' ';
    return out;
}

std::string render(const CoStarSpec& spec, const std::string& query, const std::vector<retrieval::Snippet>& snippets) {
    std::string snippet_block;
    for (const auto& s : snippets) {
        if (!snippet_block.empty())
            snippet_block += "\n";
        snippet_block += "[" + std::to_string(s.context_index) + "] " + flatten(s.text);
    }
    std::string text = spec.template_text.empty() ? std::string(kDefaultTemplate) : spec.template_text;
    text = replace_all(std::move(text), "{context}", spec.context_preamble);
    text = replace_all(std::move(text), "{snippets}", snippet_block);
    text = replace_all(std::move(text), "{objective}", spec.objective);
    text = replace_all(std::move(text), "{query}", query);
    text = replace_all(std::move(text), "{style}", spec.style);
    text = replace_all(std::move(text), "{tone}", spec.tone);
    text = replace_all(std::move(text), "{audience}", spec.audience);
    text = replace_all(std::move(text), "{response}", spec.response_rules);
    return text;
}

} // namespace

CoStarSpec CoStarSpec::defaults() {
    CoStarSpec spec;
    spec.context_preamble = "You are answering from the numbered reference snippets below. They are the only "
                            "admissible source of facts.";
    spec.objective = "Answer the question using only information stated in the numbered snippets.";
    spec.style = "Concise and factual. Prefer short declarative sentences that stay close to the snippet wording.";
    spec.tone = "Neutral and professional.";
    spec.audience = "A reviewer who will verify every claim against the cited snippets.";
    spec.response_rules = "Write complete sentences. End every sentence with the citation marker(s) [i] of the "
                          "snippet(s) that support it. Do not introduce claims that no snippet supports. If the "
                          "snippets do not contain the answer, say so.";
    return spec;
}

void CoStarSpec::validate() const {
    const std::pair<std::string_view, const std::string*> sections[] = {
        {"context", &context_preamble}, {"objective", &objective}, {"style", &style},
        {"tone", &tone},                {"audience", &audience},   {"response", &response_rules}};
    for (const auto& [name, value] : sections)
        if (value->empty())
            throw Error(Errc::bad_config, std::string("co-star section '") + std::string(name) + "' is empty");
    if (max_context_tokens == 0)
        throw Error(Errc::bad_config, "max_context_tokens must be positive");
}

const std::string& default_costar_template() {
    static const std::string tmpl{kDefaultTemplate};
    return tmpl;
}

std::string load_costar_template(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::io_error, "cannot open prompt template " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Prompt build_costar_prompt(const retrieval::RefinedQuery& query, const std::vector<retrieval::Snippet>& snippets,
                           const CoStarSpec& spec) {
    spec.validate();
    if (snippets.empty())
        throw Error(Errc::no_snippets, "cannot build a prompt without snippets");

    // Keep snippets in context_index order and drop from the tail until the
    // token budget holds. Never truncate inside a snippet.
    std::vector<retrieval::Snippet> surviving = snippets;
    std::sort(surviving.begin(), surviving.end(),
              [](const retrieval::Snippet& a, const retrieval::Snippet& b) { return a.context_index < b.context_index; });

    std::string rendered;
    for (;;) {
        rendered = render(spec, query.refined, surviving);
        if (ingest::tokenize(rendered).size() <= spec.max_context_tokens)
            break;
        surviving.pop_back();
        if (surviving.empty())
            throw Error(Errc::budget_too_small, "not even one snippet fits max_context_tokens=" +
                                                    std::to_string(spec.max_context_tokens));
    }

    Prompt prompt;
    prompt.text = std::move(rendered);
    prompt.manifest.reserve(surviving.size());
    for (const auto& s : surviving)
        prompt.manifest.push_back({s.context_index, s.chunk_id, s.text});
    return prompt;
}

DraftAnswer parse_answer(const std::string& raw, const std::vector<ManifestEntry>& manifest) {
    if (raw.find_first_not_of(" \t\r\n") == std::string::npos)
        throw Error(Errc::empty_answer, "draft answer is empty");

    // Pull the markers out first; sentence splitting runs on the clean text.
    static const std::regex marker(R"(\[(\d+)\])");
    std::string clean;
    clean.reserve(raw.size());
    std::vector<std::pair<std::size_t, std::size_t>> markers; // (clean byte pos, index)
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), marker); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        clean.append(raw, last, static_cast<std::size_t>(m.position()) - last);
        markers.emplace_back(clean.size(), static_cast<std::size_t>(std::stoul(m[1].str())));
        last = static_cast<std::size_t>(m.position() + m.length());
    }
    clean.append(raw, last, raw.size() - last);

    for (const auto& [pos, idx] : markers) {
        const bool known = std::any_of(manifest.begin(), manifest.end(),
                                       [&](const ManifestEntry& e) { return e.context_index == idx; });
        if (!known)
            throw Error(Errc::invalid_citation, "citation [" + std::to_string(idx) + "] is outside the manifest");
    }

    const auto spans = verify::split_sentence_spans(clean);
    DraftAnswer draft;
    draft.raw = raw;
    if (spans.empty())
        throw Error(Errc::empty_answer, "draft contains no sentences");

    draft.sentences.resize(spans.size());
    for (std::size_t i = 0; i < spans.size(); ++i)
        draft.sentences[i].text = clean.substr(spans[i].first, spans[i].second - spans[i].first);

    for (const auto& [pos, idx] : markers) {
        // Attach to the sentence containing the position, else the nearest
        // sentence that ends before it (markers trail their sentence).
        std::size_t owner = 0;
        bool found = false;
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (pos >= spans[i].first && pos <= spans[i].second) {
                owner = i;
                found = true;
                break;
            }
            if (spans[i].second <= pos) {
                owner = i;
                found = true;
            }
        }
        if (!found)
            owner = 0;
        auto& cited = draft.sentences[owner].cited;
        if (std::find(cited.begin(), cited.end(), idx) == cited.end())
            cited.push_back(idx);
    }
    for (auto& sentence : draft.sentences)
        sentence.missing_citation = sentence.cited.empty();
    return draft;
}

} // namespace drk::generation
