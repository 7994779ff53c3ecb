#include "drk/ingest.hpp"

#include "drk/errors.hpp"
#include "drk/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace drk::ingest {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

// Collapse horizontal whitespace runs to one space and newline runs to one
// newline, trimming every line. Keeps block boundaries as single '\n'.
std::string normalize_blocks(std::string_view raw) {
    std::vector<std::string> lines;
    std::string current;
    for (const char c : raw) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    lines.push_back(current);

    std::string out;
    for (auto& line : lines) {
        std::string squeezed;
        bool in_space = false;
        for (const char c : line) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                in_space = true;
            } else {
                if (in_space && !squeezed.empty())
                    squeezed.push_back(' ');
                in_space = false;
                squeezed.push_back(c);
            }
        }
        if (squeezed.empty())
            continue;
        if (!out.empty())
            out.push_back('\n');
        out += squeezed;
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

bool is_block_tag(std::string_view name) {
    static const std::array<std::string_view, 24> kBlocks = {
        "p",  "div", "br",     "h1",      "h2",     "h3",     "h4",     "h5",
        "h6", "li",  "ul",     "ol",      "table",  "tr",     "td",     "th",
        "hr", "pre", "header", "footer",  "section", "article", "blockquote", "nav"};
    return std::any_of(kBlocks.begin(), kBlocks.end(), [&](std::string_view b) { return iequals(name, b); });
}

std::string decode_entities(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        if (in[i] != '&') {
            out.push_back(in[i++]);
            continue;
        }
        const std::size_t semi = in.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(in[i++]);
            continue;
        }
        const std::string_view ent = in.substr(i + 1, semi - i - 1);
        if (ent == "amp")
            out.push_back('&');
        else if (ent == "lt")
            out.push_back('<');
        else if (ent == "gt")
            out.push_back('>');
        else if (ent == "quot")
            out.push_back('"');
        else if (ent == "apos")
            out.push_back('\'');
        else if (ent == "nbsp")
            out.push_back(' ');
        else if (!ent.empty() && ent[0] == '#') {
            long cp = 0;
            try {
                cp = std::stol(std::string(ent.substr(1)), nullptr, ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X') ? 16 : 10);
            } catch (...) {
                cp = -1;
            }
            if (cp >= 0 && cp < 0x80) {
                out.push_back(static_cast<char>(cp));
            } else {
                out.append(in.substr(i, semi - i + 1));
            }
        } else {
            out.append(in.substr(i, semi - i + 1));
            i = semi + 1;
            continue;
        }
        i = semi + 1;
    }
    return out;
}

} // namespace

DocFormat parse_format(std::string_view name) {
    if (iequals(name, "plain") || iequals(name, "txt") || iequals(name, "text"))
        return DocFormat::plain;
    if (iequals(name, "markdown") || iequals(name, "md"))
        return DocFormat::markdown;
    if (iequals(name, "html"))
        return DocFormat::html;
    if (iequals(name, "table") || iequals(name, "csv"))
        return DocFormat::table;
    throw Error(Errc::bad_config, "unknown document format '" + std::string(name) + "'");
}

std::string_view format_name(DocFormat format) {
    switch (format) {
    case DocFormat::plain: return "plain";
    case DocFormat::markdown: return "markdown";
    case DocFormat::html: return "html";
    case DocFormat::table: return "table";
    }
    return "plain";
}

std::string strip_html(std::string_view html) {
    std::string out;
    out.reserve(html.size());
    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            out.push_back(html[i++]);
            continue;
        }
        if (html.compare(i, 4, "<!--") == 0) {
            const std::size_t end = html.find("-->", i + 4);
            i = end == std::string_view::npos ? html.size() : end + 3;
            continue;
        }
        std::size_t j = i + 1;
        bool closing = false;
        if (j < html.size() && html[j] == '/') {
            closing = true;
            ++j;
        }
        std::size_t name_end = j;
        while (name_end < html.size() && (std::isalnum(static_cast<unsigned char>(html[name_end]))))
            ++name_end;
        const std::string_view name = html.substr(j, name_end - j);
        std::size_t gt = html.find('>', name_end);
        if (gt == std::string_view::npos) {
            // Dangling '<' without a closing bracket: keep as literal text.
            out.push_back(html[i++]);
            continue;
        }
        if (!closing && (iequals(name, "script") || iequals(name, "style"))) {
            // Drop the element body entirely.
            std::string close = "</" + std::string(name);
            std::size_t k = gt + 1;
            std::size_t found = std::string_view::npos;
            while (k < html.size()) {
                const std::size_t cand = html.find('<', k);
                if (cand == std::string_view::npos)
                    break;
                if (cand + close.size() <= html.size() && iequals(html.substr(cand, close.size()), close)) {
                    found = cand;
                    break;
                }
                k = cand + 1;
            }
            if (found == std::string_view::npos) {
                i = html.size();
            } else {
                const std::size_t close_gt = html.find('>', found);
                i = close_gt == std::string_view::npos ? html.size() : close_gt + 1;
            }
            out.push_back('\n');
            continue;
        }
        if (is_block_tag(name))
            out.push_back('\n');
        i = gt + 1;
    }
    return normalize_blocks(decode_entities(out));
}

std::string strip_markdown(std::string_view md) {
    std::string out;
    std::istringstream in{std::string(md)};
    std::string line;
    bool in_fence = false;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.rfind("```", 0) == 0) {
            in_fence = !in_fence;
            out.push_back('\n');
            continue;
        }
        if (in_fence) {
            out += line;
            out.push_back('\n');
            continue;
        }
        // Heading markers.
        std::size_t p = 0;
        while (p < t.size() && t[p] == '#')
            ++p;
        if (p > 0 && p < t.size() && t[p] == ' ')
            t = t.substr(p + 1);
        // List markers.
        if (t.rfind("- ", 0) == 0 || t.rfind("* ", 0) == 0 || t.rfind("+ ", 0) == 0)
            t = t.substr(2);
        if (t.rfind("> ", 0) == 0)
            t = t.substr(2);
        // Inline markup.
        std::string cleaned;
        for (std::size_t i = 0; i < t.size();) {
            const char c = t[i];
            if (c == '*' || c == '_' || c == '`') {
                ++i;
                continue;
            }
            if (c == '!' && i + 1 < t.size() && t[i + 1] == '[') {
                ++i;
                continue;
            }
            if (c == '[') {
                const std::size_t close = t.find(']', i);
                const std::size_t paren = close != std::string::npos && close + 1 < t.size() && t[close + 1] == '('
                                              ? t.find(')', close)
                                              : std::string::npos;
                if (close != std::string::npos && paren != std::string::npos) {
                    cleaned += t.substr(i + 1, close - i - 1);
                    i = paren + 1;
                    continue;
                }
            }
            cleaned.push_back(c);
            ++i;
        }
        out += cleaned;
        out.push_back('\n');
    }
    return normalize_blocks(out);
}

Document load_document(std::string_view bytes, DocFormat format, std::string_view source_uri) {
    // Validate encoding up front so downstream code can assume clean utf-8.
    text::decode_utf8(bytes);

    Document doc;
    doc.source_uri = std::string(source_uri);
    doc.format = format;
    switch (format) {
    case DocFormat::plain:
        doc.text = std::string(bytes);
        break;
    case DocFormat::markdown:
        doc.text = strip_markdown(bytes);
        break;
    case DocFormat::html:
        doc.text = strip_html(bytes);
        break;
    case DocFormat::table: {
        auto cells = parse_csv(bytes);
        if (cells.empty())
            throw Error(Errc::empty_table, "csv input has no rows");
        const auto header = cells.front();
        cells.erase(cells.begin());
        Document table_doc = serialize_rows(header, cells);
        doc.text = std::move(table_doc.text);
        break;
    }
    }
    if (trim(doc.text).empty())
        throw Error(Errc::empty_document, "no text left after normalization of " + doc.source_uri);
    doc.metadata["format"] = std::string(format_name(format));
    doc.metadata["source_uri"] = doc.source_uri;
    doc.doc_id = !doc.source_uri.empty() ? doc.source_uri : "doc-" + text::to_hex64(text::fnv1a64(doc.text));
    return doc;
}

Document serialize_rows(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows,
                        const std::optional<std::string>& row_template) {
    if (rows.empty())
        throw Error(Errc::empty_table, "no rows to serialize");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw Error(Errc::arity_mismatch, "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                                  " values for " + std::to_string(header.size()) + " columns");
    }

    std::string out;
    for (const auto& row : rows) {
        std::string sentence;
        if (row_template) {
            sentence = *row_template;
            for (std::size_t c = 0; c < header.size(); ++c) {
                const std::string placeholder = "{" + header[c] + "}";
                std::size_t pos = 0;
                while ((pos = sentence.find(placeholder, pos)) != std::string::npos) {
                    sentence.replace(pos, placeholder.size(), row[c]);
                    pos += row[c].size();
                }
            }
        } else {
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (c > 0)
                    sentence += "; ";
                sentence += header[c] + ": " + row[c];
            }
            sentence += ".";
        }
        if (!out.empty())
            out.push_back('\n');
        out += sentence;
    }

    Document doc;
    doc.format = DocFormat::table;
    doc.text = std::move(out);
    doc.metadata["format"] = "table";
    doc.doc_id = "table-" + text::to_hex64(text::fnv1a64(doc.text));
    return doc;
}

TokenSequence tokenize(std::string_view textv) {
    const auto cps = text::decode_utf8(textv);
    TokenSequence tokens;

    auto emit = [&](std::size_t cp_start, std::size_t cp_end) {
        if (cp_start >= cp_end)
            return;
        const std::size_t from = cps[cp_start].byte_offset;
        const std::size_t to = cp_end == cps.size() ? textv.size() : cps[cp_end].byte_offset;
        tokens.push_back({std::string(textv.substr(from, to - from)), cp_start, cp_end});
    };

    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && text::is_space(cps[i].value))
            ++i;
        std::size_t j = i;
        while (j < cps.size() && !text::is_space(cps[j].value))
            ++j;
        if (i == j)
            break;
        // Word [i, j): peel punctuation off both ends, one code point per token.
        std::size_t lead = i;
        while (lead < j && text::is_punct(cps[lead].value))
            ++lead;
        std::size_t tail = j;
        while (tail > lead && text::is_punct(cps[tail - 1].value))
            --tail;
        for (std::size_t p = i; p < lead; ++p)
            emit(p, p + 1);
        emit(lead, tail);
        for (std::size_t p = tail; p < j; ++p)
            emit(p, p + 1);
        i = j;
    }
    return tokens;
}

void ChunkingPolicy::validate() const {
    if (chunk_tokens == 0)
        throw Error(Errc::bad_config, "chunk_tokens must be positive");
    if (overlap_tokens >= chunk_tokens)
        throw Error(Errc::bad_config, "overlap_tokens must be smaller than chunk_tokens");
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingPolicy& policy) {
    policy.validate();
    const TokenSequence tokens = tokenize(doc.text);
    std::vector<Chunk> chunks;
    if (tokens.empty())
        return chunks;

    const std::size_t total = tokens.size();
    const std::size_t stride = policy.chunk_tokens - policy.overlap_tokens;
    for (std::size_t seq = 0;; ++seq) {
        const std::size_t start = seq * stride;
        const std::size_t end = std::min(start + policy.chunk_tokens, total);

        Chunk chunk;
        chunk.doc_id = doc.doc_id;
        chunk.seq_no = seq;
        chunk.token_start = start;
        chunk.token_end = end;
        chunk.char_start = tokens[start].char_start;
        chunk.char_end = tokens[end - 1].char_end;
        chunk.text = text::slice_codepoints(doc.text, chunk.char_start, chunk.char_end);
        const std::string key = doc.doc_id + "|" + std::to_string(seq) + "|" + std::to_string(chunk.char_start) + "|" +
                                std::to_string(chunk.char_end);
        chunk.chunk_id = text::to_hex64(text::fnv1a64(key));
        chunks.push_back(std::move(chunk));

        if (start + policy.chunk_tokens >= total)
            break;
    }
    return chunks;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view csv) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(row);
        row.clear();
    };

    for (std::size_t i = 0; i < csv.size(); ++i) {
        const char c = csv[i];
        any = true;
        if (quoted) {
            if (c == '"') {
                if (i + 1 < csv.size() && csv[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r')
                field.pop_back();
            end_row();
        } else {
            field.push_back(c);
        }
    }
    if (any && (!field.empty() || !row.empty()))
        end_row();
    return rows;
}

} // namespace drk::ingest
