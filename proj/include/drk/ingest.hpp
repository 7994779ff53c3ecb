#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drk::ingest {

enum class DocFormat { plain, markdown, html, table };

DocFormat parse_format(std::string_view name);
std::string_view format_name(DocFormat format);

struct Document {
    std::string doc_id;
    std::string source_uri;
    DocFormat format = DocFormat::plain;
    std::string text;
    std::map<std::string, std::string> metadata;
};

struct Token {
    std::string surface;
    std::size_t char_start = 0; // code point offsets into the document text
    std::size_t char_end = 0;
};

using TokenSequence = std::vector<Token>;

struct ChunkingPolicy {
    std::size_t chunk_tokens = 1000;
    std::size_t overlap_tokens = 150;

    void validate() const; // overlap must be smaller than the window
};

struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::size_t seq_no = 0;
    std::size_t token_start = 0;
    std::size_t token_end = 0;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::string text;
};

// Decodes raw bytes and normalizes them into a Document. html/markdown are
// stripped to plain text with block boundaries kept as single newlines;
// table input is parsed as CSV (first row = header) and serialized through
// serialize_rows.
Document load_document(std::string_view bytes, DocFormat format, std::string_view source_uri);

// Renders one sentence per row. The default template produces
// "col1: v1; col2: v2." and rows are joined with newlines. A custom template
// may reference columns as {column_name}.
Document serialize_rows(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows,
                        const std::optional<std::string>& row_template = std::nullopt);

// Whitespace split with leading/trailing punctuation separated into their own
// single-character tokens. Case is preserved; spans count code points.
TokenSequence tokenize(std::string_view textv);

// Sliding token windows with stride chunk_tokens - overlap_tokens. A document
// shorter than one window yields a single chunk; the trailing window may be
// shorter than the rest.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkingPolicy& policy);

// Minimal CSV reader (quotes, escaped quotes, embedded newlines).
std::vector<std::vector<std::string>> parse_csv(std::string_view csv);

// Exposed for the loader tests: markup stripping used by load_document.
std::string strip_html(std::string_view html);
std::string strip_markdown(std::string_view md);

} // namespace drk::ingest
