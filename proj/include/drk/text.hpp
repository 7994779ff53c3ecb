#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared across the pipeline. All offsets handed out by
// these functions count Unicode code points, not bytes, so they stay stable
// across encodings of the same text.
namespace drk::text {

struct Codepoint {
    char32_t value = 0;
    std::size_t byte_offset = 0; // offset of the first byte in the utf-8 string
    std::size_t byte_len = 0;
};

// Decodes utf-8; throws Error(Errc::decode_error) on malformed input.
std::vector<Codepoint> decode_utf8(std::string_view text);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);

// ASCII-only case fold; non-ASCII code points pass through unchanged.
std::string fold_case(std::string_view token);

// True when every code point of the token is punctuation.
bool is_punct_token(std::string_view token);

// Slice [start, end) of `text` measured in code points.
std::string slice_codepoints(std::string_view text, std::size_t start, std::size_t end);

// Number of code points in the string.
std::size_t codepoint_count(std::string_view text);

// FNV-1a 64-bit, used for chunk ids, audit hashes and the snapshot checksum.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string to_hex64(std::uint64_t value);

} // namespace drk::text
