#include "drk/text.hpp"

#include "drk/errors.hpp"

#include <array>
#include <cctype>

namespace drk::text {

std::vector<Codepoint> decode_utf8(std::string_view text) {
    std::vector<Codepoint> out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            throw Error(Errc::decode_error, "invalid utf-8 lead byte at offset " + std::to_string(i));
        }
        if (i + len > text.size())
            throw Error(Errc::decode_error, "truncated utf-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k < len; ++k) {
            const auto bk = static_cast<unsigned char>(text[i + k]);
            if ((bk & 0xC0) != 0x80)
                throw Error(Errc::decode_error, "invalid utf-8 continuation at offset " + std::to_string(i + k));
            cp = (cp << 6) | (bk & 0x3F);
        }
        // Reject overlong encodings and surrogate/range violations.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            throw Error(Errc::decode_error, "invalid code point at offset " + std::to_string(i));
        out.push_back({cp, i, len});
        i += len;
    }
    return out;
}

bool is_space(char32_t cp) {
    switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\f':
    case U'\v':
    case 0x0085: // next line
    case 0x00A0: // no-break space
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_punct(char32_t cp) {
    if (cp < 0x80)
        return std::ispunct(static_cast<int>(cp)) != 0;
    switch (cp) {
    case 0x2013: // en dash
    case 0x2014: // em dash
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
    case 0x2026: // ellipsis
    case 0x00A1:
    case 0x00BF:
    case 0x00AB:
    case 0x00BB:
        return true;
    default:
        return false;
    }
}

std::string fold_case(std::string_view token) {
    std::string out(token);
    for (auto& c : out) {
        const auto uc = static_cast<unsigned char>(c);
        if (uc < 0x80)
            c = static_cast<char>(std::tolower(uc));
    }
    return out;
}

bool is_punct_token(std::string_view token) {
    if (token.empty())
        return false;
    for (const auto& cp : decode_utf8(token)) {
        if (!is_punct(cp.value))
            return false;
    }
    return true;
}

std::string slice_codepoints(std::string_view text, std::size_t start, std::size_t end) {
    const auto cps = decode_utf8(text);
    if (start > end || end > cps.size())
        throw Error(Errc::decode_error, "code point slice out of range");
    if (start == end)
        return {};
    const std::size_t from = cps[start].byte_offset;
    const std::size_t to = end == cps.size() ? text.size() : cps[end].byte_offset;
    return std::string(text.substr(from, to - from));
}

std::size_t codepoint_count(std::string_view text) {
    return decode_utf8(text).size();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

} // namespace drk::text
