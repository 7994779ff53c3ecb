#include "drk/align.hpp"

#include "drk/ingest.hpp"
#include "drk/text.hpp"

namespace drk::align {

std::vector<std::string> content_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& token : ingest::tokenize(text)) {
        if (text::is_punct_token(token.surface))
            continue;
        out.push_back(text::fold_case(token.surface));
    }
    return out;
}

namespace {

// Full (n+1) x (m+1) prefix-LCS table, row-major.
std::vector<std::size_t> lcs_table(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::size_t> f((n + 1) * (m + 1), 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t up = f[(i - 1) * (m + 1) + j];
            const std::size_t left = f[i * (m + 1) + j - 1];
            const std::size_t diag = f[(i - 1) * (m + 1) + j - 1];
            f[i * (m + 1) + j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, left);
        }
    }
    return f;
}

} // namespace

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty())
        return 0;
    return lcs_table(a, b).back();
}

std::vector<bool> matchable_positions(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<bool> matched(n, false);
    if (n == 0 || m == 0)
        return matched;

    const auto f = lcs_table(a, b);
    // Backward table over reversed sequences: g[i][j] = LCS(a[i..), b[j..)).
    std::vector<std::size_t> g((n + 1) * (m + 1), 0);
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            const std::size_t down = g[(i + 1) * (m + 1) + j];
            const std::size_t right = g[i * (m + 1) + j + 1];
            const std::size_t diag = g[(i + 1) * (m + 1) + j + 1];
            g[i * (m + 1) + j] = a[i] == b[j] ? diag + 1 : std::max(down, right);
        }
    }

    const std::size_t total = f.back();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (a[i] != b[j])
                continue;
            if (f[i * (m + 1) + j] + 1 + g[(i + 1) * (m + 1) + j + 1] == total) {
                matched[i] = true;
                break;
            }
        }
    }
    return matched;
}

} // namespace drk::align
