#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Token-level longest-common-subsequence machinery shared by the citation
// verifier and the generation metrics. Content tokens are case-folded and
// punctuation-only tokens are dropped.
namespace drk::align {

std::vector<std::string> content_tokens(std::string_view text);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// matched[i] is true when a[i] participates in at least one maximum-length
// common subsequence of a and b (forward/backward DP join).
std::vector<bool> matchable_positions(const std::vector<std::string>& a, const std::vector<std::string>& b);

} // namespace drk::align
