#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drk {

// Error codes for every failure the engine can raise. The CLI maps these
// onto process exit codes; library callers catch drk::Error and branch on
// code() when they need more than the message.
enum class Errc {
    decode_error,
    empty_document,
    arity_mismatch,
    empty_table,
    dimension_mismatch,
    duplicate_chunk_id,
    unknown_chunk,
    io_error,
    version_mismatch,
    checksum_mismatch,
    http_error,
    timeout,
    dimension_drift,
    empty_input,
    empty_query,
    empty_index,
    no_snippets,
    budget_too_small,
    invalid_citation,
    empty_answer,
    empty_sentence,
    empty_snippets,
    missing_key_points,
    unknown_query,
    bad_config,
    usage_error,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace drk
