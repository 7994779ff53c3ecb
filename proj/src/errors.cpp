#include "drk/errors.hpp"

namespace drk {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::decode_error: return "DecodeError";
    case Errc::empty_document: return "EmptyDocument";
    case Errc::arity_mismatch: return "ArityMismatch";
    case Errc::empty_table: return "EmptyTable";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::duplicate_chunk_id: return "DuplicateChunkId";
    case Errc::unknown_chunk: return "UnknownChunk";
    case Errc::io_error: return "IoError";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::checksum_mismatch: return "ChecksumMismatch";
    case Errc::http_error: return "HttpError";
    case Errc::timeout: return "Timeout";
    case Errc::dimension_drift: return "DimensionDrift";
    case Errc::empty_input: return "EmptyInput";
    case Errc::empty_query: return "EmptyQuery";
    case Errc::empty_index: return "EmptyIndex";
    case Errc::no_snippets: return "NoSnippets";
    case Errc::budget_too_small: return "BudgetTooSmall";
    case Errc::invalid_citation: return "InvalidCitation";
    case Errc::empty_answer: return "EmptyAnswer";
    case Errc::empty_sentence: return "EmptySentence";
    case Errc::empty_snippets: return "EmptySnippets";
    case Errc::missing_key_points: return "MissingKeyPoints";
    case Errc::unknown_query: return "UnknownQuery";
    case Errc::bad_config: return "BadConfig";
    case Errc::usage_error: return "UsageError";
    }
    return "Error";
}

} // namespace drk
