#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace drk::eval {

struct Qrels {
    std::map<std::string, std::set<std::string>> relevant; // query_id -> relevant chunk ids
};

struct RunRecord {
    std::string query_id;
    std::string dataset; // optional tag, empty -> "default"
    std::vector<std::string> ranked;
};

struct TraceRecord {
    std::string query_id;
    std::string dataset;
    std::string query;
    std::string answer;
    std::vector<std::string> snippets;
    std::optional<std::vector<std::string>> key_points;
    std::optional<double> human_accuracy; // pass-through, 1-5 human grade
};

// |relevant ∩ top-k| / |relevant|. k beyond the run scores the full run.
double recall_at_k(const RunRecord& run, const Qrels& qrels, std::size_t k);
// |relevant ∩ top-k| / k, k fixed in the denominator even for short runs.
double precision_at_k(const RunRecord& run, const Qrels& qrels, std::size_t k);

// Unsupported answer tokens / total answer tokens, where a token counts as
// supported when it lies on some maximal token-LCS alignment between its
// sentence and any snippet.
double trace_hallucination(const TraceRecord& record);
// Distinct snippet tokens on some alignment with the answer / all snippet tokens.
double trace_utilization(const TraceRecord& record);
// Fraction of key points whose support against the answer clears the threshold.
double trace_completeness(const TraceRecord& record, double threshold = 0.6);
// Mean over snippets of the query content-token overlap (stopwords excluded).
double trace_context_relevance(const TraceRecord& record);

struct PerQueryMetrics {
    std::string query_id;
    std::string dataset;
    std::map<std::string, double> values; // metric name -> value
};

struct MetricsReport {
    std::vector<std::size_t> k_grid;
    std::vector<PerQueryMetrics> per_query;
    std::map<std::string, std::map<std::string, double>> per_dataset; // macro means
    std::map<std::string, double> micro;                              // mean over all queries
    std::map<std::string, double> macro_of_datasets;                  // mean of dataset macros
};

// Means are computed per metric over the queries that carry it. Both the
// micro (all-queries) and macro-of-datasets aggregates are reported; neither
// is labeled as an overall "ALL" row.
MetricsReport aggregate_report(std::vector<PerQueryMetrics> per_query, std::vector<std::size_t> k_grid);

std::vector<PerQueryMetrics> score_run(const std::vector<RunRecord>& runs, const Qrels& qrels,
                                       const std::vector<std::size_t>& k_grid);
std::vector<PerQueryMetrics> score_trace(const std::vector<TraceRecord>& records, double completeness_threshold = 0.6);

nlohmann::json report_to_json(const MetricsReport& report);
// Aligned plain-text table; fractional metrics are rendered x100 with two
// decimals, the human accuracy grade is printed as-is.
std::string report_to_table(const MetricsReport& report);

// JSON-lines loaders for the run/qrels/trace file formats.
std::vector<RunRecord> load_run(const std::filesystem::path& path);
Qrels load_qrels(const std::filesystem::path& path);
std::vector<TraceRecord> load_trace(const std::filesystem::path& path);

} // namespace drk::eval
