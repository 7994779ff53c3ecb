#include "drk/eval.hpp"

#include "drk/align.hpp"
#include "drk/errors.hpp"
#include "drk/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace drk::eval {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 72> kStopwords = {
    "a",    "an",    "the",  "and",  "or",    "but",   "if",    "then", "is",    "are",  "was",  "were",
    "be",   "been",  "being", "to",  "of",    "in",    "on",    "at",   "for",   "with", "by",   "from",
    "as",   "that",  "this", "these", "those", "it",   "its",   "his",  "her",   "their", "our", "your",
    "my",   "we",    "you",  "they", "he",    "she",   "i",     "do",   "does",  "did",  "not",  "no",
    "so",   "than",  "too",  "very", "can",   "will",  "just",  "about", "into", "over", "under", "again",
    "what", "which", "who",  "how",  "when",  "where", "why",   "all",  "any",   "each", "some", "such"};

bool is_stopword(const std::string& token) {
    return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

const std::set<std::string>& relevant_for(const Qrels& qrels, const std::string& query_id) {
    const auto it = qrels.relevant.find(query_id);
    if (it == qrels.relevant.end() || it->second.empty())
        throw Error(Errc::unknown_query, "no relevance judgments for query '" + query_id + "'");
    return it->second;
}

std::size_t hits_in_top_k(const RunRecord& run, const std::set<std::string>& relevant, std::size_t k) {
    std::size_t hits = 0;
    const std::size_t n = std::min(k, run.ranked.size());
    for (std::size_t i = 0; i < n; ++i)
        hits += relevant.count(run.ranked[i]);
    return hits;
}

std::string dataset_or_default(const std::string& dataset) {
    return dataset.empty() ? "default" : dataset;
}

} // namespace

double recall_at_k(const RunRecord& run, const Qrels& qrels, std::size_t k) {
    const auto& relevant = relevant_for(qrels, run.query_id);
    return static_cast<double>(hits_in_top_k(run, relevant, k)) / static_cast<double>(relevant.size());
}

double precision_at_k(const RunRecord& run, const Qrels& qrels, std::size_t k) {
    if (k == 0)
        throw Error(Errc::bad_config, "precision@k needs k >= 1");
    const auto& relevant = relevant_for(qrels, run.query_id);
    return static_cast<double>(hits_in_top_k(run, relevant, k)) / static_cast<double>(k);
}

double trace_hallucination(const TraceRecord& record) {
    const auto sentences = verify::split_sentences(record.answer);
    std::size_t total = 0;
    std::size_t unsupported = 0;
    for (const auto& sentence : sentences) {
        const auto tokens = align::content_tokens(sentence);
        if (tokens.empty())
            continue;
        std::vector<bool> supported(tokens.size(), false);
        for (const auto& snippet : record.snippets) {
            const auto hit = align::matchable_positions(tokens, align::content_tokens(snippet));
            for (std::size_t i = 0; i < tokens.size(); ++i)
                if (hit[i])
                    supported[i] = true;
        }
        total += tokens.size();
        for (const bool s : supported)
            if (!s)
                ++unsupported;
    }
    if (total == 0)
        throw Error(Errc::empty_answer, "answer has no scoreable tokens");
    return static_cast<double>(unsupported) / static_cast<double>(total);
}

double trace_utilization(const TraceRecord& record) {
    if (record.snippets.empty())
        throw Error(Errc::empty_snippets, "utilization needs at least one snippet");
    const auto sentences = verify::split_sentences(record.answer);
    std::vector<std::vector<std::string>> sentence_tokens;
    for (const auto& s : sentences) {
        auto tokens = align::content_tokens(s);
        if (!tokens.empty())
            sentence_tokens.push_back(std::move(tokens));
    }

    std::size_t total = 0;
    std::size_t used = 0;
    for (const auto& snippet : record.snippets) {
        const auto tokens = align::content_tokens(snippet);
        total += tokens.size();
        if (tokens.empty())
            continue;
        std::vector<bool> matched(tokens.size(), false);
        for (const auto& st : sentence_tokens) {
            const auto hit = align::matchable_positions(tokens, st);
            for (std::size_t i = 0; i < tokens.size(); ++i)
                if (hit[i])
                    matched[i] = true;
        }
        for (const bool m : matched)
            if (m)
                ++used;
    }
    if (total == 0)
        throw Error(Errc::empty_snippets, "snippets have no scoreable tokens");
    return static_cast<double>(used) / static_cast<double>(total);
}

double trace_completeness(const TraceRecord& record, double threshold) {
    if (!record.key_points || record.key_points->empty())
        throw Error(Errc::missing_key_points, "completeness needs key_points");
    std::size_t covered = 0;
    for (const auto& point : *record.key_points)
        if (verify::support_score(point, record.answer) >= threshold)
            ++covered;
    return static_cast<double>(covered) / static_cast<double>(record.key_points->size());
}

double trace_context_relevance(const TraceRecord& record) {
    if (record.snippets.empty())
        throw Error(Errc::empty_snippets, "context relevance needs at least one snippet");
    std::set<std::string> query_tokens;
    for (const auto& t : align::content_tokens(record.query))
        if (!is_stopword(t))
            query_tokens.insert(t);
    if (query_tokens.empty())
        throw Error(Errc::empty_input, "query has no content tokens after stopword removal");

    double sum = 0.0;
    for (const auto& snippet : record.snippets) {
        std::set<std::string> snippet_tokens;
        for (const auto& t : align::content_tokens(snippet))
            snippet_tokens.insert(t);
        std::size_t overlap = 0;
        for (const auto& t : query_tokens)
            overlap += snippet_tokens.count(t);
        sum += static_cast<double>(overlap) / static_cast<double>(query_tokens.size());
    }
    return sum / static_cast<double>(record.snippets.size());
}

std::vector<PerQueryMetrics> score_run(const std::vector<RunRecord>& runs, const Qrels& qrels,
                                       const std::vector<std::size_t>& k_grid) {
    std::vector<PerQueryMetrics> out;
    out.reserve(runs.size());
    for (const auto& run : runs) {
        PerQueryMetrics m;
        m.query_id = run.query_id;
        m.dataset = dataset_or_default(run.dataset);
        for (const auto k : k_grid) {
            m.values["recall@" + std::to_string(k)] = recall_at_k(run, qrels, k);
            m.values["precision@" + std::to_string(k)] = precision_at_k(run, qrels, k);
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<PerQueryMetrics> score_trace(const std::vector<TraceRecord>& records, double completeness_threshold) {
    std::vector<PerQueryMetrics> out;
    out.reserve(records.size());
    for (const auto& record : records) {
        PerQueryMetrics m;
        m.query_id = record.query_id;
        m.dataset = dataset_or_default(record.dataset);
        m.values["hallucination"] = trace_hallucination(record);
        m.values["utilization"] = trace_utilization(record);
        m.values["context_relevance"] = trace_context_relevance(record);
        if (record.key_points && !record.key_points->empty())
            m.values["completeness"] = trace_completeness(record, completeness_threshold);
        if (record.human_accuracy)
            m.values["accuracy"] = *record.human_accuracy; // pass-through, never computed
        out.push_back(std::move(m));
    }
    return out;
}

MetricsReport aggregate_report(std::vector<PerQueryMetrics> per_query, std::vector<std::size_t> k_grid) {
    if (per_query.empty())
        throw Error(Errc::empty_input, "no per-query metrics to aggregate");

    MetricsReport report;
    report.k_grid = std::move(k_grid);
    report.per_query = std::move(per_query);

    std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> dataset_sums;
    std::map<std::string, std::pair<double, std::size_t>> micro_sums;
    for (const auto& q : report.per_query) {
        const std::string ds = dataset_or_default(q.dataset);
        for (const auto& [metric, value] : q.values) {
            auto& d = dataset_sums[ds][metric];
            d.first += value;
            ++d.second;
            auto& g = micro_sums[metric];
            g.first += value;
            ++g.second;
        }
    }
    for (const auto& [ds, metrics] : dataset_sums)
        for (const auto& [metric, sum] : metrics)
            report.per_dataset[ds][metric] = sum.first / static_cast<double>(sum.second);
    for (const auto& [metric, sum] : micro_sums)
        report.micro[metric] = sum.first / static_cast<double>(sum.second);

    std::map<std::string, std::pair<double, std::size_t>> macro_sums;
    for (const auto& [ds, metrics] : report.per_dataset) {
        for (const auto& [metric, value] : metrics) {
            auto& m = macro_sums[metric];
            m.first += value;
            ++m.second;
        }
    }
    for (const auto& [metric, sum] : macro_sums)
        report.macro_of_datasets[metric] = sum.first / static_cast<double>(sum.second);
    return report;
}

namespace {

// Column order: recall@k and precision@k along the grid, then the rest.
std::vector<std::string> column_order(const MetricsReport& report) {
    std::set<std::string> all;
    for (const auto& [ds, metrics] : report.per_dataset)
        for (const auto& [metric, value] : metrics)
            all.insert(metric);
    std::vector<std::string> ordered;
    for (const char* family : {"recall@", "precision@"})
        for (const auto k : report.k_grid) {
            const std::string name = family + std::to_string(k);
            if (all.erase(name))
                ordered.push_back(name);
        }
    ordered.insert(ordered.end(), all.begin(), all.end());
    return ordered;
}

std::string format_value(const std::string& metric, double value) {
    char buf[32];
    const bool percent = metric != "accuracy";
    std::snprintf(buf, sizeof(buf), "%.2f", percent ? value * 100.0 : value);
    return buf;
}

} // namespace

std::string report_to_table(const MetricsReport& report) {
    const auto columns = column_order(report);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"dataset"});
    for (const auto& c : columns)
        rows.back().push_back(c);

    auto emit = [&](const std::string& label, const std::map<std::string, double>& values) {
        std::vector<std::string> row{label};
        for (const auto& c : columns) {
            const auto it = values.find(c);
            row.push_back(it == values.end() ? "-" : format_value(c, it->second));
        }
        rows.push_back(std::move(row));
    };
    for (const auto& [ds, metrics] : report.per_dataset)
        emit(ds, metrics);
    emit("micro(all-queries)", report.micro);
    emit("macro(datasets)", report.macro_of_datasets);

    std::vector<std::size_t> widths(columns.size() + 1, 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());

    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0)
                out += "  ";
            const std::size_t pad = widths[i] - row[i].size();
            if (i == 0)
                out += row[i] + std::string(pad, ' ');
            else
                out += std::string(pad, ' ') + row[i];
        }
        out += "\n";
    }
    return out;
}

json report_to_json(const MetricsReport& report) {
    json per_query = json::array();
    for (const auto& q : report.per_query)
        per_query.push_back({{"query_id", q.query_id}, {"dataset", q.dataset}, {"values", q.values}});
    return json{{"k_grid", report.k_grid},
                {"per_query", std::move(per_query)},
                {"per_dataset", report.per_dataset},
                {"micro", report.micro},
                {"macro_of_datasets", report.macro_of_datasets}};
}

namespace {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::io_error, "cannot open " + path.string());
    std::vector<json> lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            lines.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw Error(Errc::bad_config, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return lines;
}

} // namespace

std::vector<RunRecord> load_run(const std::filesystem::path& path) {
    std::vector<RunRecord> out;
    for (const auto& j : read_jsonl(path)) {
        RunRecord r;
        r.query_id = j.at("query_id").get<std::string>();
        r.dataset = j.value("dataset", std::string{});
        r.ranked = j.at("ranked").get<std::vector<std::string>>();
        std::set<std::string> seen;
        for (const auto& id : r.ranked)
            if (!seen.insert(id).second)
                throw Error(Errc::bad_config, "run for query '" + r.query_id + "' ranks '" + id + "' twice");
        out.push_back(std::move(r));
    }
    return out;
}

Qrels load_qrels(const std::filesystem::path& path) {
    Qrels q;
    for (const auto& j : read_jsonl(path)) {
        const auto id = j.at("query_id").get<std::string>();
        const auto relevant = j.at("relevant").get<std::vector<std::string>>();
        q.relevant[id].insert(relevant.begin(), relevant.end());
    }
    return q;
}

std::vector<TraceRecord> load_trace(const std::filesystem::path& path) {
    std::vector<TraceRecord> out;
    std::size_t n = 0;
    for (const auto& j : read_jsonl(path)) {
        TraceRecord r;
        r.query_id = j.value("query_id", "trace-" + std::to_string(n));
        r.dataset = j.value("dataset", std::string{});
        r.query = j.at("query").get<std::string>();
        r.answer = j.at("answer").get<std::string>();
        r.snippets = j.at("snippets").get<std::vector<std::string>>();
        if (j.contains("key_points"))
            r.key_points = j["key_points"].get<std::vector<std::string>>();
        if (j.contains("human_accuracy"))
            r.human_accuracy = j["human_accuracy"].get<double>();
        out.push_back(std::move(r));
        ++n;
    }
    return out;
}

} // namespace drk::eval
