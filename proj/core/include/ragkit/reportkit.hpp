#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ragkit/llm.hpp"
#include "ragkit/ragas.hpp"
#include "ragkit/ragflow.hpp"

namespace ragkit::report {

/// Sample Pearson correlation. Throws degenerate_series for length < 2 or
/// a constant series; unequal lengths are invalid_argument.
double pearson(std::span<const double> x, std::span<const double> y);

struct MetricSummary {
    int chunk_size = 0;  // 0 outside a sweep context
    std::string metric;
    std::optional<double> mean;  // null when no scores were pooled
    double sd = 0.0;             // sample (n-1) standard deviation; 0 when n <= 1
    std::size_t n = 0;           // non-null scores pooled
    std::size_t nulls = 0;       // scores excluded as null
};

/// Metric names in canonical column order.
const std::vector<std::string>& metric_names();

/// Pools non-null scores per metric across all entries and runs.
std::vector<MetricSummary> summarize_runs(
    const std::vector<std::vector<eval::MetricsRow>>& runs);

struct SweepConfig {
    std::vector<int> chunk_sizes = {400, 800, 1600, 3200};
    double overlap_fraction = 0.30;
    std::filesystem::path questions_path;
    int repeats = 3;
    rag::RagParams params;        // held constant across the sweep
    eval::EvalConfig eval_cfg;    // held constant across the sweep
    std::filesystem::path output_root = "sweeps";
};

/// One question per line, UTF-8; '#'-prefixed lines and blanks ignored.
std::vector<std::string> read_questions(const std::filesystem::path& path);

/// For each chunk size: ingest the corpus into collection sweep_<size>
/// (overlap = round(overlap_fraction * size)), answer and log every
/// question with deterministic qa_ids, score the log `repeats` times, and
/// write per-size logs, per-repeat metric CSVs, and a pooled summary CSV
/// under a timestamped artifact directory. Returns that directory.
std::filesystem::path run_chunk_sweep(const SweepConfig& cfg,
                                      const std::vector<std::string>& corpus_paths,
                                      const std::filesystem::path& store_root,
                                      const llm::ProviderConfig& provider);

/// Summary CSV: header chunk_size,metric,mean,sd,n.
void write_summary_csv(const std::vector<MetricSummary>& summaries,
                       const std::filesystem::path& path);
std::vector<MetricSummary> read_summary_csv(const std::filesystem::path& path);

struct CorrelationRow {
    std::string metric;
    std::optional<double> r;  // null for degenerate series
};

/// Per-metric Pearson r between two summaries' mean series indexed by chunk
/// size. Both files must cover identical chunk-size and metric grids.
std::vector<CorrelationRow> correlate_against(const std::filesystem::path& summary_a,
                                              const std::filesystem::path& summary_b);

/// Correlation CSV: header metric,correlation; null r as empty field.
void write_correlation_csv(const std::vector<CorrelationRow>& rows,
                           const std::filesystem::path& path);

}  // namespace ragkit::report
