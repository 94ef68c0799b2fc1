#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragkit/llm.hpp"
#include "ragkit/ragflow.hpp"

namespace ragkit::eval {

enum class TargetAnswerPolicy { prefer_reference, model_only };

struct EvalConfig {
    long seed = 42;
    std::string judge_chat_model = "gpt-4o-mini";
    std::string embedding_model = "text-embedding-3-small";
    TargetAnswerPolicy policy = TargetAnswerPolicy::prefer_reference;
};

/// Per-interaction metric scores. A null component means the metric could
/// not be computed (degenerate input or judge parse failure); ragas_overall
/// is non-null only when all four components are.
struct MetricsRow {
    std::string qa_id;
    std::optional<double> context_precision;
    std::optional<double> context_recall;
    std::optional<double> faithfulness;
    std::optional<double> answer_relevance;
    std::optional<double> ragas_overall;
    nlohmann::json detail = nlohmann::json::object();
};

/// Judge call: renders a reply for one prompt. Injectable so tests can
/// substitute scripted judges.
using JudgeFn = std::function<std::string(const std::string& prompt)>;
/// Batch embedder preserving input order.
using EmbedFn =
    std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)>;

JudgeFn make_judge(const llm::ProviderConfig& provider, const EvalConfig& cfg);
EmbedFn make_embedder(const llm::ProviderConfig& provider, const EvalConfig& cfg);

/// AP = (sum_k precision@k * v_k) / (sum_k v_k); 0.0 for empty or all-zero
/// verdict lists.
double average_precision(const std::vector<int>& verdicts);

// Judge prompt templates. First line is "TASK: <tag>"; labeled sections
// follow; the final line demands a strict JSON reply.
std::string render_cp_prompt(const std::string& question,
                             const std::string& answer,
                             const std::string& chunk);
std::string render_cr_prompt(const std::string& sentence,
                             const std::string& context);
std::string render_ff_decompose_prompt(const std::string& answer);
std::string render_ff_verify_prompt(const std::string& statement,
                                    const std::string& context);
std::string render_ar_prompt(const std::string& answer);

/// Retrieved chunks joined with blank lines, in retrieval order.
std::string concatenate_context(const rag::QaLogEntry& entry);

struct CpResult {
    std::optional<double> score;
    std::vector<int> verdicts;
    std::string failure;
};
CpResult score_context_precision(const rag::QaLogEntry& entry,
                                 const EvalConfig& cfg, const JudgeFn& judge);

struct CrResult {
    std::optional<double> score;
    std::vector<std::string> sentences;
    std::vector<int> verdicts;
    std::string failure;
};
CrResult score_context_recall(const rag::QaLogEntry& entry, const EvalConfig& cfg,
                              const JudgeFn& judge);

struct FfResult {
    std::optional<double> score;
    std::vector<std::string> statements;
    std::vector<int> verdicts;
    std::string failure;
};
FfResult score_faithfulness(const rag::QaLogEntry& entry, const EvalConfig& cfg,
                            const JudgeFn& judge);

struct ArResult {
    std::optional<double> score;
    std::vector<std::string> reverse_questions;
    std::string failure;
};
ArResult score_answer_relevance(const rag::QaLogEntry& entry,
                                const EvalConfig& cfg, const JudgeFn& judge,
                                const EmbedFn& embedder);

MetricsRow score_entry(const rag::QaLogEntry& entry, const EvalConfig& cfg,
                       const JudgeFn& judge, const EmbedFn& embedder);

/// One MetricsRow per log entry, in log order.
std::vector<MetricsRow> compute_ragas_metrics(const std::filesystem::path& log_path,
                                              const EvalConfig& cfg,
                                              const llm::ProviderConfig& provider);

/// Header: qa_id,context_precision,context_recall,faithfulness,
/// answer_relevance,ragas_overall. Nulls serialize as empty fields.
void write_metrics_csv(const std::vector<MetricsRow>& rows,
                       const std::filesystem::path& path);
std::string metrics_csv_string(const std::vector<MetricsRow>& rows);

/// JSONL sidecar preserving per-metric verdict payloads keyed by qa_id.
void write_metrics_detail(const std::vector<MetricsRow>& rows,
                          const std::filesystem::path& path);

nlohmann::json to_json(const MetricsRow& row, bool include_detail = false);

}  // namespace ragkit::eval
