#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragkit/llm.hpp"
#include "ragkit/textprep.hpp"
#include "ragkit/vecstore.hpp"

namespace ragkit::rag {

struct RagParams {
    std::string collection = "default";
    std::size_t top_k = 5;
    std::string embedding_model = "text-embedding-3-small";
    std::string chat_model = "gpt-4o-mini";
    double temperature = 0.0;
    int max_output_tokens = 2000;
    double score_threshold = 0.0;
    std::string system_prompt = "You are a helpful assistant.";
};

struct RagResult {
    std::string answer;
    std::vector<store::SearchHit> hits;
    std::string prompt_final;
    std::string chat_model;
};

struct QaLogEntry {
    std::string qa_id;
    std::string question;
    std::string prompt_final;
    std::string answer_model;
    std::optional<std::string> answer_reference;
    std::string collection;
    std::vector<std::string> retrieved_ids;
    std::vector<std::string> retrieved_texts;
    std::string chat_model;
    std::string embedding_model;
    std::string timestamp;  // UTC ISO-8601

    bool operator==(const QaLogEntry&) const = default;
};

nlohmann::json to_json(const QaLogEntry& entry);
QaLogEntry qa_entry_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RagResult& result);

/// Grounded-generation prompt. Layout is fixed:
///   TASK: RAG_ANSWER / blank / "Context:" / one "[rank] text" line per hit
///   (or "[none]") / blank / "Question: ..." / blank / instruction line.
std::string build_prompt(const std::string& question,
                         const std::vector<store::SearchHit>& hits);

/// Embed the question, retrieve context, build the prompt, generate.
/// Provider failures are annotated with the failing stage ("embed"/"chat").
RagResult query_rag(const std::string& question, const RagParams& params,
                    const store::VectorStore& store,
                    const llm::ProviderConfig& provider,
                    std::optional<long> seed = std::nullopt);

/// Appends one entry to the JSONL QA log and returns it. qa_id defaults to
/// a fresh UUIDv4; a caller-supplied id that already exists in the log is
/// rejected.
QaLogEntry log_rag_interaction(const std::filesystem::path& log_path,
                               const std::string& question,
                               const RagResult& result, const RagParams& params,
                               std::optional<std::string> answer_reference = {},
                               std::optional<std::string> qa_id = {});

/// Parses the whole QA log; an unparseable line aborts with its 1-based
/// line number.
std::vector<QaLogEntry> read_qa_log(const std::filesystem::path& log_path);

struct MergeResult {
    std::size_t updated = 0;
    std::vector<std::string> unmatched;  // CSV qa_ids absent from the log
};

/// Merges `qa_id,answer_reference` CSV rows into the log (atomic rewrite).
MergeResult merge_reference_answers(const std::filesystem::path& log_path,
                                    const std::filesystem::path& csv_path);

// ---------------------------------------------------------------------------
// Ingestion

struct ChunkingParams {
    text::ChunkingStrategy strategy = text::ChunkingStrategy::character;
    std::size_t chunk_size = 3200;
    std::size_t chunk_overlap = 960;
};

struct EmbeddingParams {
    std::string model = "text-embedding-3-small";
    std::size_t batch_size = 128;
    std::size_t max_chars = 8000;
};

struct IngestOptions {
    std::vector<std::string> paths;
    std::string collection = "default";
    ChunkingParams chunking;
    EmbeddingParams embedding;
    bool resume = true;
    std::optional<std::filesystem::path> checkpoint_path;  // default <root>/ingest.ckpt
    std::optional<std::string> extractor_command;
    bool lossy = false;
};

struct FileIngest {
    std::string path;
    std::size_t chunk_count = 0;
    std::string status;  // "ok" | "skipped" | "failed"
    std::string error;   // populated when status == "failed"
};

struct IngestReport {
    std::size_t files_processed = 0;
    std::size_t chunks_written = 0;
    std::size_t chunks_skipped = 0;
    std::size_t embedding_batches = 0;
    bool resumed_from_checkpoint = false;
    std::vector<FileIngest> per_file;
};

nlohmann::json to_json(const IngestReport& report);

/// Settings fingerprint that keys the checkpoint; changing the collection,
/// chunking, or embedding model invalidates resume.
std::string ingest_fingerprint(const IngestOptions& opts);

/// load -> clean -> chunk -> embed (batched) -> upsert, checkpointing after
/// each file. Per-file failures are recorded and do not abort the run;
/// invalid chunking parameters abort before any work.
IngestReport ingest_documents(const IngestOptions& opts, store::VectorStore& store,
                              const llm::ProviderConfig& provider);

}  // namespace ragkit::rag
