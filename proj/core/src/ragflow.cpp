#include "ragkit/ragflow.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ragkit/csv.hpp"
#include "ragkit/errors.hpp"
#include "ragkit/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ragkit::rag {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RagError(ErrorCode::missing_file, "no such file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw RagError(ErrorCode::io_failure, "cannot write " + tmp.string());
        }
        out << contents;
        out.flush();
        if (!out) {
            throw RagError(ErrorCode::io_failure, "write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw RagError(ErrorCode::io_failure,
                       "rename failed: " + path.string() + ": " + ec.message());
    }
}

template <typename Fn>
auto annotate_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (ProviderError& e) {
        ProviderError annotated(e.status(),
                               std::string(stage) + " stage: " + e.what(),
                               e.retryable());
        annotated.set_attempts(e.attempts());
        annotated.set_stage(stage);
        throw annotated;
    }
}

}  // namespace

json to_json(const QaLogEntry& entry) {
    json j;
    j["qa_id"] = entry.qa_id;
    j["question"] = entry.question;
    j["prompt_final"] = entry.prompt_final;
    j["answer_model"] = entry.answer_model;
    j["answer_reference"] =
        entry.answer_reference ? json(*entry.answer_reference) : json(nullptr);
    j["collection"] = entry.collection;
    j["retrieved_ids"] = entry.retrieved_ids;
    j["retrieved_texts"] = entry.retrieved_texts;
    j["chat_model"] = entry.chat_model;
    j["embedding_model"] = entry.embedding_model;
    j["timestamp"] = entry.timestamp;
    return j;
}

QaLogEntry qa_entry_from_json(const json& j) {
    QaLogEntry e;
    e.qa_id = j.at("qa_id").get<std::string>();
    e.question = j.at("question").get<std::string>();
    e.prompt_final = j.at("prompt_final").get<std::string>();
    e.answer_model = j.at("answer_model").get<std::string>();
    if (j.contains("answer_reference") && !j["answer_reference"].is_null()) {
        e.answer_reference = j["answer_reference"].get<std::string>();
    }
    e.collection = j.at("collection").get<std::string>();
    e.retrieved_ids = j.at("retrieved_ids").get<std::vector<std::string>>();
    e.retrieved_texts = j.at("retrieved_texts").get<std::vector<std::string>>();
    if (e.retrieved_ids.size() != e.retrieved_texts.size()) {
        throw RagError(ErrorCode::malformed_log,
                       "retrieved_ids and retrieved_texts lengths differ");
    }
    e.chat_model = j.at("chat_model").get<std::string>();
    e.embedding_model = j.at("embedding_model").get<std::string>();
    e.timestamp = j.at("timestamp").get<std::string>();
    return e;
}

json to_json(const RagResult& result) {
    json hits = json::array();
    for (const auto& h : result.hits) {
        hits.push_back({{"chunk_id", h.chunk_id},
                        {"score", h.score},
                        {"rank", h.rank},
                        {"text", h.text}});
    }
    return {{"answer", result.answer},
            {"hits", hits},
            {"prompt_final", result.prompt_final},
            {"chat_model", result.chat_model}};
}

std::string build_prompt(const std::string& question,
                         const std::vector<store::SearchHit>& hits) {
    std::string p = "TASK: RAG_ANSWER\n\nContext:\n";
    if (hits.empty()) {
        p += "[none]\n";
    } else {
        for (const auto& h : hits) {
            p += "[" + std::to_string(h.rank) + "] " + h.text + "\n";
        }
    }
    p += "\nQuestion: " + question + "\n\n";
    p += "Answer using only the context above. If the context is insufficient, "
         "say so.";
    return p;
}

RagResult query_rag(const std::string& question, const RagParams& params,
                    const store::VectorStore& store,
                    const llm::ProviderConfig& provider,
                    std::optional<long> seed) {
    if (util::trim(question).empty()) {
        throw RagError(ErrorCode::invalid_argument, "question must be non-empty");
    }
    if (params.top_k == 0) {
        throw RagError(ErrorCode::invalid_argument, "top_k must be positive");
    }

    llm::EmbeddingBatch batch;
    batch.texts = {question};
    batch.model = params.embedding_model;
    auto embedded = annotate_stage("embed", [&] {
        return llm::embed_texts(provider, batch);
    });

    auto hits = store.search(params.collection, embedded.vectors.front(),
                             params.top_k, params.score_threshold);

    RagResult result;
    result.prompt_final = build_prompt(question, hits);
    result.hits = std::move(hits);
    result.chat_model = params.chat_model;

    llm::ProviderConfig chat_cfg = provider;
    chat_cfg.chat_model = params.chat_model;
    llm::ChatRequest req;
    req.system_prompt = params.system_prompt;
    req.user_prompt = result.prompt_final;
    req.temperature = params.temperature;
    req.max_output_tokens = params.max_output_tokens;
    req.seed = seed;
    result.answer = annotate_stage("chat", [&] {
        return llm::chat_complete(chat_cfg, req);
    });
    return result;
}

QaLogEntry log_rag_interaction(const fs::path& log_path,
                               const std::string& question,
                               const RagResult& result, const RagParams& params,
                               std::optional<std::string> answer_reference,
                               std::optional<std::string> qa_id) {
    QaLogEntry entry;
    entry.qa_id = qa_id ? *qa_id : util::uuid4();
    entry.question = question;
    entry.prompt_final = result.prompt_final;
    entry.answer_model = result.answer;
    entry.answer_reference = std::move(answer_reference);
    entry.collection = params.collection;
    for (const auto& h : result.hits) {
        entry.retrieved_ids.push_back(h.chunk_id);
        entry.retrieved_texts.push_back(h.text);
    }
    entry.chat_model = result.chat_model;
    entry.embedding_model = params.embedding_model;
    entry.timestamp = util::now_utc_iso8601();

    std::error_code ec;
    if (qa_id && fs::exists(log_path, ec)) {
        for (const auto& existing : read_qa_log(log_path)) {
            if (existing.qa_id == entry.qa_id) {
                throw RagError(ErrorCode::duplicate_qa_id,
                               "qa_id already logged: " + entry.qa_id);
            }
        }
    }
    if (log_path.has_parent_path()) {
        fs::create_directories(log_path.parent_path(), ec);
    }
    std::ofstream out(log_path, std::ios::binary | std::ios::app);
    if (!out) {
        throw RagError(ErrorCode::io_failure,
                       "cannot append to " + log_path.string());
    }
    out << to_json(entry).dump() << '\n';
    out.flush();
    if (!out) {
        throw RagError(ErrorCode::io_failure, "append failed: " + log_path.string());
    }
    return entry;
}

std::vector<QaLogEntry> read_qa_log(const fs::path& log_path) {
    std::error_code ec;
    if (!fs::exists(log_path, ec)) {
        throw RagError(ErrorCode::missing_file,
                       "no such file: " + log_path.string());
    }
    std::ifstream in(log_path, std::ios::binary);
    std::vector<QaLogEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        try {
            entries.push_back(qa_entry_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw RagError(ErrorCode::malformed_log,
                           log_path.string() + ":" + std::to_string(line_no) +
                               ": " + e.what());
        }
    }
    return entries;
}

MergeResult merge_reference_answers(const fs::path& log_path,
                                    const fs::path& csv_path) {
    auto rows = csv::parse(read_file(csv_path));
    if (rows.empty()) {
        throw RagError(ErrorCode::malformed_csv, "reference CSV is empty");
    }
    const auto& header = rows.front();
    std::size_t id_col = header.size(), ref_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "qa_id") id_col = i;
        if (header[i] == "answer_reference") ref_col = i;
    }
    if (id_col >= header.size() || ref_col >= header.size()) {
        throw RagError(ErrorCode::malformed_csv,
                       "reference CSV must have qa_id and answer_reference "
                       "columns");
    }

    auto entries = read_qa_log(log_path);
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        by_id[entries[i].qa_id] = i;
    }

    MergeResult result;
    std::set<std::size_t> touched;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() <= std::max(id_col, ref_col)) {
            throw RagError(ErrorCode::malformed_csv,
                           "row " + std::to_string(r + 1) + " has too few fields");
        }
        const std::string& id = row[id_col];
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            result.unmatched.push_back(id);
            continue;
        }
        entries[it->second].answer_reference = row[ref_col];
        touched.insert(it->second);
    }
    result.updated = touched.size();

    std::string contents;
    for (const auto& e : entries) {
        contents += to_json(e).dump();
        contents += '\n';
    }
    atomic_write(log_path, contents);
    return result;
}

// ---------------------------------------------------------------------------
// Ingestion

json to_json(const IngestReport& report) {
    json per_file = json::array();
    for (const auto& f : report.per_file) {
        json item = {{"path", f.path},
                     {"chunk_count", f.chunk_count},
                     {"status", f.status}};
        if (!f.error.empty()) item["error"] = f.error;
        per_file.push_back(std::move(item));
    }
    return {{"files_processed", report.files_processed},
            {"chunks_written", report.chunks_written},
            {"chunks_skipped", report.chunks_skipped},
            {"embedding_batches", report.embedding_batches},
            {"resumed_from_checkpoint", report.resumed_from_checkpoint},
            {"per_file", per_file}};
}

std::string ingest_fingerprint(const IngestOptions& opts) {
    std::string key = opts.collection;
    key += '\x1f';
    key += text::strategy_name(opts.chunking.strategy);
    key += '\x1f';
    key += std::to_string(opts.chunking.chunk_size);
    key += '\x1f';
    key += std::to_string(opts.chunking.chunk_overlap);
    key += '\x1f';
    key += opts.embedding.model;
    return util::hex64(util::fnv1a64(key));
}

namespace {

struct Checkpoint {
    std::string fingerprint;
    std::set<std::string> completed;
};

Checkpoint load_checkpoint(const fs::path& path) {
    Checkpoint ckpt;
    std::error_code ec;
    if (!fs::exists(path, ec)) return ckpt;
    try {
        json j = json::parse(read_file(path));
        ckpt.fingerprint = j.at("fingerprint").get<std::string>();
        for (const auto& p : j.at("completed")) {
            ckpt.completed.insert(p.get<std::string>());
        }
    } catch (const std::exception&) {
        // Unreadable checkpoints are ignored; ingestion starts fresh.
        ckpt = Checkpoint{};
    }
    return ckpt;
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
    json j = {{"fingerprint", ckpt.fingerprint},
              {"completed", std::vector<std::string>(ckpt.completed.begin(),
                                                     ckpt.completed.end())}};
    atomic_write(path, j.dump(2) + "\n");
}

}  // namespace

IngestReport ingest_documents(const IngestOptions& opts, store::VectorStore& store,
                              const llm::ProviderConfig& provider) {
    if (opts.paths.empty()) {
        throw RagError(ErrorCode::invalid_argument, "ingest: no input paths");
    }
    if (opts.chunking.strategy == text::ChunkingStrategy::character &&
        (opts.chunking.chunk_size == 0 ||
         opts.chunking.chunk_overlap >= opts.chunking.chunk_size)) {
        throw RagError(ErrorCode::invalid_chunking,
                       "chunk_overlap must be smaller than chunk_size");
    }
    if (!store.writable()) {
        throw RagError(ErrorCode::not_writable, "store opened read-only");
    }

    fs::path ckpt_path =
        opts.checkpoint_path ? *opts.checkpoint_path : store.root() / "ingest.ckpt";
    std::string fingerprint = ingest_fingerprint(opts);

    Checkpoint ckpt;
    IngestReport report;
    if (opts.resume) {
        ckpt = load_checkpoint(ckpt_path);
        if (ckpt.fingerprint == fingerprint) {
            report.resumed_from_checkpoint = true;
        } else {
            ckpt = Checkpoint{};  // settings changed: resume is invalid
        }
    }
    ckpt.fingerprint = fingerprint;

    text::LoadOptions load_opts;
    load_opts.extractor_command = opts.extractor_command;
    load_opts.lossy = opts.lossy;

    for (const auto& path : opts.paths) {
        FileIngest file;
        file.path = path;
        if (ckpt.completed.count(path)) {
            file.status = "skipped";
            report.per_file.push_back(std::move(file));
            continue;
        }
        try {
            auto doc = text::load_document(path, load_opts);
            auto spans = text::chunk_document(doc, opts.chunking.strategy,
                                              opts.chunking.chunk_size,
                                              opts.chunking.chunk_overlap);
            file.chunk_count = spans.size();

            if (!spans.empty()) {
                llm::EmbeddingBatch batch;
                batch.model = opts.embedding.model;
                batch.batch_size = opts.embedding.batch_size;
                batch.max_chars = opts.embedding.max_chars;
                for (const auto& span : spans) batch.texts.push_back(span.text);
                auto embedded = annotate_stage("embed", [&] {
                    return llm::embed_texts(provider, batch);
                });
                report.embedding_batches += embedded.batches;

                std::string created_at = util::now_utc_iso8601();
                std::vector<store::ChunkRecord> records;
                records.reserve(spans.size());
                for (std::size_t i = 0; i < spans.size(); ++i) {
                    store::ChunkRecord rec;
                    rec.collection = opts.collection;
                    rec.chunk_id = store::make_chunk_id(
                        path, static_cast<std::int64_t>(spans[i].index));
                    rec.text = spans[i].text;
                    rec.embedding = std::move(embedded.vectors[i]);
                    rec.source_path = path;
                    rec.source_index = static_cast<std::int64_t>(spans[i].index);
                    rec.start = spans[i].start;
                    rec.end = spans[i].end;
                    rec.created_at = created_at;
                    rec.embedding_model = opts.embedding.model;
                    records.push_back(std::move(rec));
                }
                report.chunks_written += store.upsert(records);
            }
            file.status = "ok";
            ++report.files_processed;
            ckpt.completed.insert(path);
            save_checkpoint(ckpt_path, ckpt);
        } catch (const RagError& e) {
            file.status = "failed";
            file.error = e.what();
            report.chunks_skipped += file.chunk_count;
        }
        report.per_file.push_back(std::move(file));
    }
    return report;
}

}  // namespace ragkit::rag
