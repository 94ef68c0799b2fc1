// ragkit command-line interface: ingest, query, merge-refs, eval, sweep,
// correlate, collections, serve.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ragkit/errors.hpp"
#include "ragkit/llm.hpp"
#include "ragkit/ragas.hpp"
#include "ragkit/ragflow.hpp"
#include "ragkit/reportkit.hpp"
#include "ragkit/service.hpp"
#include "ragkit/textprep.hpp"
#include "ragkit/util.hpp"
#include "ragkit/vecstore.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ProviderFlags {
    std::string kind = "mock";
    std::string base_url;
    std::string api_key_env = "RAGKIT_API_KEY";
    std::string embedding_model = "text-embedding-3-small";
    std::string chat_model = "gpt-4o-mini";
    double timeout = 30.0;
    int max_retries = 5;
    bool no_retry = false;

    ragkit::llm::ProviderConfig to_config() const {
        ragkit::llm::ProviderConfig cfg;
        cfg.kind = ragkit::llm::parse_provider(kind);
        cfg.base_url = base_url;
        cfg.api_key_env = api_key_env;
        cfg.embedding_model = embedding_model;
        cfg.chat_model = chat_model;
        cfg.timeout_seconds = timeout;
        cfg.max_retries = max_retries;
        cfg.retry = !no_retry;
        return cfg;
    }
};

void add_provider_flags(CLI::App* cmd, ProviderFlags& flags) {
    cmd->add_option("--provider", flags.kind, "Provider kind: mock or remote")
        ->check(CLI::IsMember({"mock", "remote"}))
        ->capture_default_str();
    cmd->add_option("--base-url", flags.base_url,
                    "Remote provider base URL, e.g. http://host:port/v1");
    cmd->add_option("--api-key-env", flags.api_key_env,
                    "Environment variable holding the API key")
        ->capture_default_str();
    cmd->add_option("--embedding-model", flags.embedding_model, "Embedding model")
        ->capture_default_str();
    cmd->add_option("--chat-model", flags.chat_model, "Chat model")
        ->capture_default_str();
    cmd->add_option("--timeout", flags.timeout, "Request timeout in seconds")
        ->capture_default_str();
    cmd->add_option("--max-retries", flags.max_retries,
                    "Retries for retryable provider failures")
        ->capture_default_str();
    cmd->add_flag("--no-retry", flags.no_retry, "Disable retries");
}

void print_hits(const std::vector<ragkit::store::SearchHit>& hits) {
    if (hits.empty()) {
        std::cout << "(no hits)\n";
        return;
    }
    for (const auto& h : hits) {
        std::string preview = h.text.substr(0, 76);
        if (h.text.size() > 76) preview += "...";
        for (char& c : preview) {
            if (c == '\n') c = ' ';
        }
        std::printf("%3zu  %-24s %8.4f  %s\n", h.rank, h.chunk_id.c_str(),
                    h.score, preview.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAG pipeline toolkit: ingestion, retrieval-grounded "
                 "generation, QA logging, and LLM-judged evaluation"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "Machine-readable JSON output");

    // ---- ingest -----------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Chunk, embed, and store documents");
    std::vector<std::string> ingest_paths;
    std::string store_root = "store";
    std::string collection = "default";
    std::string strategy = "character";
    std::size_t chunk_size = 3200;
    std::optional<std::size_t> chunk_overlap;
    std::size_t batch_size = 128;
    std::size_t max_chars = 8000;
    bool no_resume = false;
    std::string checkpoint;
    std::string extractor;
    bool lossy = false;
    ProviderFlags ingest_provider;
    ingest->add_option("paths", ingest_paths, "Input files (.txt/.md/.pdf)")
        ->required();
    ingest->add_option("--store", store_root, "Vector store directory")
        ->capture_default_str();
    ingest->add_option("--collection", collection, "Target collection")
        ->capture_default_str();
    ingest->add_option("--chunking-strategy", strategy, "character or sentence")
        ->check(CLI::IsMember({"character", "sentence"}))
        ->capture_default_str();
    ingest->add_option("--chunk-size", chunk_size, "Chunk size in characters")
        ->capture_default_str();
    ingest->add_option("--chunk-overlap", chunk_overlap,
                       "Overlap in characters (default: round(0.30 * size))");
    ingest->add_option("--embedding-batch-size", batch_size,
                       "Texts per embedding request")
        ->capture_default_str();
    ingest->add_option("--embedding-max-chars", max_chars,
                       "Per-text truncation before embedding")
        ->capture_default_str();
    ingest->add_flag("--no-resume", no_resume, "Ignore the ingest checkpoint");
    ingest->add_option("--checkpoint", checkpoint, "Checkpoint path");
    ingest->add_option("--extractor", extractor,
                       "PDF extractor command (run as `<command> <path>`)");
    ingest->add_flag("--lossy", lossy,
                     "Replace invalid UTF-8 in plain-text files");
    add_provider_flags(ingest, ingest_provider);

    // ---- query ------------------------------------------------------------
    auto* query = app.add_subcommand("query", "Answer a question over a collection");
    std::string question;
    std::string q_store = "store";
    std::string q_collection = "default";
    std::size_t top_k = 5;
    double score_threshold = 0.0;
    double temperature = 0.0;
    int max_output_tokens = 2000;
    std::string system_prompt = "You are a helpful assistant.";
    std::optional<long> seed;
    std::string log_path;
    std::string qa_id;
    std::string reference;
    ProviderFlags query_provider;
    query->add_option("--question", question, "Question text")->required();
    query->add_option("--store", q_store, "Vector store directory")
        ->capture_default_str();
    query->add_option("--collection", q_collection, "Collection to search")
        ->capture_default_str();
    query->add_option("--top-k", top_k, "Chunks to retrieve")->capture_default_str();
    query->add_option("--score-threshold", score_threshold,
                      "Drop hits scoring below this after top-k")
        ->capture_default_str();
    query->add_option("--temperature", temperature, "Chat temperature")
        ->capture_default_str();
    query->add_option("--max-output-tokens", max_output_tokens,
                      "Chat completion token cap")
        ->capture_default_str();
    query->add_option("--system-prompt", system_prompt, "System prompt")
        ->capture_default_str();
    query->add_option("--seed", seed, "Seed forwarded to the provider");
    query->add_option("--log", log_path, "Append the interaction to this QA log");
    query->add_option("--qa-id", qa_id, "Explicit qa_id for the log entry");
    query->add_option("--reference", reference,
                      "Reference answer recorded with the log entry");
    add_provider_flags(query, query_provider);

    // ---- merge-refs -------------------------------------------------------
    auto* merge = app.add_subcommand(
        "merge-refs", "Merge reference answers from CSV into a QA log");
    std::string merge_log, merge_csv;
    merge->add_option("--log", merge_log, "QA log path")->required();
    merge->add_option("--csv", merge_csv,
                      "CSV with header qa_id,answer_reference")
        ->required();

    // ---- eval -------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "Score a QA log with the four "
                                                "LLM-judged metrics");
    std::string eval_log;
    long eval_seed = 42;
    std::string judge_model = "gpt-4o-mini";
    std::string eval_embedding_model = "text-embedding-3-small";
    std::string policy = "prefer_reference";
    std::string metrics_out, detail_out;
    ProviderFlags eval_provider;
    eval_cmd->add_option("--log", eval_log, "QA log path")->required();
    eval_cmd->add_option("--seed", eval_seed, "Judge seed")->capture_default_str();
    eval_cmd->add_option("--judge-model", judge_model, "Judge chat model")
        ->capture_default_str();
    eval_cmd
        ->add_option("--eval-embedding-model", eval_embedding_model,
                     "Embedding model for answer relevance")
        ->capture_default_str();
    eval_cmd->add_option("--policy", policy, "Target answer policy")
        ->check(CLI::IsMember({"prefer_reference", "model_only"}))
        ->capture_default_str();
    eval_cmd->add_option("--out", metrics_out, "Write metrics CSV here");
    eval_cmd->add_option("--detail", detail_out, "Write verdict detail JSONL here");
    add_provider_flags(eval_cmd, eval_provider);

    // ---- sweep ------------------------------------------------------------
    auto* sweep = app.add_subcommand(
        "sweep", "Chunk-size sweep: ingest, answer, and score per size");
    std::vector<std::string> sweep_corpus;
    std::string sweep_store = "store";
    std::string questions_path;
    std::vector<int> chunk_sizes = {400, 800, 1600, 3200};
    double overlap_fraction = 0.30;
    int repeats = 3;
    std::string sweep_out = "sweeps";
    long sweep_seed = 42;
    std::size_t sweep_top_k = 5;
    ProviderFlags sweep_provider;
    sweep->add_option("paths", sweep_corpus, "Corpus files")->required();
    sweep->add_option("--store", sweep_store, "Vector store directory")
        ->capture_default_str();
    sweep->add_option("--questions", questions_path,
                      "Questions file (one per line, # comments)")
        ->required();
    sweep->add_option("--chunk-sizes", chunk_sizes, "Chunk sizes to sweep")
        ->capture_default_str();
    sweep->add_option("--overlap-fraction", overlap_fraction,
                      "Overlap as a fraction of chunk size")
        ->capture_default_str();
    sweep->add_option("--repeats", repeats, "Scoring repetitions per size")
        ->capture_default_str();
    sweep->add_option("--out", sweep_out, "Artifact output root")
        ->capture_default_str();
    sweep->add_option("--seed", sweep_seed, "Judge seed")->capture_default_str();
    sweep->add_option("--top-k", sweep_top_k, "Chunks to retrieve per question")
        ->capture_default_str();
    add_provider_flags(sweep, sweep_provider);

    // ---- correlate --------------------------------------------------------
    auto* correlate = app.add_subcommand(
        "correlate", "Pearson correlation between two sweep summaries");
    std::string summary_a, summary_b, correlate_out;
    correlate->add_option("--a", summary_a, "First summary CSV")->required();
    correlate->add_option("--b", summary_b, "Second summary CSV")->required();
    correlate->add_option("--out", correlate_out, "Write correlation CSV here");

    // ---- collections ------------------------------------------------------
    auto* collections = app.add_subcommand("collections", "List store collections");
    std::string c_store = "store";
    collections->add_option("--store", c_store, "Vector store directory")
        ->capture_default_str();

    // ---- serve ------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string bind = "127.0.0.1:8080";
    std::string serve_store;
    std::string logs_root;
    std::string config_path;
    std::optional<std::size_t> max_request_bytes;
    ProviderFlags serve_provider;
    serve->add_option("--bind", bind, "host:port")->capture_default_str();
    serve->add_option("--store", serve_store, "Vector store directory");
    serve->add_option("--logs-root", logs_root,
                      "Directory that /evaluate log paths must live under");
    serve->add_option("--config", config_path, "JSON service config file");
    serve->add_option("--max-request-bytes", max_request_bytes,
                      "Reject larger request bodies with 413");
    add_provider_flags(serve, serve_provider);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    try {
        if (*ingest) {
            auto store = ragkit::store::VectorStore::open(
                store_root, ragkit::store::OpenMode::read_write);
            ragkit::rag::IngestOptions opts;
            opts.paths = ingest_paths;
            opts.collection = collection;
            opts.chunking.strategy = ragkit::text::parse_strategy(strategy);
            opts.chunking.chunk_size = chunk_size;
            opts.chunking.chunk_overlap =
                chunk_overlap ? *chunk_overlap
                              : static_cast<std::size_t>(
                                    std::lround(0.30 * static_cast<double>(chunk_size)));
            opts.embedding.model = ingest_provider.embedding_model;
            opts.embedding.batch_size = batch_size;
            opts.embedding.max_chars = max_chars;
            opts.resume = !no_resume;
            if (!checkpoint.empty()) opts.checkpoint_path = checkpoint;
            if (!extractor.empty()) opts.extractor_command = extractor;
            opts.lossy = lossy;
            auto report = ragkit::rag::ingest_documents(opts, store,
                                                        ingest_provider.to_config());
            if (as_json) {
                std::cout << ragkit::rag::to_json(report).dump(2) << '\n';
            } else {
                std::cout << "files processed: " << report.files_processed
                          << "\nchunks written: " << report.chunks_written
                          << "\nembedding batches: " << report.embedding_batches
                          << "\nresumed from checkpoint: "
                          << (report.resumed_from_checkpoint ? "yes" : "no") << '\n';
                for (const auto& f : report.per_file) {
                    std::cout << "  " << f.path << ": " << f.status;
                    if (!f.error.empty()) std::cout << " (" << f.error << ")";
                    std::cout << " [" << f.chunk_count << " chunks]\n";
                }
            }
            bool any_failed = false;
            for (const auto& f : report.per_file) {
                if (f.status == "failed") any_failed = true;
            }
            return any_failed ? 1 : 0;
        }

        if (*query) {
            auto store = ragkit::store::VectorStore::open(
                q_store, ragkit::store::OpenMode::read_only);
            ragkit::rag::RagParams params;
            params.collection = q_collection;
            params.top_k = top_k;
            params.embedding_model = query_provider.embedding_model;
            params.chat_model = query_provider.chat_model;
            params.temperature = temperature;
            params.max_output_tokens = max_output_tokens;
            params.score_threshold = score_threshold;
            params.system_prompt = system_prompt;
            auto result = ragkit::rag::query_rag(question, params, store,
                                                 query_provider.to_config(), seed);
            if (!log_path.empty()) {
                ragkit::rag::log_rag_interaction(
                    log_path, question, result, params,
                    reference.empty() ? std::nullopt
                                      : std::optional<std::string>(reference),
                    qa_id.empty() ? std::nullopt
                                  : std::optional<std::string>(qa_id));
            }
            if (as_json) {
                std::cout << ragkit::rag::to_json(result).dump() << '\n';
            } else {
                std::cout << result.answer << "\n\n";
                print_hits(result.hits);
            }
            return 0;
        }

        if (*merge) {
            auto result = ragkit::rag::merge_reference_answers(merge_log, merge_csv);
            if (as_json) {
                std::cout << json{{"updated", result.updated},
                                  {"unmatched", result.unmatched}}
                                 .dump()
                          << '\n';
            } else {
                std::cout << "updated: " << result.updated << '\n';
                for (const auto& id : result.unmatched) {
                    std::cout << "unmatched: " << id << '\n';
                }
            }
            return 0;
        }

        if (*eval_cmd) {
            ragkit::eval::EvalConfig cfg;
            cfg.seed = eval_seed;
            cfg.judge_chat_model = judge_model;
            cfg.embedding_model = eval_embedding_model;
            cfg.policy = policy == "model_only"
                             ? ragkit::eval::TargetAnswerPolicy::model_only
                             : ragkit::eval::TargetAnswerPolicy::prefer_reference;
            auto rows = ragkit::eval::compute_ragas_metrics(
                eval_log, cfg, eval_provider.to_config());
            if (!metrics_out.empty()) {
                ragkit::eval::write_metrics_csv(rows, metrics_out);
            }
            if (!detail_out.empty()) {
                ragkit::eval::write_metrics_detail(rows, detail_out);
            }
            if (as_json) {
                json out = json::array();
                for (const auto& row : rows) {
                    out.push_back(ragkit::eval::to_json(row));
                }
                std::cout << json{{"rows", out}}.dump(2) << '\n';
            } else {
                std::cout << ragkit::eval::metrics_csv_string(rows);
            }
            return 0;
        }

        if (*sweep) {
            ragkit::report::SweepConfig cfg;
            cfg.chunk_sizes = chunk_sizes;
            cfg.overlap_fraction = overlap_fraction;
            cfg.questions_path = questions_path;
            cfg.repeats = repeats;
            cfg.output_root = sweep_out;
            cfg.params.top_k = sweep_top_k;
            cfg.params.embedding_model = sweep_provider.embedding_model;
            cfg.params.chat_model = sweep_provider.chat_model;
            cfg.eval_cfg.seed = sweep_seed;
            cfg.eval_cfg.judge_chat_model = sweep_provider.chat_model;
            cfg.eval_cfg.embedding_model = sweep_provider.embedding_model;
            auto artifact = ragkit::report::run_chunk_sweep(
                cfg, sweep_corpus, sweep_store, sweep_provider.to_config());
            if (as_json) {
                std::cout << json{{"artifact_dir", artifact.string()}}.dump() << '\n';
            } else {
                std::cout << "artifacts: " << artifact.string() << '\n';
            }
            return 0;
        }

        if (*correlate) {
            auto rows = ragkit::report::correlate_against(summary_a, summary_b);
            if (!correlate_out.empty()) {
                ragkit::report::write_correlation_csv(rows, correlate_out);
            }
            if (as_json) {
                json out = json::array();
                for (const auto& row : rows) {
                    out.push_back({{"metric", row.metric},
                                   {"correlation",
                                    row.r ? json(*row.r) : json(nullptr)}});
                }
                std::cout << out.dump(2) << '\n';
            } else {
                std::cout << "metric,correlation\n";
                for (const auto& row : rows) {
                    std::cout << row.metric << ','
                              << (row.r ? ragkit::util::format_double(*row.r) : "")
                              << '\n';
                }
            }
            return 0;
        }

        if (*collections) {
            auto store = ragkit::store::VectorStore::open(
                c_store, ragkit::store::OpenMode::read_only);
            auto infos = store.collections();
            if (as_json) {
                json out = json::array();
                for (const auto& c : infos) {
                    out.push_back({{"name", c.name},
                                   {"record_count", c.record_count},
                                   {"dimension", c.dimension},
                                   {"embedding_model", c.embedding_model}});
                }
                std::cout << out.dump(2) << '\n';
            } else {
                for (const auto& c : infos) {
                    std::cout << c.name << "  records=" << c.record_count
                              << "  dim=" << c.dimension << "  model="
                              << c.embedding_model << '\n';
                }
            }
            return 0;
        }

        if (*serve) {
            ragkit::service::ServiceConfig cfg;
            if (!config_path.empty()) {
                cfg = ragkit::service::load_service_config(config_path);
            }
            if (serve->count("--bind") || config_path.empty()) {
                auto colon = bind.rfind(':');
                if (colon == std::string::npos) {
                    throw ragkit::RagError(ragkit::ErrorCode::invalid_argument,
                                           "--bind must be host:port");
                }
                cfg.bind_host = bind.substr(0, colon);
                cfg.bind_port = std::stoi(bind.substr(colon + 1));
            }
            if (!serve_store.empty()) cfg.store_root = serve_store;
            if (!logs_root.empty()) cfg.logs_root = logs_root;
            if (max_request_bytes) cfg.max_request_bytes = *max_request_bytes;
            if (serve->count("--provider") || config_path.empty()) {
                cfg.provider = serve_provider.to_config();
            }
            if (cfg.store_root.empty()) {
                throw ragkit::RagError(ragkit::ErrorCode::invalid_argument,
                                       "--store (or store_root in --config) is "
                                       "required");
            }
            ragkit::service::Service service(cfg);
            int port = service.bind();
            std::cout << "listening on " << cfg.bind_host << ':' << port << '\n';
            service.serve();
            return 0;
        }
    } catch (const ragkit::RagError& e) {
        std::cerr << "error [" << ragkit::error_code_name(e.code())
                  << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
