#include "ragkit/reportkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ragkit/csv.hpp"
#include "ragkit/errors.hpp"
#include "ragkit/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ragkit::report {

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

std::optional<double> metric_value(const eval::MetricsRow& row,
                                   const std::string& name) {
    if (name == "context_precision") return row.context_precision;
    if (name == "context_recall") return row.context_recall;
    if (name == "faithfulness") return row.faithfulness;
    if (name == "answer_relevance") return row.answer_relevance;
    if (name == "ragas_overall") return row.ragas_overall;
    return std::nullopt;
}

std::string pad_index(std::size_t index, std::size_t width) {
    std::string s = std::to_string(index);
    while (s.size() < width) s.insert(s.begin(), '0');
    return s;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw RagError(ErrorCode::invalid_argument,
                       "pearson: series lengths differ");
    }
    const std::size_t n = x.size();
    if (n < 2) {
        throw RagError(ErrorCode::degenerate_series,
                       "pearson needs at least two points");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw RagError(ErrorCode::degenerate_series, "pearson: constant series");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {
        "context_precision", "context_recall", "faithfulness",
        "answer_relevance", "ragas_overall"};
    return names;
}

std::vector<MetricSummary> summarize_runs(
    const std::vector<std::vector<eval::MetricsRow>>& runs) {
    if (runs.empty()) {
        throw RagError(ErrorCode::invalid_argument, "summarize_runs: no runs");
    }
    std::vector<MetricSummary> out;
    for (const auto& name : metric_names()) {
        MetricSummary summary;
        summary.metric = name;
        std::vector<double> pooled;
        for (const auto& run : runs) {
            for (const auto& row : run) {
                auto v = metric_value(row, name);
                if (v) {
                    pooled.push_back(*v);
                } else {
                    ++summary.nulls;
                }
            }
        }
        summary.n = pooled.size();
        if (!pooled.empty()) {
            double sum = 0.0;
            for (double v : pooled) sum += v;
            double mean = sum / static_cast<double>(pooled.size());
            summary.mean = mean;
            if (pooled.size() > 1) {
                double ss = 0.0;
                for (double v : pooled) ss += (v - mean) * (v - mean);
                summary.sd = std::sqrt(ss / static_cast<double>(pooled.size() - 1));
            }
        }
        out.push_back(std::move(summary));
    }
    return out;
}

std::vector<std::string> read_questions(const fs::path& path) {
    std::string contents = read_file(path);
    std::vector<std::string> questions;
    std::istringstream in(contents);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto trimmed = util::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        questions.emplace_back(trimmed);
    }
    return questions;
}

fs::path run_chunk_sweep(const SweepConfig& cfg,
                         const std::vector<std::string>& corpus_paths,
                         const fs::path& store_root,
                         const llm::ProviderConfig& provider) {
    if (cfg.chunk_sizes.empty()) {
        throw RagError(ErrorCode::invalid_argument, "sweep: no chunk sizes");
    }
    for (std::size_t i = 0; i < cfg.chunk_sizes.size(); ++i) {
        if (cfg.chunk_sizes[i] <= 0 ||
            (i > 0 && cfg.chunk_sizes[i] <= cfg.chunk_sizes[i - 1])) {
            throw RagError(ErrorCode::invalid_argument,
                           "chunk_sizes must be positive and strictly increasing");
        }
    }
    if (cfg.repeats < 1) {
        throw RagError(ErrorCode::invalid_argument, "repeats must be >= 1");
    }
    if (cfg.overlap_fraction < 0.0 || cfg.overlap_fraction >= 1.0) {
        throw RagError(ErrorCode::invalid_argument,
                       "overlap_fraction must lie in [0, 1)");
    }
    if (corpus_paths.empty()) {
        throw RagError(ErrorCode::invalid_argument, "sweep: no corpus paths");
    }
    auto questions = read_questions(cfg.questions_path);
    if (questions.empty()) {
        throw RagError(ErrorCode::invalid_argument,
                       "questions file is empty: " + cfg.questions_path.string());
    }

    fs::path artifact = cfg.output_root / ("sweep_" + util::now_utc_compact());
    for (int suffix = 1; fs::exists(artifact); ++suffix) {
        artifact = cfg.output_root /
                   ("sweep_" + util::now_utc_compact() + "_" +
                    std::to_string(suffix));
    }
    std::error_code ec;
    fs::create_directories(artifact, ec);
    if (ec) {
        throw RagError(ErrorCode::io_failure,
                       "cannot create artifact dir " + artifact.string());
    }

    auto store = store::VectorStore::open(store_root, store::OpenMode::read_write);

    json resolved = {{"chunk_sizes", cfg.chunk_sizes},
                     {"overlap_fraction", cfg.overlap_fraction},
                     {"repeats", cfg.repeats},
                     {"questions", questions.size()},
                     {"corpus_paths", corpus_paths},
                     {"top_k", cfg.params.top_k},
                     {"score_threshold", cfg.params.score_threshold},
                     {"embedding_model", cfg.params.embedding_model},
                     {"chat_model", cfg.params.chat_model},
                     {"seed", cfg.eval_cfg.seed},
                     {"overlaps", json::object()}};
    json status = json::object();

    std::vector<MetricSummary> all_summaries;
    const std::size_t id_width =
        std::max<std::size_t>(3, std::to_string(questions.size()).size());

    for (int size : cfg.chunk_sizes) {
        std::string size_key = std::to_string(size);
        auto overlap = static_cast<std::size_t>(
            std::lround(cfg.overlap_fraction * static_cast<double>(size)));
        resolved["overlaps"][size_key] = overlap;

        fs::path size_dir = artifact / ("size_" + size_key);
        fs::create_directories(size_dir);
        try {
            rag::IngestOptions ingest;
            ingest.paths = corpus_paths;
            ingest.collection = "sweep_" + size_key;
            ingest.chunking.strategy = text::ChunkingStrategy::character;
            ingest.chunking.chunk_size = static_cast<std::size_t>(size);
            ingest.chunking.chunk_overlap = overlap;
            ingest.embedding.model = cfg.params.embedding_model;
            ingest.resume = false;
            auto ingest_report = rag::ingest_documents(ingest, store, provider);
            for (const auto& f : ingest_report.per_file) {
                if (f.status == "failed") {
                    throw RagError(ErrorCode::io_failure,
                                   "ingest failed for " + f.path + ": " + f.error);
                }
            }

            rag::RagParams params = cfg.params;
            params.collection = ingest.collection;
            fs::path log_path = size_dir / "qa_log.jsonl";
            for (std::size_t qi = 0; qi < questions.size(); ++qi) {
                auto result = rag::query_rag(questions[qi], params, store, provider);
                // Deterministic qa_ids keep repeated sweeps byte-comparable.
                rag::log_rag_interaction(log_path, questions[qi], result, params,
                                         std::nullopt,
                                         "q" + pad_index(qi + 1, id_width));
            }

            std::vector<std::vector<eval::MetricsRow>> runs;
            for (int rep = 1; rep <= cfg.repeats; ++rep) {
                auto rows =
                    eval::compute_ragas_metrics(log_path, cfg.eval_cfg, provider);
                eval::write_metrics_csv(
                    rows, size_dir / ("metrics_run" + std::to_string(rep) + ".csv"));
                eval::write_metrics_detail(
                    rows, size_dir / ("metrics_run" + std::to_string(rep) +
                                      "_detail.jsonl"));
                runs.push_back(std::move(rows));
            }
            for (auto& summary : summarize_runs(runs)) {
                summary.chunk_size = size;
                all_summaries.push_back(std::move(summary));
            }
            status[size_key] = "ok";
        } catch (const RagError& e) {
            status[size_key] = std::string("failed: ") + e.what();
        }
    }

    write_summary_csv(all_summaries, artifact / "summary.csv");
    {
        std::ofstream out(artifact / "config.json", std::ios::binary);
        out << resolved.dump(2) << '\n';
    }
    {
        std::ofstream out(artifact / "status.json", std::ios::binary);
        out << status.dump(2) << '\n';
    }
    return artifact;
}

void write_summary_csv(const std::vector<MetricSummary>& summaries,
                       const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw RagError(ErrorCode::io_failure, "cannot write " + path.string());
    }
    out << "chunk_size,metric,mean,sd,n\n";
    for (const auto& s : summaries) {
        out << csv::join_row({std::to_string(s.chunk_size), s.metric,
                              s.mean ? util::format_double(*s.mean) : "",
                              util::format_double(s.sd), std::to_string(s.n)});
    }
}

std::vector<MetricSummary> read_summary_csv(const fs::path& path) {
    auto rows = csv::parse(read_file(path));
    if (rows.empty() ||
        rows.front() != std::vector<std::string>{"chunk_size", "metric", "mean",
                                                 "sd", "n"}) {
        throw RagError(ErrorCode::malformed_csv,
                       path.string() + ": expected summary header "
                                       "chunk_size,metric,mean,sd,n");
    }
    std::vector<MetricSummary> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 5) {
            throw RagError(ErrorCode::malformed_csv,
                           path.string() + ": row " + std::to_string(i + 1) +
                               " has " + std::to_string(row.size()) + " fields");
        }
        MetricSummary s;
        try {
            s.chunk_size = std::stoi(row[0]);
            s.metric = row[1];
            if (!row[2].empty()) s.mean = std::stod(row[2]);
            s.sd = std::stod(row[3]);
            s.n = static_cast<std::size_t>(std::stoull(row[4]));
        } catch (const std::exception&) {
            throw RagError(ErrorCode::malformed_csv,
                           path.string() + ": row " + std::to_string(i + 1) +
                               " has non-numeric fields");
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CorrelationRow> correlate_against(const fs::path& summary_a,
                                              const fs::path& summary_b) {
    auto a = read_summary_csv(summary_a);
    auto b = read_summary_csv(summary_b);

    using Grid = std::map<std::string, std::map<int, std::optional<double>>>;
    auto to_grid = [](const std::vector<MetricSummary>& rows) {
        Grid grid;
        for (const auto& r : rows) grid[r.metric][r.chunk_size] = r.mean;
        return grid;
    };
    Grid ga = to_grid(a), gb = to_grid(b);

    auto keys = [](const Grid& g) {
        std::set<std::string> metrics;
        std::set<int> sizes;
        for (const auto& [metric, series] : g) {
            metrics.insert(metric);
            for (const auto& [size, _] : series) sizes.insert(size);
        }
        return std::make_pair(metrics, sizes);
    };
    if (keys(ga) != keys(gb)) {
        throw RagError(ErrorCode::mismatched_grids,
                       "summaries cover different chunk sizes or metrics");
    }

    std::vector<CorrelationRow> out;
    auto ordered = metric_names();
    for (const auto& [metric, _] : ga) {
        if (std::find(ordered.begin(), ordered.end(), metric) == ordered.end()) {
            ordered.push_back(metric);
        }
    }
    for (const auto& metric : ordered) {
        auto it = ga.find(metric);
        if (it == ga.end()) continue;
        CorrelationRow row;
        row.metric = metric;
        std::vector<double> xs, ys;
        bool complete = true;
        for (const auto& [size, mean_a] : it->second) {
            auto mean_b = gb[metric][size];
            if (!mean_a || !mean_b) {
                complete = false;
                break;
            }
            xs.push_back(*mean_a);
            ys.push_back(*mean_b);
        }
        if (complete) {
            try {
                row.r = pearson(xs, ys);
            } catch (const RagError& e) {
                if (e.code() != ErrorCode::degenerate_series) throw;
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

void write_correlation_csv(const std::vector<CorrelationRow>& rows,
                           const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw RagError(ErrorCode::io_failure, "cannot write " + path.string());
    }
    out << "metric,correlation\n";
    for (const auto& row : rows) {
        out << csv::join_row(
            {row.metric, row.r ? util::format_double(*row.r) : ""});
    }
}

}  // namespace ragkit::report
