#include "ragkit/ragas.hpp"

#include <algorithm>
#include <fstream>

#include "ragkit/csv.hpp"
#include "ragkit/errors.hpp"
#include "ragkit/textprep.hpp"
#include "ragkit/util.hpp"
#include "ragkit/vecstore.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ragkit::eval {

namespace {

const char kRepromptSuffix[] = "\nReply with only the structured object.";

const std::string& target_answer(const rag::QaLogEntry& entry,
                                 const EvalConfig& cfg) {
    if (cfg.policy == TargetAnswerPolicy::prefer_reference &&
        entry.answer_reference && !entry.answer_reference->empty()) {
        return *entry.answer_reference;
    }
    return entry.answer_model;
}

// Strips any non-object preamble/suffix before parsing.
std::optional<json> parse_structured(const std::string& reply) {
    auto first = reply.find('{');
    auto last = reply.rfind('}');
    if (first == std::string::npos || last == std::string::npos || last < first) {
        return std::nullopt;
    }
    try {
        json j = json::parse(reply.substr(first, last - first + 1));
        if (!j.is_object()) return std::nullopt;
        return j;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

// One reprompt on parse failure, then gives up.
std::optional<json> ask_structured(const JudgeFn& judge, const std::string& prompt,
                                   std::string& failure) {
    auto parsed = parse_structured(judge(prompt));
    if (parsed) return parsed;
    parsed = parse_structured(judge(prompt + kRepromptSuffix));
    if (parsed) return parsed;
    failure = "judge reply was not a parseable structured object";
    return std::nullopt;
}

std::optional<int> extract_verdict(const json& j) {
    if (!j.contains("verdict")) return std::nullopt;
    const auto& v = j["verdict"];
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (v.is_number_integer()) {
        auto n = v.get<int>();
        if (n == 0 || n == 1) return n;
    }
    return std::nullopt;
}

std::optional<std::vector<std::string>> extract_strings(const json& j,
                                                        const char* key) {
    if (!j.contains(key) || !j[key].is_array()) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& item : j[key]) {
        if (!item.is_string()) return std::nullopt;
        std::string s = item.get<std::string>();
        if (!util::trim(s).empty()) out.push_back(std::move(s));
    }
    return out;
}

std::string optional_field(const std::optional<double>& v) {
    return v ? util::format_double(*v) : std::string();
}

}  // namespace

double average_precision(const std::vector<int>& verdicts) {
    std::size_t relevant = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < verdicts.size(); ++k) {
        if (verdicts[k] != 0) {
            ++relevant;
            sum += static_cast<double>(relevant) / static_cast<double>(k + 1);
        }
    }
    if (relevant == 0) return 0.0;
    return sum / static_cast<double>(relevant);
}

std::string render_cp_prompt(const std::string& question,
                             const std::string& answer,
                             const std::string& chunk) {
    return "TASK: CP_VERDICT\n\nQUESTION:\n" + question + "\n\nANSWER:\n" +
           answer + "\n\nCONTEXT:\n" + chunk +
           "\n\nReply with only this JSON object: {\"verdict\": 0 or 1}. "
           "Verdict 1 if this context chunk was useful in arriving at the "
           "answer, else 0.";
}

std::string render_cr_prompt(const std::string& sentence,
                             const std::string& context) {
    return "TASK: CR_SENTENCE\n\nSENTENCE:\n" + sentence + "\n\nCONTEXT:\n" +
           context +
           "\n\nReply with only this JSON object: {\"verdict\": 0 or 1}. "
           "Verdict 1 if the sentence is supported by the context, else 0.";
}

std::string render_ff_decompose_prompt(const std::string& answer) {
    return "TASK: FF_DECOMPOSE\n\nANSWER:\n" + answer +
           "\n\nReply with only this JSON object: {\"statements\": [\"...\"]}. "
           "List the simplified factual statements the answer makes.";
}

std::string render_ff_verify_prompt(const std::string& statement,
                                    const std::string& context) {
    return "TASK: FF_VERIFY\n\nSTATEMENT:\n" + statement + "\n\nCONTEXT:\n" +
           context +
           "\n\nReply with only this JSON object: {\"verdict\": 0 or 1}. "
           "Verdict 1 if the statement is supported by the context, else 0.";
}

std::string render_ar_prompt(const std::string& answer) {
    return "TASK: AR_REVERSE\n\nANSWER:\n" + answer +
           "\n\nReply with only this JSON object: {\"questions\": [\"q1\", "
           "\"q2\", \"q3\"]}. Write three questions that this answer would "
           "directly answer.";
}

std::string concatenate_context(const rag::QaLogEntry& entry) {
    std::string out;
    for (std::size_t i = 0; i < entry.retrieved_texts.size(); ++i) {
        if (i) out += "\n\n";
        out += entry.retrieved_texts[i];
    }
    return out;
}

JudgeFn make_judge(const llm::ProviderConfig& provider, const EvalConfig& cfg) {
    llm::ProviderConfig judge_cfg = provider;
    judge_cfg.chat_model = cfg.judge_chat_model;
    long seed = cfg.seed;
    return [judge_cfg, seed](const std::string& prompt) {
        llm::ChatRequest req;
        req.user_prompt = prompt;
        req.temperature = 0.0;  // evaluation always runs at temperature 0
        req.seed = seed;
        return llm::chat_complete(judge_cfg, req);
    };
}

EmbedFn make_embedder(const llm::ProviderConfig& provider, const EvalConfig& cfg) {
    llm::ProviderConfig embed_cfg = provider;
    embed_cfg.embedding_model = cfg.embedding_model;
    return [embed_cfg](const std::vector<std::string>& texts) {
        llm::EmbeddingBatch batch;
        batch.texts = texts;
        batch.model = embed_cfg.embedding_model;
        return llm::embed_texts(embed_cfg, batch).vectors;
    };
}

CpResult score_context_precision(const rag::QaLogEntry& entry,
                                 const EvalConfig& cfg, const JudgeFn& judge) {
    CpResult result;
    if (entry.retrieved_texts.empty()) {
        result.score = 0.0;
        return result;
    }
    const std::string& answer = target_answer(entry, cfg);
    for (const auto& chunk : entry.retrieved_texts) {
        auto reply = ask_structured(
            judge, render_cp_prompt(entry.question, answer, chunk),
            result.failure);
        if (!reply) return result;
        auto verdict = extract_verdict(*reply);
        if (!verdict) {
            result.failure = "judge reply missing 0/1 verdict";
            return result;
        }
        result.verdicts.push_back(*verdict);
    }
    result.score = average_precision(result.verdicts);
    return result;
}

CrResult score_context_recall(const rag::QaLogEntry& entry, const EvalConfig& cfg,
                              const JudgeFn& judge) {
    CrResult result;
    const std::string& answer = target_answer(entry, cfg);
    result.sentences = text::split_sentences(text::clean_text(answer));
    if (result.sentences.empty()) {
        result.failure = "target answer has no sentences";
        return result;
    }
    std::string context = concatenate_context(entry);
    std::size_t supported = 0;
    for (const auto& sentence : result.sentences) {
        auto reply = ask_structured(judge, render_cr_prompt(sentence, context),
                                    result.failure);
        if (!reply) {
            result.verdicts.clear();
            return result;
        }
        auto verdict = extract_verdict(*reply);
        if (!verdict) {
            result.failure = "judge reply missing 0/1 verdict";
            result.verdicts.clear();
            return result;
        }
        result.verdicts.push_back(*verdict);
        supported += static_cast<std::size_t>(*verdict);
    }
    result.score = static_cast<double>(supported) /
                   static_cast<double>(result.sentences.size());
    return result;
}

FfResult score_faithfulness(const rag::QaLogEntry& entry, const EvalConfig& cfg,
                            const JudgeFn& judge) {
    (void)cfg;  // faithfulness always grades the model answer
    FfResult result;
    if (util::trim(entry.answer_model).empty()) {
        result.failure = "model answer is empty";
        return result;
    }
    auto reply = ask_structured(
        judge, render_ff_decompose_prompt(entry.answer_model), result.failure);
    if (!reply) return result;
    auto statements = extract_strings(*reply, "statements");
    if (!statements) {
        result.failure = "decompose reply missing statements array";
        return result;
    }
    result.statements = std::move(*statements);
    if (result.statements.empty()) {
        result.failure = "decomposition produced no statements";
        return result;
    }

    std::string context = concatenate_context(entry);
    std::size_t supported = 0;
    for (const auto& statement : result.statements) {
        auto verify = ask_structured(
            judge, render_ff_verify_prompt(statement, context), result.failure);
        if (!verify) {
            result.verdicts.clear();
            return result;
        }
        auto verdict = extract_verdict(*verify);
        if (!verdict) {
            result.failure = "judge reply missing 0/1 verdict";
            result.verdicts.clear();
            return result;
        }
        result.verdicts.push_back(*verdict);
        supported += static_cast<std::size_t>(*verdict);
    }
    result.score = static_cast<double>(supported) /
                   static_cast<double>(result.statements.size());
    return result;
}

ArResult score_answer_relevance(const rag::QaLogEntry& entry,
                                const EvalConfig& cfg, const JudgeFn& judge,
                                const EmbedFn& embedder) {
    (void)cfg;
    ArResult result;
    if (util::trim(entry.answer_model).empty()) {
        result.failure = "model answer is empty";
        return result;
    }
    auto reply = ask_structured(judge, render_ar_prompt(entry.answer_model),
                                result.failure);
    if (!reply) return result;
    auto questions = extract_strings(*reply, "questions");
    if (!questions) {
        result.failure = "reverse reply missing questions array";
        return result;
    }
    result.reverse_questions = std::move(*questions);
    if (result.reverse_questions.empty()) {
        result.failure = "judge produced no reverse questions";
        return result;
    }

    std::vector<std::string> texts;
    texts.push_back(entry.question);
    for (const auto& q : result.reverse_questions) texts.push_back(q);
    auto vectors = embedder(texts);
    if (vectors.size() != texts.size()) {
        result.failure = "embedder returned wrong count";
        return result;
    }
    double sum = 0.0;
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        sum += store::cosine_similarity(vectors.front(), vectors[i]);
    }
    double mean = sum / static_cast<double>(vectors.size() - 1);
    result.score = std::max(0.0, mean);  // scores live in [0, 1]
    return result;
}

MetricsRow score_entry(const rag::QaLogEntry& entry, const EvalConfig& cfg,
                       const JudgeFn& judge, const EmbedFn& embedder) {
    MetricsRow row;
    row.qa_id = entry.qa_id;
    json failures = json::object();

    auto cp = score_context_precision(entry, cfg, judge);
    row.context_precision = cp.score;
    row.detail["context_precision"] = {{"verdicts", cp.verdicts}};
    if (!cp.failure.empty()) failures["context_precision"] = cp.failure;

    auto cr = score_context_recall(entry, cfg, judge);
    row.context_recall = cr.score;
    row.detail["context_recall"] = {{"sentences", cr.sentences},
                                    {"verdicts", cr.verdicts}};
    if (!cr.failure.empty()) failures["context_recall"] = cr.failure;

    auto ff = score_faithfulness(entry, cfg, judge);
    row.faithfulness = ff.score;
    row.detail["faithfulness"] = {{"statements", ff.statements},
                                  {"verdicts", ff.verdicts}};
    if (!ff.failure.empty()) failures["faithfulness"] = ff.failure;

    auto ar = score_answer_relevance(entry, cfg, judge, embedder);
    row.answer_relevance = ar.score;
    row.detail["answer_relevance"] = {{"questions", ar.reverse_questions}};
    if (!ar.failure.empty()) failures["answer_relevance"] = ar.failure;

    if (!failures.empty()) row.detail["failures"] = failures;

    if (row.context_precision && row.context_recall && row.faithfulness &&
        row.answer_relevance) {
        row.ragas_overall = (*row.context_precision + *row.context_recall +
                             *row.faithfulness + *row.answer_relevance) /
                            4.0;
    }
    return row;
}

std::vector<MetricsRow> compute_ragas_metrics(const fs::path& log_path,
                                              const EvalConfig& cfg,
                                              const llm::ProviderConfig& provider) {
    auto entries = rag::read_qa_log(log_path);
    auto judge = make_judge(provider, cfg);
    auto embedder = make_embedder(provider, cfg);
    std::vector<MetricsRow> rows;
    rows.reserve(entries.size());
    for (const auto& entry : entries) {
        rows.push_back(score_entry(entry, cfg, judge, embedder));
    }
    return rows;
}

std::string metrics_csv_string(const std::vector<MetricsRow>& rows) {
    std::string out =
        "qa_id,context_precision,context_recall,faithfulness,"
        "answer_relevance,ragas_overall\n";
    for (const auto& row : rows) {
        out += csv::join_row({row.qa_id, optional_field(row.context_precision),
                              optional_field(row.context_recall),
                              optional_field(row.faithfulness),
                              optional_field(row.answer_relevance),
                              optional_field(row.ragas_overall)});
    }
    return out;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw RagError(ErrorCode::io_failure, "cannot write " + path.string());
    }
    out << metrics_csv_string(rows);
}

void write_metrics_detail(const std::vector<MetricsRow>& rows,
                          const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw RagError(ErrorCode::io_failure, "cannot write " + path.string());
    }
    for (const auto& row : rows) {
        json j = row.detail;
        j["qa_id"] = row.qa_id;
        out << j.dump() << '\n';
    }
}

json to_json(const MetricsRow& row, bool include_detail) {
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    json j = {{"qa_id", row.qa_id},
              {"context_precision", opt(row.context_precision)},
              {"context_recall", opt(row.context_recall)},
              {"faithfulness", opt(row.faithfulness)},
              {"answer_relevance", opt(row.answer_relevance)},
              {"ragas_overall", opt(row.ragas_overall)}};
    if (include_detail) j["detail"] = row.detail;
    return j;
}

}  // namespace ragkit::eval
