#include "ragkit/llm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <map>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ragkit/textprep.hpp"
#include "ragkit/utf8.hpp"
#include "ragkit/util.hpp"

using json = nlohmann::json;

namespace ragkit::llm {

namespace {

// ---------------------------------------------------------------------------
// Mock provider

std::vector<std::string> content_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& tok : util::whitespace_tokens(util::ascii_lower(text))) {
        if (utf8::length(tok) >= 4) out.push_back(std::move(tok));
    }
    return out;
}

bool any_token_in(const std::string& target, const std::string& context) {
    std::string ctx = util::ascii_lower(context);
    for (const auto& tok : content_tokens(target)) {
        if (ctx.find(tok) != std::string::npos) return true;
    }
    return false;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

bool is_section_label(const std::string& line) {
    static const char* kLabels[] = {"QUESTION:", "ANSWER:", "CONTEXT:",
                                    "STATEMENT:", "SENTENCE:"};
    for (const char* l : kLabels) {
        if (line == l) return true;
    }
    return false;
}

// Judge prompts carry labeled sections, one label per line, terminated by
// the next label or the final "Reply ..." instruction line.
std::map<std::string, std::string> parse_sections(const std::string& prompt) {
    std::map<std::string, std::string> sections;
    std::string current;
    std::string body;
    auto flush = [&] {
        if (!current.empty()) {
            sections[current] = std::string(util::trim(body));
        }
        body.clear();
    };
    for (auto& line : split_lines(prompt)) {
        if (is_section_label(line)) {
            flush();
            current = line.substr(0, line.size() - 1);
            continue;
        }
        if (line.rfind("Reply ", 0) == 0) {
            flush();
            current.clear();
            continue;
        }
        if (!current.empty()) {
            body += line;
            body += '\n';
        }
    }
    flush();
    return sections;
}

std::string verdict_reply(const std::string& target, const std::string& context) {
    int verdict = any_token_in(target, context) ? 1 : 0;
    return json{{"verdict", verdict}}.dump();
}

const char kInsufficientContext[] =
    "The provided context does not contain enough information to answer.";

// Question tokens for answer selection: lowercased, ASCII punctuation
// stripped from both ends, at least 4 scalar values long.
std::vector<std::string> question_tokens(std::string_view question) {
    std::vector<std::string> out;
    for (auto& tok : util::whitespace_tokens(util::ascii_lower(question))) {
        std::size_t b = 0, e = tok.size();
        auto is_ascii_punct = [&](char c) {
            unsigned char u = static_cast<unsigned char>(c);
            return u < 0x80 && !std::isalnum(u);
        };
        while (b < e && is_ascii_punct(tok[b])) ++b;
        while (e > b && is_ascii_punct(tok[e - 1])) --e;
        std::string stripped = tok.substr(b, e - b);
        if (utf8::length(stripped) >= 4) out.push_back(std::move(stripped));
    }
    return out;
}

std::string mock_rag_answer(const std::string& prompt) {
    auto lines = split_lines(prompt);
    std::size_t i = 0;
    while (i < lines.size() && lines[i] != "Context:") ++i;
    ++i;
    std::vector<std::string> context_lines;
    std::string question;
    for (; i < lines.size(); ++i) {
        if (lines[i].rfind("Question: ", 0) == 0) {
            question = lines[i].substr(10);
            break;
        }
        context_lines.push_back(lines[i]);
    }
    while (!context_lines.empty() && util::trim(context_lines.back()).empty()) {
        context_lines.pop_back();
    }
    if (context_lines.empty() ||
        (context_lines.size() == 1 && context_lines[0] == "[none]")) {
        return kInsufficientContext;
    }

    std::string blob;
    for (auto& line : context_lines) {
        std::string_view v(line);
        if (!v.empty() && v.front() == '[') {
            std::size_t close = v.find("] ");
            if (close != std::string_view::npos && close <= 12) {
                v.remove_prefix(close + 2);
            }
        }
        blob += v;
        blob += '\n';
    }
    auto sentences = text::split_sentences(text::clean_text(blob));
    if (sentences.empty()) return kInsufficientContext;

    // the sentence sharing the most distinct question tokens wins;
    // earliest on ties, first sentence when nothing matches
    auto qtokens = question_tokens(question);
    std::size_t best = 0, best_count = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        std::string low = util::ascii_lower(sentences[i]);
        std::size_t count = 0;
        for (const auto& tok : qtokens) {
            if (low.find(tok) != std::string::npos) ++count;
        }
        if (count > best_count) {
            best = i;
            best_count = count;
        }
    }
    return sentences[best];
}

std::string mock_chat(const ChatRequest& req) {
    const std::string& prompt = req.user_prompt;
    std::size_t nl = prompt.find('\n');
    std::string first = prompt.substr(0, nl);
    if (first.rfind("TASK: ", 0) != 0) {
        throw RagError(ErrorCode::mock_unknown_task,
                       "mock provider requires a TASK: tag line");
    }
    std::string task = first.substr(6);

    if (task == "RAG_ANSWER") {
        return mock_rag_answer(prompt);
    }
    auto sections = parse_sections(prompt);
    if (task == "CP_VERDICT") {
        return verdict_reply(sections["ANSWER"], sections["CONTEXT"]);
    }
    if (task == "CR_SENTENCE") {
        return verdict_reply(sections["SENTENCE"], sections["CONTEXT"]);
    }
    if (task == "FF_VERIFY") {
        return verdict_reply(sections["STATEMENT"], sections["CONTEXT"]);
    }
    if (task == "FF_DECOMPOSE") {
        return json{{"statements", text::split_sentences(sections["ANSWER"])}}.dump();
    }
    if (task == "AR_REVERSE") {
        auto sentences = text::split_sentences(sections["ANSWER"]);
        json questions = json::array();
        if (!sentences.empty()) {
            const std::string& s = sentences.front();
            questions.push_back("What is " + s + "?");
            questions.push_back("Where is " + s + "?");
            questions.push_back("Why is " + s + "?");
        }
        return json{{"questions", questions}}.dump();
    }
    throw RagError(ErrorCode::mock_unknown_task, "unknown mock task: " + task);
}

// ---------------------------------------------------------------------------
// Remote provider (embeddings / chat-completions JSON over HTTP)

struct RemoteEndpoint {
    std::string host;  // scheme://host:port for httplib
    std::string path_prefix;
};

RemoteEndpoint parse_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw RagError(ErrorCode::invalid_argument,
                       "base_url must include a scheme: " + base_url);
    }
    if (base_url.substr(0, scheme_end) == "https") {
        throw RagError(ErrorCode::invalid_argument,
                       "https base_url is not supported by this build; use an "
                       "http endpoint or a local gateway");
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    RemoteEndpoint ep;
    if (path_start == std::string::npos) {
        ep.host = base_url;
    } else {
        ep.host = base_url.substr(0, path_start);
        ep.path_prefix = base_url.substr(path_start);
        while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') {
            ep.path_prefix.pop_back();
        }
    }
    return ep;
}

std::string require_api_key(const ProviderConfig& cfg) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || key[0] == '\0') {
        throw RagError(ErrorCode::auth_missing,
                       "environment variable " + cfg.api_key_env + " is not set");
    }
    return key;
}

json remote_post(const ProviderConfig& cfg, const std::string& path,
                 const json& body) {
    RemoteEndpoint ep = parse_base_url(cfg.base_url);
    std::string api_key = require_api_key(cfg);
    RetryPolicy policy = retry_policy_from(cfg);

    auto attempt = [&]() -> json {
        httplib::Client client(ep.host);
        client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_seconds));
        client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_seconds));
        client.set_write_timeout(std::chrono::duration<double>(cfg.timeout_seconds));
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key}};

        util::log_debug("POST " + ep.host + ep.path_prefix + path);
        auto res = client.Post(ep.path_prefix + path, headers, body.dump(),
                               "application/json");
        if (!res) {
            throw ProviderError(0, "transport failure: " +
                                       httplib::to_string(res.error()),
                                /*retryable=*/true);
        }
        if (res->status == 429 || res->status >= 500) {
            throw ProviderError(res->status,
                                "provider returned " + std::to_string(res->status),
                                /*retryable=*/true);
        }
        if (res->status < 200 || res->status >= 300) {
            throw ProviderError(res->status,
                                "provider returned " + std::to_string(res->status) +
                                    ": " + res->body,
                                /*retryable=*/false);
        }
        util::log_debug("response " + std::to_string(res->status) + " (" +
                        std::to_string(res->body.size()) + " bytes)");
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw ProviderError(res->status,
                                "malformed provider response: " +
                                    std::string(e.what()),
                                /*retryable=*/false);
        }
    };
    return call_with_retry(attempt, policy);
}

std::vector<std::vector<double>> remote_embed_slice(
    const ProviderConfig& cfg, const std::vector<std::string>& texts) {
    json body = {{"model", cfg.embedding_model}, {"input", texts}};
    json reply = remote_post(cfg, "/embeddings", body);
    if (!reply.contains("data") || !reply["data"].is_array() ||
        reply["data"].size() != texts.size()) {
        throw ProviderError(200, "embeddings response missing data", false);
    }
    std::vector<std::vector<double>> out(texts.size());
    std::size_t fallback = 0;
    for (const auto& item : reply["data"]) {
        std::size_t idx = item.contains("index")
                              ? item["index"].get<std::size_t>()
                              : fallback;
        if (idx >= out.size() || !item.contains("embedding")) {
            throw ProviderError(200, "embeddings response malformed", false);
        }
        out[idx] = item["embedding"].get<std::vector<double>>();
        ++fallback;
    }
    return out;
}

std::string remote_chat(const ProviderConfig& cfg, const ChatRequest& req) {
    json messages = json::array();
    if (req.system_prompt && !req.system_prompt->empty()) {
        messages.push_back({{"role", "system"}, {"content", *req.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", req.user_prompt}});
    json body = {{"model", cfg.chat_model},
                 {"messages", messages},
                 {"temperature", req.temperature},
                 {"max_tokens", req.max_output_tokens}};
    if (req.seed) body["seed"] = *req.seed;

    json reply = remote_post(cfg, "/chat/completions", body);
    try {
        return reply.at("choices").at(0).at("message").at("content")
            .get<std::string>();
    } catch (const json::exception&) {
        throw ProviderError(200, "chat response missing choices", false);
    }
}

}  // namespace

ProviderKind parse_provider(std::string_view name) {
    if (name == "mock") return ProviderKind::mock;
    if (name == "remote") return ProviderKind::remote;
    throw RagError(ErrorCode::invalid_argument,
                   "unknown provider kind: " + std::string(name));
}

std::vector<double> mock_embedding(std::string_view text) {
    std::vector<double> v(kMockEmbeddingDim, 0.0);
    auto tokens = util::whitespace_tokens(util::ascii_lower(text));
    if (tokens.empty()) return v;
    for (const auto& tok : tokens) {
        v[util::fnv1a64(tok) % kMockEmbeddingDim] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

EmbeddingResult embed_texts(const ProviderConfig& cfg, const EmbeddingBatch& batch) {
    if (batch.texts.empty()) {
        throw RagError(ErrorCode::invalid_argument, "embed_texts: no texts");
    }
    if (batch.batch_size == 0 || batch.max_chars == 0) {
        throw RagError(ErrorCode::invalid_argument,
                       "embed_texts: batch_size and max_chars must be positive");
    }

    EmbeddingResult result;
    std::vector<std::string> prepared;
    prepared.reserve(batch.texts.size());
    for (const auto& text : batch.texts) {
        if (utf8::length(text) > batch.max_chars) {
            prepared.push_back(utf8::truncate(text, batch.max_chars));
            ++result.truncated;
        } else {
            prepared.push_back(text);
        }
    }
    if (result.truncated > 0) {
        util::log_debug(std::to_string(result.truncated) +
                        " text(s) truncated to " + std::to_string(batch.max_chars) +
                        " chars before embedding");
    }

    ProviderConfig effective = cfg;
    if (!batch.model.empty()) effective.embedding_model = batch.model;

    result.vectors.reserve(prepared.size());
    for (std::size_t off = 0; off < prepared.size(); off += batch.batch_size) {
        std::size_t count = std::min(batch.batch_size, prepared.size() - off);
        std::vector<std::string> slice(prepared.begin() + off,
                                       prepared.begin() + off + count);
        ++result.batches;
        if (cfg.kind == ProviderKind::mock) {
            for (const auto& text : slice) {
                result.vectors.push_back(mock_embedding(text));
            }
        } else {
            auto vecs = remote_embed_slice(effective, slice);
            for (auto& v : vecs) result.vectors.push_back(std::move(v));
        }
    }
    return result;
}

std::string chat_complete(const ProviderConfig& cfg, const ChatRequest& req) {
    if (req.user_prompt.empty()) {
        throw RagError(ErrorCode::invalid_argument, "chat_complete: empty prompt");
    }
    if (cfg.kind == ProviderKind::mock) {
        return mock_chat(req);
    }
    return remote_chat(cfg, req);
}

RetryPolicy retry_policy_from(const ProviderConfig& cfg) {
    RetryPolicy policy;
    policy.retry = cfg.retry;
    policy.max_retries = std::clamp(cfg.max_retries, 0, 10);
    return policy;
}

double retry_backoff_cap(const RetryPolicy& policy, int attempt) {
    double cap = policy.base_seconds * std::pow(policy.factor, attempt - 1);
    return std::min(policy.cap_seconds, cap);
}

void default_sleep(double seconds) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace ragkit::llm
