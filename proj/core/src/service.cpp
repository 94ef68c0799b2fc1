#include "ragkit/service.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include <sys/socket.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ragkit/errors.hpp"
#include "ragkit/ragas.hpp"
#include "ragkit/util.hpp"
#include "ragkit/vecstore.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ragkit::service {

namespace {

void set_error(httplib::Response& res, int status, ErrorCode code,
               const std::string& message) {
    res.status = status;
    res.set_content(
        json{{"error", error_code_name(code)}, {"message", message}}.dump(),
        "application/json");
}

int status_for(const RagError& e) {
    switch (e.code()) {
        case ErrorCode::unknown_collection: return 404;
        case ErrorCode::provider_error: return 502;
        case ErrorCode::auth_missing: return 502;
        case ErrorCode::payload_too_large: return 413;
        default: return 400;
    }
}

json parse_body(const httplib::Request& req) {
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) {
            throw RagError(ErrorCode::invalid_argument,
                           "request body must be a JSON object");
        }
        return j;
    } catch (const json::exception& e) {
        throw RagError(ErrorCode::invalid_argument,
                       std::string("invalid JSON body: ") + e.what());
    }
}

// Path containment check for /evaluate inputs.
bool under_root(const fs::path& root, const fs::path& candidate) {
    std::error_code ec;
    fs::path canon_root = fs::weakly_canonical(fs::absolute(root), ec);
    if (ec) return false;
    fs::path canon = fs::weakly_canonical(fs::absolute(candidate), ec);
    if (ec) return false;
    auto root_it = canon_root.begin();
    auto it = canon.begin();
    for (; root_it != canon_root.end(); ++root_it, ++it) {
        if (it == canon.end() || *it != *root_it) return false;
    }
    return true;
}

}  // namespace

ServiceConfig load_service_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RagError(ErrorCode::missing_file, "no such file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw RagError(ErrorCode::invalid_argument,
                       path.string() + ": invalid JSON: " + e.what());
    }

    ServiceConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "bind_address") {
            std::string addr = value.get<std::string>();
            auto colon = addr.rfind(':');
            if (colon == std::string::npos) {
                throw RagError(ErrorCode::invalid_argument,
                               "bind_address must be host:port");
            }
            cfg.bind_host = addr.substr(0, colon);
            cfg.bind_port = std::stoi(addr.substr(colon + 1));
        } else if (key == "store_root") {
            cfg.store_root = value.get<std::string>();
        } else if (key == "logs_root") {
            cfg.logs_root = value.get<std::string>();
        } else if (key == "max_request_bytes") {
            cfg.max_request_bytes = value.get<std::size_t>();
        } else if (key == "evaluate_parallelism") {
            cfg.evaluate_parallelism = value.get<int>();
        } else if (key == "provider") {
            for (const auto& [pk, pv] : value.items()) {
                if (pk == "kind") cfg.provider.kind = llm::parse_provider(pv.get<std::string>());
                else if (pk == "base_url") cfg.provider.base_url = pv.get<std::string>();
                else if (pk == "api_key_env") cfg.provider.api_key_env = pv.get<std::string>();
                else if (pk == "embedding_model") cfg.provider.embedding_model = pv.get<std::string>();
                else if (pk == "chat_model") cfg.provider.chat_model = pv.get<std::string>();
                else if (pk == "timeout") cfg.provider.timeout_seconds = pv.get<double>();
                else if (pk == "max_retries") cfg.provider.max_retries = pv.get<int>();
                else if (pk == "retry") cfg.provider.retry = pv.get<bool>();
                else throw RagError(ErrorCode::invalid_argument,
                                    "unknown provider config key: " + pk);
            }
        } else if (key == "default_params") {
            for (const auto& [rk, rv] : value.items()) {
                if (rk == "collection") cfg.default_params.collection = rv.get<std::string>();
                else if (rk == "top_k") cfg.default_params.top_k = rv.get<std::size_t>();
                else if (rk == "embedding_model") cfg.default_params.embedding_model = rv.get<std::string>();
                else if (rk == "chat_model") cfg.default_params.chat_model = rv.get<std::string>();
                else if (rk == "temperature") cfg.default_params.temperature = rv.get<double>();
                else if (rk == "max_output_tokens") cfg.default_params.max_output_tokens = rv.get<int>();
                else if (rk == "score_threshold") cfg.default_params.score_threshold = rv.get<double>();
                else if (rk == "system_prompt") cfg.default_params.system_prompt = rv.get<std::string>();
                else throw RagError(ErrorCode::invalid_argument,
                                    "unknown default_params key: " + rk);
            }
        } else {
            throw RagError(ErrorCode::invalid_argument,
                           "unknown config key: " + key);
        }
    }
    return cfg;
}

struct Service::Impl {
    ServiceConfig cfg;
    store::VectorStore store;
    httplib::Server server;
    std::mutex evaluate_mutex;  // serializes judge-call volume
    int bound_port = 0;

    explicit Impl(ServiceConfig c)
        : cfg(std::move(c)),
          store(store::VectorStore::open(cfg.store_root,
                                         store::OpenMode::read_only)) {
        configure();
    }

    void configure() {
        server.set_payload_max_length(cfg.max_request_bytes);
        // SO_REUSEADDR only: a second server on the same port must fail to
        // bind instead of silently sharing it via SO_REUSEPORT.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                         reinterpret_cast<const void*>(&yes), sizeof(yes));
        });

        server.set_exception_handler([](const httplib::Request&,
                                        httplib::Response& res,
                                        std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const RagError& e) {
                set_error(res, status_for(e), e.code(), e.what());
            } catch (const std::exception& e) {
                set_error(res, 500, ErrorCode::io_failure, e.what());
            }
        });
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return;  // handler already wrote a body
            if (res.status == 413) {
                set_error(res, 413, ErrorCode::payload_too_large,
                          "request body exceeds max_request_bytes");
            } else if (res.status == 404) {
                set_error(res, 404, ErrorCode::invalid_argument,
                          "no such endpoint");
            } else {
                set_error(res, res.status, ErrorCode::io_failure,
                          "request failed");
            }
        });

        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(json{{"status", "ok"}}.dump(), "application/json");
        });

        server.Get("/collections",
                   [this](const httplib::Request&, httplib::Response& res) {
                       json out = json::array();
                       for (const auto& c : store.collections()) {
                           out.push_back({{"name", c.name},
                                          {"record_count", c.record_count},
                                          {"dimension", c.dimension},
                                          {"embedding_model", c.embedding_model}});
                       }
                       res.set_content(out.dump(), "application/json");
                   });

        server.Post("/query", [this](const httplib::Request& req,
                                     httplib::Response& res) {
            json body = parse_body(req);
            if (!body.contains("question") || !body["question"].is_string() ||
                body["question"].get<std::string>().empty()) {
                throw RagError(ErrorCode::invalid_argument,
                               "field 'question' (non-empty string) is required");
            }
            rag::RagParams params = cfg.default_params;
            if (body.contains("collection")) {
                params.collection = body["collection"].get<std::string>();
            }
            if (body.contains("top_k")) {
                params.top_k = body["top_k"].get<std::size_t>();
            }
            if (body.contains("score_threshold")) {
                params.score_threshold = body["score_threshold"].get<double>();
            }
            if (body.contains("system_prompt")) {
                params.system_prompt = body["system_prompt"].get<std::string>();
            }
            auto result = rag::query_rag(body["question"].get<std::string>(),
                                         params, store, cfg.provider);
            res.set_content(rag::to_json(result).dump(), "application/json");
        });

        server.Post("/evaluate", [this](const httplib::Request& req,
                                        httplib::Response& res) {
            json body = parse_body(req);
            if (!body.contains("qa_log_path") || !body["qa_log_path"].is_string()) {
                throw RagError(ErrorCode::invalid_argument,
                               "field 'qa_log_path' (string) is required");
            }
            fs::path log_path = body["qa_log_path"].get<std::string>();
            if (!under_root(cfg.logs_root, log_path)) {
                throw RagError(ErrorCode::invalid_argument,
                               "qa_log_path must lie under the configured "
                               "logs root");
            }
            eval::EvalConfig eval_cfg;
            eval_cfg.judge_chat_model = cfg.provider.chat_model;
            eval_cfg.embedding_model = cfg.provider.embedding_model;
            if (body.contains("seed")) {
                eval_cfg.seed = body["seed"].get<long>();
            }
            std::lock_guard<std::mutex> lock(evaluate_mutex);
            auto rows = eval::compute_ragas_metrics(log_path, eval_cfg, cfg.provider);
            json out = json::array();
            for (const auto& row : rows) out.push_back(eval::to_json(row));
            res.set_content(json{{"rows", out}}.dump(), "application/json");
        });
    }
};

Service::Service(ServiceConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}

Service::~Service() {
    if (impl_) impl_->server.stop();
}

int Service::bind() {
    auto& cfg = impl_->cfg;
    if (cfg.bind_port == 0) {
        int port = impl_->server.bind_to_any_port(cfg.bind_host);
        if (port <= 0) {
            throw RagError(ErrorCode::bind_failure,
                           "cannot bind " + cfg.bind_host);
        }
        impl_->bound_port = port;
    } else {
        if (!impl_->server.bind_to_port(cfg.bind_host, cfg.bind_port)) {
            throw RagError(ErrorCode::bind_failure,
                           "cannot bind " + cfg.bind_host + ":" +
                               std::to_string(cfg.bind_port));
        }
        impl_->bound_port = cfg.bind_port;
    }
    return impl_->bound_port;
}

void Service::serve() {
    util::log_debug("serving on " + impl_->cfg.bind_host + ":" +
                    std::to_string(impl_->bound_port));
    impl_->server.listen_after_bind();
}

void Service::run() {
    bind();
    serve();
}

void Service::stop() { impl_->server.stop(); }

}  // namespace ragkit::service
