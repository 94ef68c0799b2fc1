#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

#include "ragkit/llm.hpp"
#include "ragkit/ragflow.hpp"

namespace ragkit::service {

struct ServiceConfig {
    std::string bind_host = "127.0.0.1";
    int bind_port = 8080;  // 0 binds an ephemeral port
    std::filesystem::path store_root;
    std::filesystem::path logs_root = ".";  // /evaluate paths must live under this
    llm::ProviderConfig provider;
    rag::RagParams default_params;
    std::size_t max_request_bytes = 1 << 20;
    int evaluate_parallelism = 1;
};

/// Parses a JSON config file mirroring ServiceConfig / RagParams field
/// names; unknown keys are rejected.
ServiceConfig load_service_config(const std::filesystem::path& path);

/// HTTP front end over a read-only store snapshot.
///
/// Endpoints:
///   GET  /healthz      -> {"status":"ok"}
///   GET  /collections  -> [{name, record_count, dimension, embedding_model}]
///   POST /query        -> {answer, hits, prompt_final, chat_model}
///   POST /evaluate     -> {rows: [metrics per entry]}
/// Errors are {"error": <code>, "message": <text>} with status 400/404/413/502.
class Service {
public:
    explicit Service(ServiceConfig cfg);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds and serves until stop(); throws bind_failure when the address
    /// is unavailable. Blocking.
    void run();

    /// Binds without serving; returns the bound port. Follow with serve().
    int bind();
    void serve();  // blocking
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ragkit::service
