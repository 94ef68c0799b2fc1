#pragma once

#include <stdexcept>
#include <string>

namespace ragkit {

/// Stable machine-readable error codes. The snake_case names returned by
/// error_code_name() are part of the CLI/service contract.
enum class ErrorCode {
    // document loading / chunking
    missing_file,
    extractor_unavailable,
    extractor_failed,
    invalid_encoding,
    invalid_chunking,
    unknown_strategy,
    // vector store
    lock_held,
    corrupt_manifest,
    dimension_mismatch,
    not_writable,
    unknown_collection,
    // providers
    auth_missing,
    provider_error,
    mock_unknown_task,
    // logging / evaluation
    io_failure,
    duplicate_qa_id,
    malformed_csv,
    malformed_log,
    judge_parse_error,
    // reporting
    degenerate_series,
    mismatched_grids,
    // interface
    payload_too_large,
    bind_failure,
    invalid_argument,
};

const char* error_code_name(ErrorCode code);

class RagError : public std::runtime_error {
public:
    RagError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// Failure talking to an embedding/chat provider. `status` is the HTTP
/// status (0 for transport-level failures), `attempts` the number of calls
/// made before giving up, and `stage` the pipeline stage ("embed"/"chat")
/// when known.
class ProviderError : public RagError {
public:
    ProviderError(int status, const std::string& message, bool retryable)
        : RagError(ErrorCode::provider_error, message),
          status_(status),
          retryable_(retryable) {}

    int status() const { return status_; }
    bool retryable() const { return retryable_; }
    int attempts() const { return attempts_; }
    void set_attempts(int n) { attempts_ = n; }
    const std::string& stage() const { return stage_; }
    void set_stage(const std::string& s) { stage_ = s; }

private:
    int status_ = 0;
    bool retryable_ = false;
    int attempts_ = 1;
    std::string stage_;
};

}  // namespace ragkit
