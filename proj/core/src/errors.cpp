#include "ragkit/errors.hpp"

namespace ragkit {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::missing_file: return "missing_file";
        case ErrorCode::extractor_unavailable: return "extractor_unavailable";
        case ErrorCode::extractor_failed: return "extractor_failed";
        case ErrorCode::invalid_encoding: return "invalid_encoding";
        case ErrorCode::invalid_chunking: return "invalid_chunking";
        case ErrorCode::unknown_strategy: return "unknown_strategy";
        case ErrorCode::lock_held: return "lock_held";
        case ErrorCode::corrupt_manifest: return "corrupt_manifest";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::not_writable: return "not_writable";
        case ErrorCode::unknown_collection: return "unknown_collection";
        case ErrorCode::auth_missing: return "auth_missing";
        case ErrorCode::provider_error: return "provider_error";
        case ErrorCode::mock_unknown_task: return "mock_unknown_task";
        case ErrorCode::io_failure: return "io_failure";
        case ErrorCode::duplicate_qa_id: return "duplicate_qa_id";
        case ErrorCode::malformed_csv: return "malformed_csv";
        case ErrorCode::malformed_log: return "malformed_log";
        case ErrorCode::judge_parse_error: return "judge_parse_error";
        case ErrorCode::degenerate_series: return "degenerate_series";
        case ErrorCode::mismatched_grids: return "mismatched_grids";
        case ErrorCode::payload_too_large: return "payload_too_large";
        case ErrorCode::bind_failure: return "bind_failure";
        case ErrorCode::invalid_argument: return "invalid_argument";
    }
    return "unknown";
}

}  // namespace ragkit
