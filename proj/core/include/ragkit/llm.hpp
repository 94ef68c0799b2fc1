#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "ragkit/errors.hpp"

namespace ragkit::llm {

enum class ProviderKind { remote, mock };

ProviderKind parse_provider(std::string_view name);

struct ProviderConfig {
    ProviderKind kind = ProviderKind::mock;
    std::string base_url;  // remote only, e.g. "http://host:port/v1"
    std::string api_key_env = "RAGKIT_API_KEY";
    std::string embedding_model = "text-embedding-3-small";
    std::string chat_model = "gpt-4o-mini";
    double timeout_seconds = 30.0;
    int max_retries = 5;  // capped at 10
    bool retry = true;
};

struct ChatRequest {
    std::optional<std::string> system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_output_tokens = 2000;
    std::optional<long> seed;  // forwarded to remote providers
};

struct EmbeddingBatch {
    std::vector<std::string> texts;
    std::string model;
    std::size_t max_chars = 8000;  // per-text truncation before dispatch
    std::size_t batch_size = 128;  // texts per provider request
};

struct EmbeddingResult {
    std::vector<std::vector<double>> vectors;  // one per input, in order
    std::size_t truncated = 0;  // texts that exceeded max_chars
    std::size_t batches = 0;    // provider requests issued (or mock slices)
};

inline constexpr std::size_t kMockEmbeddingDim = 16;

/// Deterministic bag-of-tokens embedding: lowercase, split on whitespace,
/// bump component fnv1a64(token) % 16, L2-normalize. No tokens -> zero
/// vector. Bit-identical across platforms.
std::vector<double> mock_embedding(std::string_view text);

EmbeddingResult embed_texts(const ProviderConfig& cfg, const EmbeddingBatch& batch);

std::string chat_complete(const ProviderConfig& cfg, const ChatRequest& req);

// ---------------------------------------------------------------------------
// Retry with exponential backoff and full jitter.

struct RetryPolicy {
    bool retry = true;
    int max_retries = 5;
    double base_seconds = 0.5;
    double factor = 2.0;
    double cap_seconds = 30.0;
};

RetryPolicy retry_policy_from(const ProviderConfig& cfg);

/// Backoff ceiling before the given 1-based failed attempt is retried:
/// min(cap, base * factor^(attempt-1)). Non-decreasing in attempt.
double retry_backoff_cap(const RetryPolicy& policy, int attempt);

using SleepFn = std::function<void(double seconds)>;

void default_sleep(double seconds);

/// Runs `attempt` until it returns, a non-retryable ProviderError surfaces,
/// or max_retries retries are exhausted. The final error is annotated with
/// the total attempt count. Sleep duration is uniform in [0, cap].
template <typename F>
auto call_with_retry(F&& attempt, const RetryPolicy& policy,
                     const SleepFn& sleep_fn = default_sleep,
                     std::uint64_t jitter_seed = 0)
    -> std::invoke_result_t<F&> {
    std::mt19937_64 rng(jitter_seed != 0 ? jitter_seed : std::random_device{}());
    int attempts = 0;
    for (;;) {
        ++attempts;
        try {
            return attempt();
        } catch (ProviderError& e) {
            bool may_retry =
                policy.retry && e.retryable() && attempts <= policy.max_retries;
            if (!may_retry) {
                e.set_attempts(attempts);
                throw;
            }
            double cap = retry_backoff_cap(policy, attempts);
            double delay =
                std::uniform_real_distribution<double>(0.0, cap)(rng);
            if (sleep_fn) sleep_fn(delay);
        }
    }
}

}  // namespace ragkit::llm
