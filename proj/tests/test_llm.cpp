#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ragkit/errors.hpp"
#include "ragkit/llm.hpp"
#include "ragkit/textprep.hpp"

using namespace ragkit;
using namespace ragkit::llm;
using json = nlohmann::json;

TEST_CASE("mock embedding geometry is frozen") {
    // fnv1a64("hello") % 16 == 11
    auto v = mock_embedding("hello");
    REQUIRE(v.size() == kMockEmbeddingDim);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(v[i] == (i == 11 ? 1.0 : 0.0));
    }

    // two hellos and one world: 2/sqrt(5) at slot 11, 1/sqrt(5) at slot 3
    auto w = mock_embedding("Hello HELLO world");
    CHECK(w[11] == doctest::Approx(0.8944271909999159).epsilon(1e-15));
    CHECK(w[3] == doctest::Approx(0.4472135954999579).epsilon(1e-15));
    double sum = 0.0;
    for (double x : w) sum += x == 0.0 ? 0.0 : 1.0;
    CHECK(sum == 2.0);
}

TEST_CASE("mock embedding determinism and unit norm") {
    CHECK(mock_embedding("x") == mock_embedding("x"));
    CHECK(mock_embedding("a b c") == mock_embedding("  a\tb\nc "));
    CHECK(mock_embedding("") == std::vector<double>(kMockEmbeddingDim, 0.0));
    CHECK(mock_embedding(" \t\n") == std::vector<double>(kMockEmbeddingDim, 0.0));

    const char* samples[] = {"one", "two words", "Unicode émoji ß tokens",
                             "a a a a a", "1 2 3 4 5 6 7 8 9 10"};
    for (const char* s : samples) {
        double norm = 0.0;
        for (double x : mock_embedding(s)) norm += x * x;
        CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-9);
    }
}

TEST_CASE("embed_texts preserves order and truncates") {
    ProviderConfig cfg;  // mock
    SUBCASE("order preservation under permutation") {
        std::vector<std::string> texts = {"alpha", "beta", "gamma", "delta"};
        EmbeddingBatch batch;
        batch.texts = texts;
        auto result = embed_texts(cfg, batch);
        REQUIRE(result.vectors.size() == texts.size());
        for (std::size_t i = 0; i < texts.size(); ++i) {
            CHECK(result.vectors[i] == mock_embedding(texts[i]));
        }
        std::reverse(batch.texts.begin(), batch.texts.end());
        auto reversed = embed_texts(cfg, batch);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            CHECK(reversed.vectors[i] == mock_embedding(batch.texts[i]));
        }
    }
    SUBCASE("identical texts embed identically") {
        EmbeddingBatch batch;
        batch.texts = {"x", "x"};
        auto result = embed_texts(cfg, batch);
        CHECK(result.vectors[0] == result.vectors[1]);
    }
    SUBCASE("truncation happens before embedding and is counted") {
        EmbeddingBatch batch;
        batch.texts = {"abcdefgh ij", "short"};
        batch.max_chars = 5;
        auto result = embed_texts(cfg, batch);
        CHECK(result.truncated == 1);
        CHECK(result.vectors[0] == mock_embedding("abcde"));
        CHECK(result.vectors[1] == mock_embedding("short"));
    }
    SUBCASE("truncation counts scalar values") {
        EmbeddingBatch batch;
        batch.texts = {"\xCE\xB1\xCE\xB2\xCE\xB3\xCE\xB4\xCE\xB5"};  // 5 chars
        batch.max_chars = 4;
        auto result = embed_texts(cfg, batch);
        CHECK(result.truncated == 1);
        CHECK(result.vectors[0] ==
              mock_embedding("\xCE\xB1\xCE\xB2\xCE\xB3\xCE\xB4"));
    }
    SUBCASE("batch slicing is reported") {
        EmbeddingBatch batch;
        batch.texts = {"a", "b", "c", "d", "e"};
        batch.batch_size = 2;
        auto result = embed_texts(cfg, batch);
        CHECK(result.batches == 3);
        CHECK(result.vectors.size() == 5);
    }
    SUBCASE("empty input is rejected") {
        EmbeddingBatch batch;
        try {
            embed_texts(cfg, batch);
            FAIL("expected invalid_argument");
        } catch (const RagError& e) {
            CHECK(e.code() == ErrorCode::invalid_argument);
        }
    }
}

TEST_CASE("remote provider requires its API key env") {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::remote;
    cfg.base_url = "http://127.0.0.1:1/v1";
    cfg.api_key_env = "RAGKIT_TEST_KEY_DEFINITELY_UNSET";
    EmbeddingBatch batch;
    batch.texts = {"hi"};
    try {
        embed_texts(cfg, batch);
        FAIL("expected AuthMissing");
    } catch (const RagError& e) {
        CHECK(e.code() == ErrorCode::auth_missing);
    }
}

// ---------------------------------------------------------------------------
// Retry behaviour with a scripted attempt and recorded sleeps.

TEST_CASE("call_with_retry") {
    RetryPolicy policy;
    policy.max_retries = 5;
    std::vector<double> sleeps;
    auto record = [&](double s) { sleeps.push_back(s); };

    SUBCASE("first-try success makes one call") {
        int calls = 0;
        auto result = call_with_retry(
            [&] {
                ++calls;
                return 7;
            },
            policy, record, 1);
        CHECK(result == 7);
        CHECK(calls == 1);
        CHECK(sleeps.empty());
    }
    SUBCASE("two 429s then success: three calls") {
        int calls = 0;
        auto result = call_with_retry(
            [&]() -> std::string {
                ++calls;
                if (calls <= 2) throw ProviderError(429, "rate limited", true);
                return "ok";
            },
            policy, record, 1);
        CHECK(result == "ok");
        CHECK(calls == 3);
        CHECK(sleeps.size() == 2);
    }
    SUBCASE("persistent 500 with max_retries 2 fails after three calls") {
        policy.max_retries = 2;
        int calls = 0;
        try {
            call_with_retry(
                [&]() -> int {
                    ++calls;
                    throw ProviderError(500, "boom", true);
                },
                policy, record, 1);
            FAIL("expected ProviderError");
        } catch (const ProviderError& e) {
            CHECK(calls == 3);
            CHECK(e.attempts() == 3);
            CHECK(e.status() == 500);
        }
    }
    SUBCASE("non-retryable 404 surfaces immediately") {
        int calls = 0;
        try {
            call_with_retry(
                [&]() -> int {
                    ++calls;
                    throw ProviderError(404, "not found", false);
                },
                policy, record, 1);
            FAIL("expected ProviderError");
        } catch (const ProviderError& e) {
            CHECK(calls == 1);
            CHECK(e.attempts() == 1);
        }
    }
    SUBCASE("retry=false disables retries") {
        policy.retry = false;
        int calls = 0;
        try {
            call_with_retry(
                [&]() -> int {
                    ++calls;
                    throw ProviderError(503, "unavailable", true);
                },
                policy, record, 1);
            FAIL("expected ProviderError");
        } catch (const ProviderError&) {
            CHECK(calls == 1);
        }
    }
    SUBCASE("backoff caps are non-decreasing up to 30s and bound the sleeps") {
        double prev = 0.0;
        for (int attempt = 1; attempt <= 12; ++attempt) {
            double cap = retry_backoff_cap(policy, attempt);
            CHECK(cap >= prev);
            CHECK(cap <= 30.0);
            prev = cap;
        }
        CHECK(retry_backoff_cap(policy, 1) == 0.5);
        CHECK(retry_backoff_cap(policy, 2) == 1.0);
        CHECK(retry_backoff_cap(policy, 7) == 30.0);  // 0.5 * 2^6 = 32 -> cap

        policy.max_retries = 6;
        int calls = 0;
        sleeps.clear();
        try {
            call_with_retry(
                [&]() -> int {
                    ++calls;
                    throw ProviderError(500, "x", true);
                },
                policy, record, 42);
        } catch (const ProviderError&) {
        }
        REQUIRE(sleeps.size() == 6);
        for (std::size_t i = 0; i < sleeps.size(); ++i) {
            CHECK(sleeps[i] >= 0.0);
            CHECK(sleeps[i] <= retry_backoff_cap(policy, static_cast<int>(i) + 1));
        }
    }
}

// ---------------------------------------------------------------------------
// Mock chat protocol

TEST_CASE("mock chat dispatches on the TASK tag") {
    ProviderConfig cfg;  // mock
    SUBCASE("RAG_ANSWER picks a question-relevant context sentence") {
        ChatRequest req;
        req.user_prompt =
            "TASK: RAG_ANSWER\n\nContext:\n"
            "[1] The Eiffel Tower is in Paris. Paris is the capital of France.\n"
            "[2] Bolivia exports minerals.\n"
            "\nQuestion: What is the capital of France?\n\n"
            "Answer using only the context above. If the context is "
            "insufficient, say so.";
        auto answer = chat_complete(cfg, req);
        CHECK(answer == "Paris is the capital of France.");
        CHECK(chat_complete(cfg, req) == answer);  // pure function of the prompt
    }
    SUBCASE("RAG_ANSWER with empty context admits insufficiency") {
        ChatRequest req;
        req.user_prompt =
            "TASK: RAG_ANSWER\n\nContext:\n[none]\n\nQuestion: Anything?\n\n"
            "Answer using only the context above. If the context is "
            "insufficient, say so.";
        auto answer = chat_complete(cfg, req);
        CHECK(answer ==
              "The provided context does not contain enough information to "
              "answer.");
    }
    SUBCASE("untagged prompts are rejected") {
        ChatRequest req;
        req.user_prompt = "Just answer me.";
        try {
            chat_complete(cfg, req);
            FAIL("expected MockUnknownTask");
        } catch (const RagError& e) {
            CHECK(e.code() == ErrorCode::mock_unknown_task);
        }
    }
    SUBCASE("unknown task tag is rejected") {
        ChatRequest req;
        req.user_prompt = "TASK: JUGGLE\n\nwhatever";
        try {
            chat_complete(cfg, req);
            FAIL("expected MockUnknownTask");
        } catch (const RagError& e) {
            CHECK(e.code() == ErrorCode::mock_unknown_task);
        }
    }
}

TEST_CASE("mock judge handlers") {
    ProviderConfig cfg;
    auto ask = [&](const std::string& prompt) {
        ChatRequest req;
        req.user_prompt = prompt;
        return json::parse(chat_complete(cfg, req));
    };

    SUBCASE("verdict 1 when a content token of the target appears in context") {
        auto r = ask(
            "TASK: CP_VERDICT\n\nQUESTION:\nWhat pulls things down?\n\n"
            "ANSWER:\nGravity pulls objects.\n\nCONTEXT:\nGravity is a force.\n\n"
            "Reply with only this JSON object: {\"verdict\": 0 or 1}.");
        CHECK(r["verdict"] == 1);
    }
    SUBCASE("verdict 0 when no content token matches") {
        auto r = ask(
            "TASK: CP_VERDICT\n\nQUESTION:\nQ?\n\nANSWER:\nGravity pulls "
            "objects.\n\nCONTEXT:\nBirds sing at dawn.\n\n"
            "Reply with only this JSON object: {\"verdict\": 0 or 1}.");
        CHECK(r["verdict"] == 0);
    }
    SUBCASE("short tokens are not content tokens") {
        auto r = ask(
            "TASK: CR_SENTENCE\n\nSENTENCE:\nIt is so.\n\nCONTEXT:\nIt is so "
            "indeed.\n\nReply with only this JSON object: {\"verdict\": 0 or 1}.");
        // every target token is shorter than 4 characters
        CHECK(r["verdict"] == 0);
    }
    SUBCASE("FF_DECOMPOSE splits the answer into sentences") {
        auto r = ask(
            "TASK: FF_DECOMPOSE\n\nANSWER:\nMercury is hot. Venus is cloudy.\n\n"
            "Reply with only this JSON object: {\"statements\": [\"...\"]}.");
        auto statements = r["statements"].get<std::vector<std::string>>();
        CHECK(statements ==
              std::vector<std::string>{"Mercury is hot.", "Venus is cloudy."});
        CHECK(statements ==
              text::split_sentences("Mercury is hot. Venus is cloudy."));
    }
    SUBCASE("AR_REVERSE affixes question templates to the first sentence") {
        auto r = ask(
            "TASK: AR_REVERSE\n\nANSWER:\nParis is the capital. It is "
            "large.\n\nReply with only this JSON object: {\"questions\": "
            "[\"q1\", \"q2\", \"q3\"]}.");
        auto questions = r["questions"].get<std::vector<std::string>>();
        REQUIRE(questions.size() == 3);
        CHECK(questions[0] == "What is Paris is the capital.?");
        CHECK(questions[1] == "Where is Paris is the capital.?");
        CHECK(questions[2] == "Why is Paris is the capital.?");
    }
}

// ---------------------------------------------------------------------------
// Remote wire format against a local stub server.

namespace {

struct StubServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> embedding_requests{0};
    std::atomic<int> chat_requests{0};
    std::atomic<int> fail_next{0};  // respond 500 to this many requests

    StubServer() {
        server.Post("/v1/embeddings", [this](const httplib::Request& req,
                                             httplib::Response& res) {
            if (fail_next.fetch_sub(1) > 0) {
                res.status = 500;
                return;
            }
            fail_next = 0;
            ++embedding_requests;
            auto body = json::parse(req.body);
            json data = json::array();
            std::size_t i = 0;
            for (const auto& text : body["input"]) {
                // dimension-3 stub embedding: [len, 1, 0]
                data.push_back(
                    {{"index", i++},
                     {"embedding", {double(text.get<std::string>().size()), 1.0, 0.0}}});
            }
            res.set_content(json{{"data", data}}.dump(), "application/json");
        });
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            ++chat_requests;
            auto body = json::parse(req.body);
            last_chat_body = body;
            last_auth = req.get_header_value("Authorization");
            json reply = {
                {"choices",
                 json::array({{{"message",
                                {{"role", "assistant"},
                                 {"content", "stub reply to " +
                                                 body["model"].get<std::string>()}}}}})}};
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread.join();
    }

    json last_chat_body;
    std::string last_auth;
};

}  // namespace

TEST_CASE("remote provider round-trip against a stub endpoint") {
    StubServer stub;
    setenv("RAGKIT_TEST_KEY", "sk-test-123", 1);
    ProviderConfig cfg;
    cfg.kind = ProviderKind::remote;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(stub.port) + "/v1";
    cfg.api_key_env = "RAGKIT_TEST_KEY";
    cfg.timeout_seconds = 5.0;

    SUBCASE("embeddings are batched and ordered") {
        EmbeddingBatch batch;
        batch.texts = {"a", "bb", "ccc"};
        batch.batch_size = 2;
        auto result = embed_texts(cfg, batch);
        CHECK(result.batches == 2);
        CHECK(stub.embedding_requests == 2);
        REQUIRE(result.vectors.size() == 3);
        CHECK(result.vectors[0] == std::vector<double>{1.0, 1.0, 0.0});
        CHECK(result.vectors[1] == std::vector<double>{2.0, 1.0, 0.0});
        CHECK(result.vectors[2] == std::vector<double>{3.0, 1.0, 0.0});
    }
    SUBCASE("chat carries auth, model, temperature, and seed") {
        ChatRequest req;
        req.system_prompt = "be terse";
        req.user_prompt = "hello";
        req.temperature = 0.0;
        req.seed = 42;
        auto reply = chat_complete(cfg, req);
        CHECK(reply == "stub reply to gpt-4o-mini");
        CHECK(stub.last_auth == "Bearer sk-test-123");
        CHECK(stub.last_chat_body["seed"] == 42);
        CHECK(stub.last_chat_body["temperature"] == 0.0);
        CHECK(stub.last_chat_body["messages"][0]["role"] == "system");
        CHECK(stub.last_chat_body["messages"][1]["content"] == "hello");
    }
    SUBCASE("a transient 500 is retried") {
        stub.fail_next = 1;
        EmbeddingBatch batch;
        batch.texts = {"zz"};
        auto result = embed_texts(cfg, batch);
        REQUIRE(result.vectors.size() == 1);
        CHECK(result.vectors[0] == std::vector<double>{2.0, 1.0, 0.0});
    }
    SUBCASE("unreachable endpoint fails with provider_error after retries") {
        ProviderConfig bad = cfg;
        bad.base_url = "http://127.0.0.1:1/v1";
        bad.retry = false;
        EmbeddingBatch batch;
        batch.texts = {"zz"};
        try {
            embed_texts(bad, batch);
            FAIL("expected ProviderError");
        } catch (const ProviderError& e) {
            CHECK(e.code() == ErrorCode::provider_error);
            CHECK(e.status() == 0);
        }
    }
}
