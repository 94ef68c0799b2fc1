#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "ragkit/llm.hpp"
#include "ragkit/ragas.hpp"
#include "ragkit/textprep.hpp"
#include "ragkit/vecstore.hpp"

namespace {

std::string synthetic_text(std::size_t chars) {
    static const char* words[] = {"chunk", "vector", "retrieval", "corpus",
                                  "window", "overlap", "sediment", "archive"};
    std::mt19937 rng(7);
    std::string text;
    while (text.size() < chars) {
        text += words[rng() % 8];
        text += (rng() % 12 == 0) ? ". " : " ";
        if (rng() % 40 == 0) text += "\n\n";
    }
    return text;
}

void ChunkCharacters(benchmark::State& state) {
    auto text = synthetic_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto spans = ragkit::text::chunk_characters(text, 3200, 960);
        benchmark::DoNotOptimize(spans);
    }
    state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(ChunkCharacters)->Range(1 << 12, 1 << 20);

void CleanText(benchmark::State& state) {
    auto text = synthetic_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto cleaned = ragkit::text::clean_text(text);
        benchmark::DoNotOptimize(cleaned);
    }
    state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(CleanText)->Range(1 << 12, 1 << 20);

void SplitSentences(benchmark::State& state) {
    auto text = ragkit::text::clean_text(
        synthetic_text(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) {
        auto sentences = ragkit::text::split_sentences(text);
        benchmark::DoNotOptimize(sentences);
    }
}
BENCHMARK(SplitSentences)->Range(1 << 12, 1 << 18);

void MockEmbedding(benchmark::State& state) {
    auto text = synthetic_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto v = ragkit::llm::mock_embedding(text);
        benchmark::DoNotOptimize(v);
    }
    state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(MockEmbedding)->Range(1 << 8, 1 << 16);

void CosineScan(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const std::size_t dim = 16;
    std::vector<std::vector<double>> records(
        static_cast<std::size_t>(state.range(0)), std::vector<double>(dim));
    for (auto& r : records) {
        for (auto& x : r) x = dist(rng);
    }
    std::vector<double> query(dim);
    for (auto& x : query) x = dist(rng);

    for (auto _ : state) {
        double best = -2.0;
        for (const auto& r : records) {
            best = std::max(best, ragkit::store::cosine_similarity(query, r));
        }
        benchmark::DoNotOptimize(best);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(CosineScan)->Range(1 << 8, 1 << 16);

void AveragePrecision(benchmark::State& state) {
    std::mt19937 rng(9);
    std::vector<int> verdicts(static_cast<std::size_t>(state.range(0)));
    for (auto& v : verdicts) v = static_cast<int>(rng() % 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ragkit::eval::average_precision(verdicts));
    }
}
BENCHMARK(AveragePrecision)->Range(8, 1 << 12);

}  // namespace

BENCHMARK_MAIN();
