#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit::text {

struct RawDocument {
    std::string path;
    std::string text;       // extracted text, NUL-free
    std::size_t byte_size = 0;  // size of the source file on disk
};

/// One chunk of a cleaned document. Offsets count Unicode scalar values,
/// not bytes; `text` equals the cleaned document substring [start, end).
struct ChunkSpan {
    std::size_t index = 0;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string text;
};

enum class ChunkingStrategy { character, sentence };

/// Parses "character" / "sentence"; anything else is unknown_strategy.
ChunkingStrategy parse_strategy(std::string_view name);
const char* strategy_name(ChunkingStrategy strategy);

struct LoadOptions {
    /// Invoked as `<command> <path>` for .pdf inputs; must write UTF-8 text
    /// to stdout and exit 0.
    std::optional<std::string> extractor_command;
    /// Allow invalid UTF-8 in plain-text files to be replaced with U+FFFD.
    bool lossy = false;
};

RawDocument load_document(const std::string& path, const LoadOptions& opts = {});

/// Whitespace normalization: CRLF/CR -> LF, runs of 3+ LF collapsed to two,
/// runs of spaces/tabs collapsed to one space, spaces/tabs adjacent to LF
/// removed, leading/trailing whitespace trimmed. Idempotent.
std::string clean_text(std::string_view raw);

/// Sliding windows of chunk_size scalar values stepping by
/// chunk_size - chunk_overlap. The final window may be shorter; iteration
/// stops once a window reaches the end of the text.
std::vector<ChunkSpan> chunk_characters(std::string_view text,
                                        std::size_t chunk_size,
                                        std::size_t chunk_overlap);

/// Splits after each maximal run of `.?!` followed by whitespace or
/// end-of-text. Terminators stay with their sentence; results are trimmed
/// and non-empty. Text without terminal punctuation yields one sentence.
std::vector<std::string> split_sentences(std::string_view text);

/// Offset-bearing variant of split_sentences over the same text.
std::vector<ChunkSpan> sentence_spans(std::string_view text);

/// Cleans doc.text then chunks with the selected strategy. Sentence
/// strategy ignores chunk_size/chunk_overlap.
std::vector<ChunkSpan> chunk_document(const RawDocument& doc,
                                      ChunkingStrategy strategy,
                                      std::size_t chunk_size,
                                      std::size_t chunk_overlap);

}  // namespace ragkit::text
