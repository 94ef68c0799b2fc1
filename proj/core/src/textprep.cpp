#include "ragkit/textprep.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "ragkit/errors.hpp"
#include "ragkit/utf8.hpp"
#include "ragkit/util.hpp"

namespace fs = std::filesystem;

namespace ragkit::text {

namespace {

bool is_hspace(char c) { return c == ' ' || c == '\t'; }

bool is_space_like(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string strip_nul(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '\0') out += c;
    }
    return out;
}

std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RagError(ErrorCode::io_failure, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    out += "'";
    return out;
}

std::string run_extractor(const std::string& command, const std::string& path) {
    std::string cmdline = command + " " + shell_quote(path);
    util::log_debug("extractor: " + cmdline);
    FILE* pipe = popen(cmdline.c_str(), "r");
    if (!pipe) {
        throw RagError(ErrorCode::extractor_failed,
                       "could not start extractor: " + command);
    }
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) {
        out.append(buf, n);
    }
    int status = pclose(pipe);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
        throw RagError(ErrorCode::extractor_failed,
                       "extractor exited with status " + std::to_string(code) +
                           " for " + path);
    }
    return out;
}

}  // namespace

ChunkingStrategy parse_strategy(std::string_view name) {
    if (name == "character") return ChunkingStrategy::character;
    if (name == "sentence") return ChunkingStrategy::sentence;
    throw RagError(ErrorCode::unknown_strategy,
                   "unknown chunking strategy: " + std::string(name));
}

const char* strategy_name(ChunkingStrategy strategy) {
    return strategy == ChunkingStrategy::character ? "character" : "sentence";
}

RawDocument load_document(const std::string& path, const LoadOptions& opts) {
    fs::path p(path);
    std::error_code ec;
    if (!fs::exists(p, ec) || fs::is_directory(p, ec)) {
        throw RagError(ErrorCode::missing_file, "no such file: " + path);
    }

    std::string ext = util::ascii_lower(p.extension().string());
    std::string bytes;
    bool from_extractor = false;
    if (ext == ".pdf") {
        if (!opts.extractor_command || opts.extractor_command->empty()) {
            throw RagError(ErrorCode::extractor_unavailable,
                           "no extractor_command configured for " + path);
        }
        bytes = run_extractor(*opts.extractor_command, path);
        from_extractor = true;
    } else {
        bytes = read_file_bytes(p);
    }

    if (!utf8::is_valid(bytes)) {
        // Extractor output is always repaired; plain text only with --lossy.
        if (from_extractor || opts.lossy) {
            bytes = utf8::replace_invalid(bytes);
        } else {
            throw RagError(ErrorCode::invalid_encoding,
                           path + " is not valid UTF-8 (pass --lossy to replace "
                                  "invalid bytes)");
        }
    }

    RawDocument doc;
    doc.path = path;
    doc.text = strip_nul(bytes);
    doc.byte_size = static_cast<std::size_t>(fs::file_size(p, ec));
    return doc;
}

std::string clean_text(std::string_view raw) {
    // CRLF / CR -> LF
    std::string s;
    s.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\r') {
            if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
            s += '\n';
        } else {
            s += c;
        }
    }

    // collapse runs of spaces/tabs to a single space
    std::string t;
    t.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (is_hspace(s[i])) {
            while (i < s.size() && is_hspace(s[i])) ++i;
            t += ' ';
        } else {
            t += s[i++];
        }
    }

    // drop spaces adjacent to line breaks
    std::string u;
    u.reserve(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] == ' ') {
            bool prev_nl = !u.empty() && u.back() == '\n';
            bool next_nl = k + 1 < t.size() && t[k + 1] == '\n';
            if (prev_nl || next_nl) continue;
        }
        u += t[k];
    }

    // collapse runs of 3+ LF to exactly two
    std::string v;
    v.reserve(u.size());
    i = 0;
    while (i < u.size()) {
        if (u[i] == '\n') {
            std::size_t j = i;
            while (j < u.size() && u[j] == '\n') ++j;
            v.append(std::min<std::size_t>(j - i, 2), '\n');
            i = j;
        } else {
            v += u[i++];
        }
    }

    // trim
    std::size_t b = 0, e = v.size();
    while (b < e && is_space_like(v[b])) ++b;
    while (e > b && is_space_like(v[e - 1])) --e;
    return v.substr(b, e - b);
}

std::vector<ChunkSpan> chunk_characters(std::string_view text,
                                        std::size_t chunk_size,
                                        std::size_t chunk_overlap) {
    if (chunk_size == 0 || chunk_overlap >= chunk_size) {
        throw RagError(ErrorCode::invalid_chunking,
                       "chunk_overlap must be smaller than chunk_size and "
                       "chunk_size positive (size=" +
                           std::to_string(chunk_size) +
                           ", overlap=" + std::to_string(chunk_overlap) + ")");
    }
    auto offsets = utf8::codepoint_offsets(text);
    const std::size_t len = offsets.size() - 1;
    const std::size_t step = chunk_size - chunk_overlap;

    std::vector<ChunkSpan> spans;
    std::size_t pos = 0;
    while (pos < len) {
        std::size_t end = std::min(pos + chunk_size, len);
        ChunkSpan span;
        span.index = spans.size();
        span.start = pos;
        span.end = end;
        span.text = std::string(
            text.substr(offsets[pos], offsets[end] - offsets[pos]));
        spans.push_back(std::move(span));
        if (end == len) break;
        pos += step;
    }
    return spans;
}

std::vector<ChunkSpan> sentence_spans(std::string_view text) {
    auto offsets = utf8::codepoint_offsets(text);
    const std::size_t len = offsets.size() - 1;

    auto byte_at = [&](std::size_t cp) { return text[offsets[cp]]; };
    auto is_term = [&](std::size_t cp) {
        char c = byte_at(cp);
        return c == '.' || c == '?' || c == '!';
    };
    auto is_ws = [&](std::size_t cp) {
        unsigned char c = static_cast<unsigned char>(byte_at(cp));
        return c < 0x80 && is_space_like(static_cast<char>(c));
    };

    std::vector<std::pair<std::size_t, std::size_t>> raw;
    std::size_t start = 0, i = 0;
    while (i < len) {
        if (is_term(i)) {
            std::size_t j = i;
            while (j < len && is_term(j)) ++j;
            if (j == len || is_ws(j)) {
                raw.emplace_back(start, j);
                while (j < len && is_ws(j)) ++j;
                start = i = j;
                continue;
            }
            i = j;
        } else {
            ++i;
        }
    }
    if (start < len) raw.emplace_back(start, len);

    std::vector<ChunkSpan> spans;
    for (auto [b, e] : raw) {
        while (b < e && is_ws(b)) ++b;
        while (e > b && is_ws(e - 1)) --e;
        if (b >= e) continue;
        ChunkSpan span;
        span.index = spans.size();
        span.start = b;
        span.end = e;
        span.text = std::string(text.substr(offsets[b], offsets[e] - offsets[b]));
        spans.push_back(std::move(span));
    }
    return spans;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    for (auto& span : sentence_spans(text)) {
        out.push_back(std::move(span.text));
    }
    return out;
}

std::vector<ChunkSpan> chunk_document(const RawDocument& doc,
                                      ChunkingStrategy strategy,
                                      std::size_t chunk_size,
                                      std::size_t chunk_overlap) {
    std::string cleaned = clean_text(doc.text);
    switch (strategy) {
        case ChunkingStrategy::character:
            return chunk_characters(cleaned, chunk_size, chunk_overlap);
        case ChunkingStrategy::sentence:
            return sentence_spans(cleaned);
    }
    throw RagError(ErrorCode::unknown_strategy, "unknown chunking strategy");
}

}  // namespace ragkit::text
