#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ragkit::store {

/// One embedded chunk as persisted in a collection's .jsonl file. Field
/// names match the on-disk schema exactly.
struct ChunkRecord {
    std::string collection;
    std::string chunk_id;
    std::string text;
    std::vector<double> embedding;
    std::string source_path;
    std::int64_t source_index = 0;
    std::size_t start = 0;  // character offsets into the cleaned document
    std::size_t end = 0;
    std::string created_at;
    std::string embedding_model;
};

struct CollectionInfo {
    std::string name;
    std::size_t record_count = 0;
    std::size_t dimension = 0;
    std::string embedding_model;
};

struct SearchHit {
    std::string chunk_id;
    double score = 0.0;  // cosine similarity, clamped to [-1, 1]
    std::string text;
    std::size_t rank = 0;  // 1-based position in the returned list
};

enum class OpenMode { read_only, read_write };

/// Cosine similarity clamped to [-1, 1]. A zero vector on either side
/// yields 0.0 and sets *zero_vector when provided.
double cosine_similarity(std::span<const double> a, std::span<const double> b,
                         bool* zero_vector = nullptr);

/// Deterministic chunk identifier: hex FNV-1a of the source path, '#',
/// the chunk index within that document.
std::string make_chunk_id(std::string_view source_path, std::int64_t source_index);

/// File-backed multi-collection vector store: manifest.json plus one
/// records .jsonl per collection under <root>/collections/. Writers hold an
/// exclusive lock on <root>/.lock; read-only handles load a snapshot.
class VectorStore {
public:
    static VectorStore open(const std::filesystem::path& root,
                            OpenMode mode = OpenMode::read_only);

    VectorStore(VectorStore&&) noexcept;
    VectorStore& operator=(VectorStore&&) noexcept;
    VectorStore(const VectorStore&) = delete;
    VectorStore& operator=(const VectorStore&) = delete;
    ~VectorStore();

    /// Inserts or replaces records (keyed by chunk_id) in one collection.
    /// The first insert into a new collection fixes its dimension and
    /// embedding model. Returns the number of records written; data is
    /// flushed to disk before returning.
    std::size_t upsert(const std::vector<ChunkRecord>& records);

    /// Full-scan cosine search: sorted by score descending with chunk_id
    /// ascending tiebreak, truncated to top_k, then hits below
    /// score_threshold removed.
    std::vector<SearchHit> search(const std::string& collection,
                                  std::span<const double> query,
                                  std::size_t top_k,
                                  double score_threshold) const;

    std::vector<CollectionInfo> collections() const;  // sorted by name

    /// Removes a collection's records and manifest entry; returns whether
    /// it existed.
    bool remove_collection(const std::string& name);

    bool has_collection(const std::string& name) const;
    const std::vector<ChunkRecord>& records(const std::string& name) const;

    const std::filesystem::path& root() const { return root_; }
    bool writable() const { return mode_ == OpenMode::read_write; }

private:
    struct Collection {
        std::size_t dimension = 0;
        std::string embedding_model;
        std::vector<ChunkRecord> records;
        std::unordered_map<std::string, std::size_t> by_id;
    };

    VectorStore(std::filesystem::path root, OpenMode mode);

    void load();
    void persist_collection(const std::string& name) const;
    void persist_manifest() const;
    const Collection& require_collection(const std::string& name) const;

    std::filesystem::path root_;
    OpenMode mode_ = OpenMode::read_only;
    std::map<std::string, Collection> collections_;
    int lock_fd_ = -1;
};

}  // namespace ragkit::store
