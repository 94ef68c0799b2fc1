#include "ragkit/vecstore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "ragkit/errors.hpp"
#include "ragkit/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ragkit::store {

namespace {

constexpr int kFormatVersion = 1;

bool valid_collection_name(const std::string& name) {
    if (name.empty() || name.size() > 128) return false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
        if (!ok) return false;
    }
    return name != "." && name != "..";
}

json record_to_json(const ChunkRecord& r) {
    json j;
    j["collection"] = r.collection;
    j["chunk_id"] = r.chunk_id;
    j["text"] = r.text;
    j["embedding"] = r.embedding;
    j["source_path"] = r.source_path;
    j["source_index"] = r.source_index;
    j["start"] = r.start;
    j["end"] = r.end;
    j["created_at"] = r.created_at;
    j["embedding_model"] = r.embedding_model;
    return j;
}

ChunkRecord record_from_json(const json& j) {
    ChunkRecord r;
    r.collection = j.at("collection").get<std::string>();
    r.chunk_id = j.at("chunk_id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.embedding = j.at("embedding").get<std::vector<double>>();
    r.source_path = j.at("source_path").get<std::string>();
    r.source_index = j.at("source_index").get<std::int64_t>();
    r.start = j.at("start").get<std::size_t>();
    r.end = j.at("end").get<std::size_t>();
    r.created_at = j.at("created_at").get<std::string>();
    r.embedding_model = j.at("embedding_model").get<std::string>();
    return r;
}

void atomic_write(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw RagError(ErrorCode::io_failure, "cannot write " + tmp.string());
        }
        out << contents;
        out.flush();
        if (!out) {
            throw RagError(ErrorCode::io_failure, "write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw RagError(ErrorCode::io_failure,
                       "rename failed: " + path.string() + ": " + ec.message());
    }
}

std::string collections_checksum(const json& collections) {
    return util::hex64(util::fnv1a64(collections.dump()));
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b,
                         bool* zero_vector) {
    if (a.size() != b.size()) {
        throw RagError(ErrorCode::dimension_mismatch,
                       "cosine_similarity: dimensions " + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        if (zero_vector) *zero_vector = true;
        return 0.0;
    }
    double score = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(score, -1.0, 1.0);
}

std::string make_chunk_id(std::string_view source_path, std::int64_t source_index) {
    return util::hex64(util::fnv1a64(source_path)) + "#" +
           std::to_string(source_index);
}

VectorStore::VectorStore(fs::path root, OpenMode mode)
    : root_(std::move(root)), mode_(mode) {}

VectorStore::VectorStore(VectorStore&& other) noexcept
    : root_(std::move(other.root_)),
      mode_(other.mode_),
      collections_(std::move(other.collections_)),
      lock_fd_(other.lock_fd_) {
    other.lock_fd_ = -1;
}

VectorStore& VectorStore::operator=(VectorStore&& other) noexcept {
    if (this != &other) {
        if (lock_fd_ >= 0) ::close(lock_fd_);
        root_ = std::move(other.root_);
        mode_ = other.mode_;
        collections_ = std::move(other.collections_);
        lock_fd_ = other.lock_fd_;
        other.lock_fd_ = -1;
    }
    return *this;
}

VectorStore::~VectorStore() {
    if (lock_fd_ >= 0) ::close(lock_fd_);  // releases the flock
}

VectorStore VectorStore::open(const fs::path& root, OpenMode mode) {
    VectorStore store(root, mode);
    if (mode == OpenMode::read_write) {
        std::error_code ec;
        fs::create_directories(root / "collections", ec);
        if (ec) {
            throw RagError(ErrorCode::io_failure,
                           "cannot create store at " + root.string());
        }
        fs::path lock_path = root / ".lock";
        store.lock_fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
        if (store.lock_fd_ < 0) {
            throw RagError(ErrorCode::io_failure,
                           "cannot open lock file " + lock_path.string());
        }
        if (::flock(store.lock_fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(store.lock_fd_);
            store.lock_fd_ = -1;
            throw RagError(ErrorCode::lock_held,
                           "another writer holds the store lock at " +
                               root.string());
        }
    }
    store.load();
    return store;
}

void VectorStore::load() {
    fs::path manifest_path = root_ / "manifest.json";
    std::error_code ec;
    if (!fs::exists(manifest_path, ec)) {
        return;  // empty store
    }

    std::ifstream in(manifest_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    json manifest;
    try {
        manifest = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw RagError(ErrorCode::corrupt_manifest,
                       "unreadable manifest: " + std::string(e.what()));
    }
    if (!manifest.is_object() || !manifest.contains("format_version") ||
        manifest["format_version"] != kFormatVersion ||
        !manifest.contains("collections") || !manifest["collections"].is_object()) {
        throw RagError(ErrorCode::corrupt_manifest,
                       "manifest missing required fields");
    }
    if (!manifest.contains("checksum") ||
        manifest["checksum"] != collections_checksum(manifest["collections"])) {
        throw RagError(ErrorCode::corrupt_manifest, "manifest checksum mismatch");
    }

    for (auto& [name, meta] : manifest["collections"].items()) {
        Collection col;
        col.dimension = meta.at("dimension").get<std::size_t>();
        col.embedding_model = meta.at("embedding_model").get<std::string>();
        std::size_t declared = meta.at("record_count").get<std::size_t>();

        fs::path file = root_ / "collections" / (name + ".jsonl");
        std::ifstream rec_in(file, std::ios::binary);
        if (!rec_in) {
            throw RagError(ErrorCode::corrupt_manifest,
                           "missing record file for collection " + name);
        }
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(rec_in, line)) {
            ++line_no;
            if (line.empty()) continue;
            ChunkRecord rec;
            try {
                rec = record_from_json(json::parse(line));
            } catch (const json::exception& e) {
                throw RagError(ErrorCode::corrupt_manifest,
                               file.string() + ":" + std::to_string(line_no) +
                                   ": " + e.what());
            }
            if (rec.embedding.size() != col.dimension) {
                throw RagError(ErrorCode::corrupt_manifest,
                               file.string() + ":" + std::to_string(line_no) +
                                   ": embedding dimension " +
                                   std::to_string(rec.embedding.size()) +
                                   " != declared " + std::to_string(col.dimension));
            }
            col.by_id[rec.chunk_id] = col.records.size();
            col.records.push_back(std::move(rec));
        }
        if (col.records.size() != declared) {
            throw RagError(ErrorCode::corrupt_manifest,
                           "collection " + name + " has " +
                               std::to_string(col.records.size()) +
                               " records, manifest says " +
                               std::to_string(declared));
        }
        collections_.emplace(name, std::move(col));
    }
}

void VectorStore::persist_collection(const std::string& name) const {
    const Collection& col = collections_.at(name);
    std::string contents;
    for (const auto& rec : col.records) {
        contents += record_to_json(rec).dump();
        contents += '\n';
    }
    atomic_write(root_ / "collections" / (name + ".jsonl"), contents);
}

void VectorStore::persist_manifest() const {
    json cols = json::object();
    for (const auto& [name, col] : collections_) {
        cols[name] = {{"dimension", col.dimension},
                      {"embedding_model", col.embedding_model},
                      {"record_count", col.records.size()}};
    }
    json manifest = {{"format_version", kFormatVersion},
                     {"collections", cols},
                     {"checksum", collections_checksum(cols)}};
    atomic_write(root_ / "manifest.json", manifest.dump(2) + "\n");
}

std::size_t VectorStore::upsert(const std::vector<ChunkRecord>& records) {
    if (!writable()) {
        throw RagError(ErrorCode::not_writable, "store opened read-only");
    }
    if (records.empty()) return 0;

    const std::string& name = records.front().collection;
    if (!valid_collection_name(name)) {
        throw RagError(ErrorCode::invalid_argument,
                       "invalid collection name: " + name);
    }
    const std::size_t dim = records.front().embedding.size();
    for (const auto& r : records) {
        if (r.collection != name) {
            throw RagError(ErrorCode::invalid_argument,
                           "upsert batch spans multiple collections");
        }
        if (r.chunk_id.empty()) {
            throw RagError(ErrorCode::invalid_argument, "empty chunk_id");
        }
        if (r.embedding.size() != dim) {
            throw RagError(ErrorCode::dimension_mismatch,
                           "records in batch disagree on dimension");
        }
        for (double x : r.embedding) {
            if (!std::isfinite(x)) {
                throw RagError(ErrorCode::invalid_argument,
                               "non-finite embedding component in " + r.chunk_id);
            }
        }
    }

    auto it = collections_.find(name);
    if (it == collections_.end()) {
        Collection col;
        col.dimension = dim;
        col.embedding_model = records.front().embedding_model;
        it = collections_.emplace(name, std::move(col)).first;
    } else if (it->second.dimension != dim) {
        throw RagError(ErrorCode::dimension_mismatch,
                       "collection " + name + " has dimension " +
                           std::to_string(it->second.dimension) + ", got " +
                           std::to_string(dim));
    }

    Collection& col = it->second;
    for (const auto& r : records) {
        auto pos = col.by_id.find(r.chunk_id);
        if (pos != col.by_id.end()) {
            col.records[pos->second] = r;
        } else {
            col.by_id[r.chunk_id] = col.records.size();
            col.records.push_back(r);
        }
    }

    persist_collection(name);
    persist_manifest();
    return records.size();
}

const VectorStore::Collection& VectorStore::require_collection(
    const std::string& name) const {
    auto it = collections_.find(name);
    if (it == collections_.end()) {
        throw RagError(ErrorCode::unknown_collection,
                       "unknown collection: " + name);
    }
    return it->second;
}

std::vector<SearchHit> VectorStore::search(const std::string& collection,
                                           std::span<const double> query,
                                           std::size_t top_k,
                                           double score_threshold) const {
    const Collection& col = require_collection(collection);
    if (query.size() != col.dimension) {
        throw RagError(ErrorCode::dimension_mismatch,
                       "query dimension " + std::to_string(query.size()) +
                           " != collection dimension " +
                           std::to_string(col.dimension));
    }
    for (double x : query) {
        if (!std::isfinite(x)) {
            throw RagError(ErrorCode::invalid_argument,
                           "non-finite query embedding component");
        }
    }
    if (top_k == 0) {
        throw RagError(ErrorCode::invalid_argument, "top_k must be positive");
    }

    std::vector<SearchHit> hits;
    hits.reserve(col.records.size());
    for (const auto& rec : col.records) {
        SearchHit hit;
        hit.chunk_id = rec.chunk_id;
        hit.score = cosine_similarity(query, rec.embedding);
        hit.text = rec.text;
        hits.push_back(std::move(hit));
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    if (hits.size() > top_k) hits.resize(top_k);
    // threshold applies after top-k truncation
    std::erase_if(hits, [&](const SearchHit& h) { return h.score < score_threshold; });
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
    return hits;
}

std::vector<CollectionInfo> VectorStore::collections() const {
    std::vector<CollectionInfo> out;
    for (const auto& [name, col] : collections_) {
        out.push_back({name, col.records.size(), col.dimension, col.embedding_model});
    }
    return out;  // std::map keeps names sorted
}

bool VectorStore::remove_collection(const std::string& name) {
    if (!writable()) {
        throw RagError(ErrorCode::not_writable, "store opened read-only");
    }
    auto it = collections_.find(name);
    if (it == collections_.end()) return false;
    collections_.erase(it);
    std::error_code ec;
    fs::remove(root_ / "collections" / (name + ".jsonl"), ec);
    persist_manifest();
    return true;
}

bool VectorStore::has_collection(const std::string& name) const {
    return collections_.count(name) > 0;
}

const std::vector<ChunkRecord>& VectorStore::records(const std::string& name) const {
    return require_collection(name).records;
}

}  // namespace ragkit::store
