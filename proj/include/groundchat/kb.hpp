#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "groundchat/chunker.hpp"
#include "groundchat/clock.hpp"
#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"

namespace groundchat::kb {

using ingest::SourceRef;

// One URL that could not be added.
struct SourceFailure {
    std::string locator;
    ErrorCode code = ErrorCode::internal;
    std::string message;
    std::optional<int> status;
};

struct AddReport {
    std::vector<SourceRef> added;  // input order
    std::vector<SourceFailure> failures;
};

struct ExtractedView {
    SourceRef source;
    std::string text;
};

struct Summary {
    std::size_t source_count = 0;
    std::size_t chunk_count = 0;
    std::size_t token_estimate = 0;
};

struct KbOptions {
    chunker::ChunkPolicy policy;
    ingest::ExtractOptions extract;
    std::size_t fetch_parallelism = 4;
};

// Sources, cached text and chunks for one session. Writers are serialized;
// readers see either the state before or after a whole add/delete.
class KnowledgeBase {
public:
    KnowledgeBase(std::string session_id, KbOptions options, ingest::Fetcher& fetcher, const Clock& clock);

    KnowledgeBase(const KnowledgeBase&) = delete;
    KnowledgeBase& operator=(const KnowledgeBase&) = delete;

    const std::string& session_id() const noexcept { return session_id_; }
    const chunker::ChunkPolicy& policy() const noexcept { return options_.policy; }

    // Comma-separated URLs. Throws Error(invalid_url) before touching
    // anything if a piece is not an http(s) URL. Fetch and extraction
    // failures are reported per URL; the others are still added.
    AddReport add_url_sources(std::string_view input);

    // Throws Error(empty_upload), extraction errors.
    SourceRef add_pdf_source(const std::string& filename, std::string_view bytes);

    // Text of one source or all of them, from the cache.
    // Throws Error(unknown_source).
    std::vector<ExtractedView> get_extracted_text(const std::optional<std::string>& source_id = std::nullopt) const;

    // Removes the source with its text and chunks. Throws Error(unknown_source).
    Summary delete_extracted(const std::string& source_id);

    bool has_sources() const;
    std::vector<SourceRef> sources() const;
    Summary summary() const;

    // Chunks of one source. Throws Error(unknown_source).
    std::vector<chunker::Chunk> chunks(const std::string& source_id) const;

    // Every chunk in registration order, then chunk index.
    std::vector<chunker::Chunk> all_chunks() const;

    std::uint64_t extraction_count() const noexcept { return extractor_.extraction_count(); }

    // One JSON object per source and line:
    // {"session":…,"source":{"id","kind","locator","added_at"},"text":…,"extracted_at":…}
    std::string to_ndjson() const;

    // Replaces the contents with a snapshot. Chunks are rebuilt from the
    // text; the extraction counter does not move. Throws Error(invalid_argument)
    // on malformed lines.
    void restore_ndjson(std::string_view ndjson);

    // Atomic write (temp file + rename) / read of <dir>/<session>.ndjson.
    void save_snapshot(const std::filesystem::path& dir) const;
    // False when there is no snapshot file.
    bool load_snapshot(const std::filesystem::path& dir);

private:
    struct Entry {
        SourceRef source;
        ingest::ExtractedDocument document;
        std::vector<chunker::Chunk> chunks;
    };

    std::string new_source_id();
    Entry build(SourceRef source, const ingest::RawDocument& raw);
    void commit(Entry entry);
    const Entry& find(const std::string& source_id) const;

    std::string session_id_;
    KbOptions options_;
    ingest::Fetcher* fetcher_;
    const Clock* clock_;
    ingest::Extractor extractor_;

    std::mutex writer_;
    mutable std::shared_mutex state_;
    std::vector<Entry> entries_;  // registration order
    std::uint64_t id_seq_ = 0;
};

}  // namespace groundchat::kb
