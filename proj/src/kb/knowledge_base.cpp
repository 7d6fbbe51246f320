#include "groundchat/kb.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "groundchat/utf8.hpp"

namespace groundchat::kb {

KnowledgeBase::KnowledgeBase(std::string session_id, KbOptions options, ingest::Fetcher& fetcher, const Clock& clock)
    : session_id_(std::move(session_id)),
      options_(std::move(options)),
      fetcher_(&fetcher),
      clock_(&clock),
      extractor_(options_.extract, clock) {
    options_.policy.validate();
    if (options_.fetch_parallelism == 0) options_.fetch_parallelism = 1;
}

std::string KnowledgeBase::new_source_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[24];
    for (;;) {
        std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(rng()));
        std::string id(buf);
        std::shared_lock lock(state_);
        if (std::none_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.source.id == id; })) {
            return id;
        }
    }
}

KnowledgeBase::Entry KnowledgeBase::build(SourceRef source, const ingest::RawDocument& raw) {
    Entry entry;
    entry.document = extractor_.extract(source, raw);
    entry.chunks = chunker::split(entry.document.normalized_text, options_.policy, source.id);
    entry.source = std::move(source);
    return entry;
}

void KnowledgeBase::commit(Entry entry) {
    std::unique_lock lock(state_);
    entries_.push_back(std::move(entry));
}

const KnowledgeBase::Entry& KnowledgeBase::find(const std::string& source_id) const {
    for (const auto& e : entries_) {
        if (e.source.id == source_id) return e;
    }
    throw Error(ErrorCode::unknown_source, "no source with id " + source_id);
}

AddReport KnowledgeBase::add_url_sources(std::string_view input) {
    const auto urls = ingest::parse_url_list(input);
    AddReport report;
    if (urls.empty()) return report;

    std::lock_guard writer(writer_);

    struct Slot {
        std::optional<Entry> entry;
        std::optional<SourceFailure> failure;
    };
    std::vector<Slot> slots(urls.size());
    std::vector<std::string> ids;
    ids.reserve(urls.size());
    for (std::size_t i = 0; i < urls.size(); ++i) {
        std::string id;
        do {
            id = new_source_id();
        } while (std::find(ids.begin(), ids.end(), id) != ids.end());
        ids.push_back(std::move(id));
    }

    auto work = [&](std::size_t i) {
        SourceRef ref{ids[i], ingest::SourceKind::url, urls[i], clock_->now()};
        try {
            auto raw = fetcher_->fetch(urls[i]);
            raw.source_id = ref.id;
            slots[i].entry = build(std::move(ref), raw);
        } catch (const Error& e) {
            slots[i].failure = SourceFailure{urls[i], e.code(), e.what(), e.status()};
        } catch (const std::exception& e) {
            slots[i].failure = SourceFailure{urls[i], ErrorCode::internal, e.what(), std::nullopt};
        }
    };

    const auto workers = std::min(options_.fetch_parallelism, urls.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < urls.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < urls.size();) work(i);
            });
        }
    }

    // Commit in input order regardless of which fetch finished first.
    for (auto& slot : slots) {
        if (slot.entry) {
            report.added.push_back(slot.entry->source);
            commit(std::move(*slot.entry));
        } else {
            report.failures.push_back(std::move(*slot.failure));
        }
    }
    return report;
}

SourceRef KnowledgeBase::add_pdf_source(const std::string& filename, std::string_view bytes) {
    if (bytes.empty()) throw Error(ErrorCode::empty_upload, "uploaded file " + filename + " is empty");
    std::lock_guard writer(writer_);
    SourceRef ref{new_source_id(), ingest::SourceKind::pdf, filename, clock_->now()};
    ingest::RawDocument raw{ref.id, ingest::Media::pdf, std::string(bytes)};
    auto entry = build(ref, raw);
    commit(std::move(entry));
    return ref;
}

std::vector<ExtractedView> KnowledgeBase::get_extracted_text(const std::optional<std::string>& source_id) const {
    std::shared_lock lock(state_);
    std::vector<ExtractedView> out;
    if (source_id) {
        const auto& e = find(*source_id);
        out.push_back({e.source, e.document.normalized_text});
        return out;
    }
    for (const auto& e : entries_) out.push_back({e.source, e.document.normalized_text});
    return out;
}

Summary KnowledgeBase::delete_extracted(const std::string& source_id) {
    std::lock_guard writer(writer_);
    {
        std::unique_lock lock(state_);
        auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Entry& e) { return e.source.id == source_id; });
        if (it == entries_.end()) throw Error(ErrorCode::unknown_source, "no source with id " + source_id);
        entries_.erase(it);
    }
    return summary();
}

bool KnowledgeBase::has_sources() const {
    std::shared_lock lock(state_);
    return !entries_.empty();
}

std::vector<SourceRef> KnowledgeBase::sources() const {
    std::shared_lock lock(state_);
    std::vector<SourceRef> out;
    for (const auto& e : entries_) out.push_back(e.source);
    return out;
}

Summary KnowledgeBase::summary() const {
    std::shared_lock lock(state_);
    Summary s;
    s.source_count = entries_.size();
    for (const auto& e : entries_) {
        s.chunk_count += e.chunks.size();
        for (const auto& c : e.chunks) s.token_estimate += c.token_estimate;
    }
    return s;
}

std::vector<chunker::Chunk> KnowledgeBase::chunks(const std::string& source_id) const {
    std::shared_lock lock(state_);
    return find(source_id).chunks;
}

std::vector<chunker::Chunk> KnowledgeBase::all_chunks() const {
    std::shared_lock lock(state_);
    std::vector<chunker::Chunk> out;
    for (const auto& e : entries_) out.insert(out.end(), e.chunks.begin(), e.chunks.end());
    return out;
}

std::string KnowledgeBase::to_ndjson() const {
    std::shared_lock lock(state_);
    std::string out;
    for (const auto& e : entries_) {
        nlohmann::ordered_json line;
        line["session"] = session_id_;
        line["source"] = {{"id", e.source.id},
                          {"kind", std::string(ingest::to_string(e.source.kind))},
                          {"locator", e.source.locator},
                          {"added_at", e.source.added_at}};
        line["text"] = e.document.normalized_text;
        line["extracted_at"] = e.document.extracted_at;
        out += line.dump();
        out += '\n';
    }
    return out;
}

void KnowledgeBase::restore_ndjson(std::string_view ndjson) {
    std::vector<Entry> entries;
    std::size_t line_no = 0;
    for (std::size_t start = 0; start < ndjson.size();) {
        auto nl = ndjson.find('\n', start);
        if (nl == std::string_view::npos) nl = ndjson.size();
        const auto line = ndjson.substr(start, nl - start);
        start = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        const auto bad = [&](const std::string& why) {
            return Error(ErrorCode::invalid_argument, "snapshot line " + std::to_string(line_no) + ": " + why);
        };
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (!j.is_object()) throw bad("not a JSON object");
        try {
            Entry e;
            const auto& src = j.at("source");
            e.source.id = src.at("id").get<std::string>();
            e.source.kind = ingest::parse_source_kind(src.at("kind").get<std::string>());
            e.source.locator = src.at("locator").get<std::string>();
            e.source.added_at = src.at("added_at").get<Timestamp>();
            e.document.source_id = e.source.id;
            e.document.normalized_text = j.at("text").get<std::string>();
            if (e.document.normalized_text.empty() || !ingest::is_normalized(e.document.normalized_text)) {
                throw bad("text is not normalized");
            }
            e.document.char_count = utf8::length(e.document.normalized_text);
            e.document.token_estimate = chunker::estimate_tokens(e.document.normalized_text);
            e.document.extracted_at = j.at("extracted_at").get<Timestamp>();
            if (std::any_of(entries.begin(), entries.end(), [&](const Entry& o) { return o.source.id == e.source.id; })) {
                throw bad("duplicate source id " + e.source.id);
            }
            e.chunks = chunker::split(e.document.normalized_text, options_.policy, e.source.id);
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw bad(ex.what());
        }
    }

    std::lock_guard writer(writer_);
    std::unique_lock lock(state_);
    entries_ = std::move(entries);
}

void KnowledgeBase::save_snapshot(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    const auto target = dir / (session_id_ + ".ndjson");
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << to_ndjson();
        if (!out) throw Error(ErrorCode::internal, "cannot write snapshot " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

bool KnowledgeBase::load_snapshot(const std::filesystem::path& dir) {
    const auto path = dir / (session_id_ + ".ndjson");
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    restore_ndjson(ss.str());
    return true;
}

}  // namespace groundchat::kb
