#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundchat/backend.hpp"
#include "groundchat/clock.hpp"
#include "groundchat/kb.hpp"
#include "groundchat/levels.hpp"
#include "groundchat/model_config.hpp"

namespace groundchat::engine {

enum class Strategy { automatic, stuff, refine };

// "auto", "stuff", "refine".
std::string_view to_string(Strategy s);
// Throws Error(invalid_argument).
Strategy parse_strategy(std::string_view name);

inline constexpr std::size_t kMaxQuestionChars = 4000;

// Throws Error(empty_question) or Error(question_too_long).
void validate_question(std::string_view question);

struct Answer {
    std::string text;
    Strategy strategy_used = Strategy::stuff;
    std::size_t chunks_consulted = 0;
    std::size_t backend_calls = 0;
    std::vector<std::string> sources_used;
    std::uint64_t latency_ms = 0;
};

struct ConversationTurn {
    std::string question;
    Answer answer;
    levels::ProficiencyLevel level = levels::ProficiencyLevel::beginner;
    Timestamp asked_at = 0;
};

// Tokens a stuffed prompt may need: every chunk estimate, one token per
// four joining spaces (rounded up), question and system message.
std::size_t stuff_estimate(const std::vector<chunker::Chunk>& chunks, std::string_view question,
                           std::string_view system_message);

// stuff when stuff_estimate fits the prompt budget (<=), else refine.
Strategy choose_strategy(const std::vector<chunker::Chunk>& chunks, std::string_view question,
                         std::string_view system_message, const ModelConfig& config);

struct AskOptions {
    Strategy strategy = Strategy::automatic;
    // Overrides the session level for this question only.
    std::optional<levels::ProficiencyLevel> level;
    bool stream = false;
    backend::DeltaCallback on_delta;
    // (finished generate calls, chunks in the plan) after each call.
    std::function<void(std::size_t, std::size_t)> on_progress;
};

struct SessionOptions {
    kb::KbOptions kb;
    ModelConfig model;
    levels::ProfileMap profiles = levels::default_profiles();
    std::optional<std::filesystem::path> snapshot_dir;
};

// One learner group: knowledge base, level profiles, current level,
// conversation history and backend call counter.
class Session {
public:
    Session(std::string id, SessionOptions options, backend::Backend& backend, ingest::Fetcher& fetcher,
            const Clock& clock);

    const std::string& id() const noexcept { return id_; }
    Timestamp created_at() const noexcept { return created_at_; }

    // Knowledge base mutations. Throw Error(busy) while an ask is running.
    kb::AddReport add_url_sources(std::string_view input);
    kb::SourceRef add_pdf_source(const std::string& filename, std::string_view bytes);
    kb::Summary delete_extracted(const std::string& source_id);

    const kb::KnowledgeBase& knowledge_base() const noexcept { return kb_; }

    levels::ProficiencyLevel level() const;
    void set_level(levels::ProficiencyLevel level);
    levels::LevelProfile profile(levels::ProficiencyLevel level) const;
    void set_profile(levels::ProficiencyLevel level, levels::LevelProfile profile);

    const ModelConfig& model_config() const noexcept { return options_.model; }

    // Throws Error(no_sources) before any backend call when the knowledge
    // base is empty, Error(busy) when another ask is running,
    // Error(empty_question), Error(question_too_long), Error(bundle_too_large)
    // for a forced stuff that does not fit, and backend errors carrying the
    // number of completed refine steps.
    Answer ask(std::string_view question, const AskOptions& options = {});

    std::vector<ConversationTurn> history() const;
    std::uint64_t backend_calls() const noexcept { return calls_.value(); }
    bool asking() const noexcept { return asking_.load(); }

    // Reads <snapshot_dir>/<id>.ndjson if configured and present.
    bool load_snapshot();

private:
    void ensure_idle() const;
    void persist() const;

    std::string id_;
    SessionOptions options_;
    backend::Backend* backend_;
    const Clock* clock_;
    Timestamp created_at_;
    kb::KnowledgeBase kb_;
    backend::CallCounter calls_;
    std::atomic<bool> asking_{false};

    mutable std::mutex mutex_;  // level, profiles, history
    levels::ProficiencyLevel level_ = levels::ProficiencyLevel::beginner;
    levels::ProfileSet profiles_;
    std::vector<ConversationTurn> history_;
};

// Sessions by id. Ids are 128-bit random hex strings.
class SessionRegistry {
public:
    SessionRegistry(SessionOptions defaults, backend::Backend& backend, ingest::Fetcher& fetcher, const Clock& clock);

    std::shared_ptr<Session> create();
    // Recreates a session under a known id (snapshot restore).
    std::shared_ptr<Session> create_with_id(const std::string& id);
    // Throws Error(unknown_session).
    std::shared_ptr<Session> get(const std::string& id) const;
    bool contains(const std::string& id) const;
    std::size_t size() const;

    // Recreates every session that has a snapshot file. Returns their ids.
    std::vector<std::string> restore_all();

private:
    SessionOptions defaults_;
    backend::Backend* backend_;
    ingest::Fetcher* fetcher_;
    const Clock* clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// 32 lowercase hex characters from the OS random source.
std::string random_hex_id();

}  // namespace groundchat::engine
