#include "groundchat/engine.hpp"

#include <chrono>
#include <filesystem>

#include <sodium.h>

#include "groundchat/error.hpp"
#include "groundchat/utf8.hpp"

namespace groundchat::engine {

namespace {

using steady = std::chrono::steady_clock;

// Clears the in-flight flag on every exit path.
class AskGuard {
public:
    explicit AskGuard(std::atomic<bool>& flag) : flag_(flag) {}
    ~AskGuard() { flag_.store(false); }
    AskGuard(const AskGuard&) = delete;
    AskGuard& operator=(const AskGuard&) = delete;

private:
    std::atomic<bool>& flag_;
};

bool blank(std::string_view s) {
    for (std::size_t i = 0; i < s.size();) {
        auto d = utf8::decode(s, i);
        if (!d) return false;
        if (!utf8::is_space(d->cp)) return false;
        i += d->length;
    }
    return true;
}

}  // namespace

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::automatic: return "auto";
        case Strategy::stuff: return "stuff";
        case Strategy::refine: return "refine";
    }
    return "auto";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "auto") return Strategy::automatic;
    if (name == "stuff") return Strategy::stuff;
    if (name == "refine") return Strategy::refine;
    throw Error(ErrorCode::invalid_argument, "unknown strategy '" + std::string(name) + "' (expected auto, stuff or refine)");
}

void validate_question(std::string_view question) {
    if (blank(question)) throw Error(ErrorCode::empty_question, "question must not be empty");
    if (utf8::length(question) > kMaxQuestionChars) {
        throw Error(ErrorCode::question_too_long,
                    "question is longer than " + std::to_string(kMaxQuestionChars) + " characters");
    }
}

std::size_t stuff_estimate(const std::vector<chunker::Chunk>& chunks, std::string_view question,
                           std::string_view system_message) {
    std::size_t total = chunker::estimate_tokens(question) + chunker::estimate_tokens(system_message);
    for (const auto& c : chunks) total += c.token_estimate;
    if (chunks.size() > 1) total += (chunks.size() - 1 + 3) / 4;
    return total;
}

Strategy choose_strategy(const std::vector<chunker::Chunk>& chunks, std::string_view question,
                         std::string_view system_message, const ModelConfig& config) {
    return stuff_estimate(chunks, question, system_message) <= levels::prompt_budget(config) ? Strategy::stuff
                                                                                             : Strategy::refine;
}

Session::Session(std::string id, SessionOptions options, backend::Backend& backend, ingest::Fetcher& fetcher,
                 const Clock& clock)
    : id_(std::move(id)),
      options_(std::move(options)),
      backend_(&backend),
      clock_(&clock),
      created_at_(clock.now()),
      kb_(id_, options_.kb, fetcher, clock),
      profiles_(options_.profiles) {
    options_.model.validate();
}

void Session::ensure_idle() const {
    if (asking_.load()) throw Error(ErrorCode::busy, "a question is being answered; try again when it is done");
}

void Session::persist() const {
    if (options_.snapshot_dir) kb_.save_snapshot(*options_.snapshot_dir);
}

bool Session::load_snapshot() {
    if (!options_.snapshot_dir) return false;
    return kb_.load_snapshot(*options_.snapshot_dir);
}

kb::AddReport Session::add_url_sources(std::string_view input) {
    ensure_idle();
    auto report = kb_.add_url_sources(input);
    if (!report.added.empty()) persist();
    return report;
}

kb::SourceRef Session::add_pdf_source(const std::string& filename, std::string_view bytes) {
    ensure_idle();
    auto ref = kb_.add_pdf_source(filename, bytes);
    persist();
    return ref;
}

kb::Summary Session::delete_extracted(const std::string& source_id) {
    ensure_idle();
    auto summary = kb_.delete_extracted(source_id);
    persist();
    return summary;
}

levels::ProficiencyLevel Session::level() const {
    std::lock_guard lock(mutex_);
    return level_;
}

void Session::set_level(levels::ProficiencyLevel level) {
    std::lock_guard lock(mutex_);
    level_ = level;
}

levels::LevelProfile Session::profile(levels::ProficiencyLevel level) const {
    std::lock_guard lock(mutex_);
    return profiles_.get(level);
}

void Session::set_profile(levels::ProficiencyLevel level, levels::LevelProfile profile) {
    std::lock_guard lock(mutex_);
    profiles_.set_profile(level, std::move(profile));
}

std::vector<ConversationTurn> Session::history() const {
    std::lock_guard lock(mutex_);
    return history_;
}

Answer Session::ask(std::string_view question, const AskOptions& options) {
    bool expected = false;
    if (!asking_.compare_exchange_strong(expected, true)) {
        throw Error(ErrorCode::busy, "another question is still being answered in this session");
    }
    AskGuard guard(asking_);

    // Everything below works on a copy; later mutations cannot leak in.
    const auto chunks = kb_.all_chunks();
    if (chunks.empty()) {
        throw Error(ErrorCode::no_sources, "add at least one source before asking a question");
    }
    validate_question(question);

    const auto asked_at = clock_->now();
    const auto start = steady::now();
    levels::LevelProfile profile;
    {
        std::lock_guard lock(mutex_);
        profile = profiles_.get(options.level.value_or(level_));
    }
    const auto& config = options_.model;
    const auto system_message = profile.render();
    const auto calls_before = calls_.value();

    Answer answer;
    answer.chunks_consulted = chunks.size();
    answer.strategy_used = options.strategy == Strategy::automatic
                               ? choose_strategy(chunks, question, system_message, config)
                               : options.strategy;
    for (const auto& c : chunks) {
        if (answer.sources_used.empty() || answer.sources_used.back() != c.doc_id) {
            answer.sources_used.push_back(c.doc_id);
        }
    }

    auto call = [&](std::string_view context, const std::optional<std::string>& draft, bool stream) {
        auto bundle = levels::assemble(profile, question, context, draft, config);
        backend::GenerationRequest req{std::move(bundle), config, stream};
        return backend_->generate(req, calls_, stream ? options.on_delta : backend::DeltaCallback{}).text;
    };

    std::size_t completed = 0;
    try {
        if (answer.strategy_used == Strategy::stuff) {
            std::string context;
            for (const auto& c : chunks) {
                if (!context.empty()) context += ' ';
                context += c.text;
            }
            answer.text = call(context, std::nullopt, options.stream);
            completed = 1;
            if (options.on_progress) options.on_progress(1, 1);
        } else {
            std::optional<std::string> draft;
            for (std::size_t i = 0; i < chunks.size(); ++i) {
                const bool last = i + 1 == chunks.size();
                const auto needed = chunker::estimate_tokens(system_message) + chunker::estimate_tokens(question) +
                                    chunks[i].token_estimate +
                                    (draft ? chunker::estimate_tokens(*draft) : 0);
                if (needed <= levels::prompt_budget(config)) {
                    draft = call(chunks[i].text, draft, options.stream && last);
                } else {
                    // The draft has grown; feed this chunk in smaller pieces.
                    const auto fixed = needed - chunks[i].token_estimate;
                    const auto room = levels::prompt_budget(config) > fixed ? levels::prompt_budget(config) - fixed : 0;
                    if (room < 16) {
                        throw Error(ErrorCode::bundle_too_large,
                                    "the draft answer leaves no room for source text in the model window");
                    }
                    auto pieces = chunker::split(chunks[i].text, chunker::ChunkPolicy{room}, chunks[i].doc_id);
                    for (std::size_t p = 0; p < pieces.size(); ++p) {
                        draft = call(pieces[p].text, draft, options.stream && last && p + 1 == pieces.size());
                    }
                }
                completed = i + 1;
                if (options.on_progress) options.on_progress(completed, chunks.size());
            }
            answer.text = std::move(*draft);
        }
    } catch (Error& e) {
        if (!e.completed_chunks()) e.with_completed_chunks(completed);
        throw;
    }

    answer.backend_calls = static_cast<std::size_t>(calls_.value() - calls_before);
    answer.latency_ms =
        static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(steady::now() - start).count());

    ConversationTurn turn{std::string(question), answer, profile.level, asked_at};
    {
        std::lock_guard lock(mutex_);
        history_.push_back(std::move(turn));
    }
    return answer;
}

std::string random_hex_id() {
    static const bool ready = sodium_init() >= 0;
    if (!ready) throw Error(ErrorCode::internal, "random source unavailable");
    unsigned char bytes[16];
    randombytes_buf(bytes, sizeof bytes);
    char hex[sizeof bytes * 2 + 1];
    sodium_bin2hex(hex, sizeof hex, bytes, sizeof bytes);
    return hex;
}

SessionRegistry::SessionRegistry(SessionOptions defaults, backend::Backend& backend, ingest::Fetcher& fetcher,
                                 const Clock& clock)
    : defaults_(std::move(defaults)), backend_(&backend), fetcher_(&fetcher), clock_(&clock) {
    defaults_.model.validate();
    defaults_.kb.policy.validate();
}

std::shared_ptr<Session> SessionRegistry::create() {
    for (;;) {
        auto id = random_hex_id();
        std::lock_guard lock(mutex_);
        if (sessions_.count(id)) continue;
        auto s = std::make_shared<Session>(id, defaults_, *backend_, *fetcher_, *clock_);
        sessions_.emplace(id, s);
        return s;
    }
}

std::shared_ptr<Session> SessionRegistry::create_with_id(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto s = std::make_shared<Session>(id, defaults_, *backend_, *fetcher_, *clock_);
    sessions_[id] = s;
    return s;
}

std::shared_ptr<Session> SessionRegistry::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::unknown_session, "no session " + id);
    return it->second;
}

bool SessionRegistry::contains(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return sessions_.count(id) > 0;
}

std::size_t SessionRegistry::size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::vector<std::string> SessionRegistry::restore_all() {
    std::vector<std::string> ids;
    if (!defaults_.snapshot_dir || !std::filesystem::is_directory(*defaults_.snapshot_dir)) return ids;
    for (const auto& entry : std::filesystem::directory_iterator(*defaults_.snapshot_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".ndjson") continue;
        const auto id = entry.path().stem().string();
        auto s = create_with_id(id);
        s->load_snapshot();
        ids.push_back(id);
    }
    return ids;
}

}  // namespace groundchat::engine
