#pragma once

#include <condition_variable>
#include <mutex>
#include <string>

#include "groundchat/backend.hpp"
#include "groundchat/error.hpp"

namespace groundchat::testing {

// Alternating "a b a b … a": 9,999 characters, no leading or trailing space.
inline std::string alternating_ab_text() {
    std::string s;
    for (int i = 0; i < 2500; ++i) s += "a b ";
    s.pop_back();
    return s;
}

// Holds every generate() until release() is called.
class GateBackend final : public backend::Backend {
public:
    backend::GenerationResult generate(const backend::GenerationRequest& req, backend::CallCounter& calls,
                                       const backend::DeltaCallback& on_delta = {}) override {
        {
            std::unique_lock lock(mutex_);
            ++waiting_;
            cv_.notify_all();
            cv_.wait(lock, [&] { return open_; });
            --waiting_;
        }
        return inner_.generate(req, calls, on_delta);
    }
    backend::Health health_check(const ModelConfig& c) override { return inner_.health_check(c); }

    void wait_for_caller() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return waiting_ > 0; });
    }
    void release() {
        std::lock_guard lock(mutex_);
        open_ = true;
        cv_.notify_all();
    }

private:
    backend::MockBackend inner_;
    std::mutex mutex_;
    std::condition_variable cv_;
    int waiting_ = 0;
    bool open_ = false;
};

// Succeeds `ok_calls` times, then fails with `code`.
class FailingBackend final : public backend::Backend {
public:
    FailingBackend(int ok_calls, ErrorCode code) : ok_calls_(ok_calls), code_(code) {}

    backend::GenerationResult generate(const backend::GenerationRequest& req, backend::CallCounter& calls,
                                       const backend::DeltaCallback& on_delta = {}) override {
        if (ok_calls_-- > 0) return inner_.generate(req, calls, on_delta);
        calls.increment();
        throw Error(code_, "injected failure");
    }
    backend::Health health_check(const ModelConfig&) override { throw Error(code_, "injected failure"); }

private:
    backend::MockBackend inner_;
    int ok_calls_;
    ErrorCode code_;
};

// Answers with a fixed long text so refine drafts grow; records bundles.
class VerboseBackend final : public backend::Backend {
public:
    explicit VerboseBackend(std::size_t answer_chars) : answer_(answer_chars, 'v') {}

    backend::GenerationResult generate(const backend::GenerationRequest& req, backend::CallCounter& calls,
                                       const backend::DeltaCallback& = {}) override {
        backend::check_budget(req);
        bundles.push_back(req.bundle);
        backend::GenerationResult r;
        r.backend_calls_token = calls.increment();
        r.text = answer_;
        return r;
    }
    backend::Health health_check(const ModelConfig&) override { return {true, true}; }

    std::vector<levels::PromptBundle> bundles;

private:
    std::string answer_;
};

}  // namespace groundchat::testing
