#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "groundchat/levels.hpp"
#include "groundchat/model_config.hpp"

namespace groundchat::backend {

// Per-session count of requests dispatched to a model.
class CallCounter {
public:
    std::uint64_t increment() noexcept { return value_.fetch_add(1) + 1; }
    std::uint64_t value() const noexcept { return value_.load(); }

private:
    std::atomic<std::uint64_t> value_{0};
};

struct GenerationRequest {
    levels::PromptBundle bundle;
    ModelConfig config;
    bool stream = false;
};

struct GenerationResult {
    std::string text;
    std::uint64_t backend_calls_token = 0;  // counter value after this call
    std::uint64_t latency_ms = 0;
};

struct Health {
    bool ok = false;
    bool model_present = false;
};

// Receives streamed text fragments as they arrive.
using DeltaCallback = std::function<void(std::string_view)>;

class Backend {
public:
    virtual ~Backend() = default;

    // Increments `calls` once per request sent. Throws Error with
    // bundle_too_large, backend_unreachable, backend_timeout,
    // backend_status or backend_bad_response.
    virtual GenerationResult generate(const GenerationRequest& request, CallCounter& calls,
                                      const DeltaCallback& on_delta = {}) = 0;

    virtual Health health_check(const ModelConfig& config) = 0;
};

// Throws Error(bundle_too_large) unless the bundle fits the config.
void check_budget(const GenerationRequest& request);

// Chat request body, keys in wire order:
// model, messages[system, user], temperature, max_tokens, stream.
nlohmann::ordered_json request_body(const GenerationRequest& request);

// Sum of the UTF-8 bytes of `text`, modulo 10000.
unsigned byte_checksum(std::string_view text);

// "L=<level>;C=<checksum(context)>;Q=<question>" plus ";D=<checksum(draft)>"
// when a prior draft is present.
std::string mock_generate(const levels::PromptBundle& bundle);

// Deterministic in-process backend. Records every bundle it receives.
class MockBackend final : public Backend {
public:
    GenerationResult generate(const GenerationRequest& request, CallCounter& calls,
                              const DeltaCallback& on_delta = {}) override;
    Health health_check(const ModelConfig& config) override;

    std::vector<levels::PromptBundle> received() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::vector<levels::PromptBundle> received_;
};

// Client for a local model server speaking the JSON chat protocol
// (POST chat_path, GET tags_path for the installed model list).
class HttpChatBackend final : public Backend {
public:
    GenerationResult generate(const GenerationRequest& request, CallCounter& calls,
                              const DeltaCallback& on_delta = {}) override;
    Health health_check(const ModelConfig& config) override;
};

}  // namespace groundchat::backend
