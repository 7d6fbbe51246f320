#include "groundchat/backend.hpp"

#include "groundchat/error.hpp"

namespace groundchat::backend {

void check_budget(const GenerationRequest& request) {
    const auto budget = levels::prompt_budget(request.config);
    if (request.bundle.total_token_estimate > budget) {
        throw Error(ErrorCode::bundle_too_large, "prompt of " + std::to_string(request.bundle.total_token_estimate) +
                                                     " tokens exceeds the " + std::to_string(budget) + " token budget");
    }
}

nlohmann::ordered_json request_body(const GenerationRequest& request) {
    nlohmann::ordered_json body;
    body["model"] = request.config.model_name;
    body["messages"] = nlohmann::ordered_json::array({
        {{"role", "system"}, {"content", request.bundle.system_message}},
        {{"role", "user"}, {"content", levels::user_content(request.bundle)}},
    });
    body["temperature"] = request.config.temperature;
    body["max_tokens"] = request.bundle.max_answer_tokens;
    body["stream"] = request.stream;
    return body;
}

unsigned byte_checksum(std::string_view text) {
    unsigned sum = 0;
    for (unsigned char c : text) sum = (sum + c) % 10000;
    return sum;
}

std::string mock_generate(const levels::PromptBundle& bundle) {
    std::string out = "L=" + std::string(levels::to_string(bundle.level)) + ";C=" +
                      std::to_string(byte_checksum(bundle.context)) + ";Q=" + bundle.question;
    if (bundle.prior_draft) out += ";D=" + std::to_string(byte_checksum(*bundle.prior_draft));
    return out;
}

GenerationResult MockBackend::generate(const GenerationRequest& request, CallCounter& calls,
                                       const DeltaCallback& on_delta) {
    check_budget(request);
    GenerationResult result;
    result.backend_calls_token = calls.increment();
    result.text = mock_generate(request.bundle);
    {
        std::lock_guard lock(mutex_);
        received_.push_back(request.bundle);
    }
    if (on_delta) on_delta(result.text);
    return result;
}

Health MockBackend::health_check(const ModelConfig&) { return {true, true}; }

std::vector<levels::PromptBundle> MockBackend::received() const {
    std::lock_guard lock(mutex_);
    return received_;
}

void MockBackend::clear() {
    std::lock_guard lock(mutex_);
    received_.clear();
}

}  // namespace groundchat::backend
