#pragma once

#include <chrono>
#include <cstddef>
#include <string>

namespace groundchat {

struct ModelConfig {
    std::string model_name = "llama3.1:8b";
    double temperature = 0.2;
    std::size_t context_window_tokens = 8192;
    std::size_t answer_reserve_tokens = 1024;
    std::string endpoint = "http://127.0.0.1:11434";
    std::string chat_path = "/api/chat";
    std::string tags_path = "/api/tags";
    std::chrono::milliseconds timeout{120'000};
    int retries = 0;

    // Throws Error(invalid_config).
    void validate() const;
};

}  // namespace groundchat
