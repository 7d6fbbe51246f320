#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"
#include "groundchat/model_config.hpp"

namespace groundchat {

void ModelConfig::validate() const {
    if (model_name.empty()) throw Error(ErrorCode::invalid_config, "backend.model_name must not be empty");
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw Error(ErrorCode::invalid_config, "backend.temperature must be within [0.0, 2.0]");
    }
    if (context_window_tokens == 0 || answer_reserve_tokens == 0) {
        throw Error(ErrorCode::invalid_config, "context window and answer reserve must be positive");
    }
    if (answer_reserve_tokens >= context_window_tokens) {
        throw Error(ErrorCode::invalid_config, "backend.answer_reserve_tokens must be smaller than the context window");
    }
    if (!ingest::is_http_url(endpoint)) throw Error(ErrorCode::invalid_config, "backend.endpoint must be an http(s) URL");
    if (retries < 0) throw Error(ErrorCode::invalid_config, "backend.retries must not be negative");
}

}  // namespace groundchat
