#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundchat/engine.hpp"
#include "groundchat/ingest.hpp"
#include "groundchat/survey.hpp"

namespace groundchat {

enum class BackendKind { mock, http };

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_upload_mib = 20;
};

// Everything the service reads from its config file. The file is JSON with
// one object per section; see README for the key list.
struct ServiceConfig {
    BackendKind backend_kind = BackendKind::http;
    engine::SessionOptions session;
    ingest::FetchOptions fetch;
    ServerConfig server;
    survey::SurveyOptions survey;
    std::vector<survey::Questionnaire> questionnaires;  // in addition to "default"

    // Throws Error(invalid_config).
    void validate() const;
};

// Unknown keys and wrong types are rejected with Error(invalid_config)
// naming the dotted key.
ServiceConfig parse_config(std::string_view json_text);
ServiceConfig load_config(const std::filesystem::path& path);

// "host:port"; Throws Error(invalid_config).
ServerConfig parse_bind(std::string_view bind, ServerConfig base = {});

}  // namespace groundchat
