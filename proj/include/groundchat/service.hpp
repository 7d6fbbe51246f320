#pragma once

#include <memory>
#include <string>

#include "groundchat/access.hpp"
#include "groundchat/backend.hpp"
#include "groundchat/config.hpp"
#include "groundchat/engine.hpp"
#include "groundchat/survey.hpp"

namespace httplib {
class Server;
}

namespace groundchat::service {

// The HTTP API over sessions, sharing and surveys. Routes are mounted on a
// caller-owned httplib::Server; the path segment after /v1/sessions/ is a
// session id (owner) or a share token (learner, X-Passphrase header).
class Service {
public:
    Service(ServiceConfig config, backend::Backend& backend, ingest::Fetcher& fetcher, const Clock& clock);

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Registers every route, the JSON error handler and the upload limit.
    void mount(httplib::Server& server);

    const ServiceConfig& config() const noexcept { return config_; }
    engine::SessionRegistry& sessions() noexcept { return sessions_; }
    access::ShareRegistry& shares() noexcept { return shares_; }
    survey::SurveyRegistry& surveys() noexcept { return surveys_; }

    // Resolves the {id} segment. Throws Error(unknown_session),
    // Error(outside_window), Error(bad_passphrase).
    access::Grant resolve(const std::string& id, const std::string& passphrase) const;

private:
    ServiceConfig config_;
    backend::Backend* backend_;
    const Clock* clock_;
    engine::SessionRegistry sessions_;
    access::ShareRegistry shares_;
    survey::SurveyRegistry surveys_;
};

// {"error":{"code":…,"message":…}}
std::string error_body(ErrorCode code, const std::string& message);

// Backend selected by the config (mock or HTTP client).
std::unique_ptr<backend::Backend> make_backend(BackendKind kind);

}  // namespace groundchat::service
