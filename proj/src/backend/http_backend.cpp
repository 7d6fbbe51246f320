#include <chrono>

#include <httplib.h>

#include "groundchat/backend.hpp"
#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"

namespace groundchat::backend {

namespace {

using steady = std::chrono::steady_clock;

httplib::Client make_client(const ModelConfig& config) {
    auto url = ingest::parse_http_url(config.endpoint);
    if (!url) throw Error(ErrorCode::invalid_config, "backend.endpoint is not an http(s) URL: " + config.endpoint);
    httplib::Client client(url->scheme + "://" + url->host + ":" + std::to_string(url->port));
    client.set_connection_timeout(config.timeout);
    client.set_read_timeout(config.timeout);
    client.set_write_timeout(config.timeout);
    return client;
}

// Base path of the endpoint without a trailing slash, so that an endpoint
// like http://host/ollama still reaches /ollama/api/chat.
std::string base_path(const ModelConfig& config) {
    auto url = ingest::parse_http_url(config.endpoint);
    std::string path = url ? url->path.substr(0, url->path.find('?')) : "/";
    while (!path.empty() && path.back() == '/') path.pop_back();
    return path;
}

// Pulls the text out of one response object. Accepts the native chat shape
// and, failing that, the choices[0] shape used by other servers.
std::optional<std::string> content_of(const nlohmann::json& j) {
    if (!j.is_object()) return std::nullopt;
    if (auto m = j.find("message"); m != j.end() && m->is_object()) {
        if (auto c = m->find("content"); c != m->end() && c->is_string()) return c->get<std::string>();
    }
    if (auto ch = j.find("choices"); ch != j.end() && ch->is_array() && !ch->empty()) {
        const auto& first = (*ch)[0];
        for (const char* key : {"message", "delta"}) {
            if (auto m = first.find(key); m != first.end() && m->is_object()) {
                if (auto c = m->find("content"); c != m->end() && c->is_string()) return c->get<std::string>();
            }
        }
    }
    return std::nullopt;
}

// Accumulates streamed lines. Each line is a JSON object, optionally with an
// SSE "data: " prefix; "[DONE]" and blank lines are ignored.
class StreamParser {
public:
    explicit StreamParser(const DeltaCallback& on_delta) : on_delta_(on_delta) {}

    void feed(const char* data, std::size_t n) {
        pending_.append(data, n);
        std::size_t start = 0;
        for (std::size_t nl; (nl = pending_.find('\n', start)) != std::string::npos; start = nl + 1) {
            line(std::string_view(pending_).substr(start, nl - start));
        }
        pending_.erase(0, start);
    }

    void finish() {
        if (!pending_.empty()) line(pending_);
        pending_.clear();
    }

    const std::string& text() const { return text_; }

private:
    void line(std::string_view l) {
        while (!l.empty() && (l.back() == '\r' || l.back() == ' ')) l.remove_suffix(1);
        if (l.rfind("data:", 0) == 0) {
            l.remove_prefix(5);
            while (!l.empty() && l.front() == ' ') l.remove_prefix(1);
        }
        if (l.empty() || l == "[DONE]") return;
        auto j = nlohmann::json::parse(l, nullptr, false);
        auto piece = content_of(j);
        if (!piece) throw Error(ErrorCode::backend_bad_response, "stream line without message content");
        text_ += *piece;
        if (on_delta_ && !piece->empty()) on_delta_(*piece);
    }

    const DeltaCallback& on_delta_;
    std::string pending_;
    std::string text_;
};

bool transient(const Error& e) {
    return e.code() == ErrorCode::backend_unreachable || e.code() == ErrorCode::backend_timeout ||
           (e.code() == ErrorCode::backend_status && e.status().value_or(0) >= 500);
}

Error transport_error(httplib::Error err, steady::time_point sent_at, const ModelConfig& config) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(steady::now() - sent_at);
    switch (err) {
        case httplib::Error::Connection:
            return Error(ErrorCode::backend_unreachable, "model server unreachable at " + config.endpoint);
        case httplib::Error::ConnectionTimeout:
            return Error(ErrorCode::backend_timeout, "model server did not accept a connection in time");
        case httplib::Error::Read:
        case httplib::Error::Canceled:
            if (elapsed + std::chrono::milliseconds(20) >= config.timeout) {
                return Error(ErrorCode::backend_timeout,
                             "no answer from the model within " + std::to_string(config.timeout.count()) + " ms");
            }
            return Error(ErrorCode::backend_bad_response, "model server closed the connection");
        default:
            return Error(ErrorCode::backend_unreachable, "model server request failed: " + httplib::to_string(err));
    }
}

std::string attempt(const GenerationRequest& request, const DeltaCallback& on_delta) {
    const auto& config = request.config;
    auto client = make_client(config);

    httplib::Request req;
    req.method = "POST";
    req.path = base_path(config) + config.chat_path;
    req.body = request_body(request).dump();
    req.set_header("Content-Type", "application/json");
    req.set_header("Accept", request.stream ? "application/x-ndjson" : "application/json");

    int status = 0;
    std::string body;
    StreamParser parser(on_delta);
    req.response_handler = [&](const httplib::Response& res) {
        status = res.status;
        return true;
    };
    req.content_receiver = [&](const char* data, std::size_t n, std::uint64_t, std::uint64_t) {
        if (request.stream && status >= 200 && status < 300) {
            parser.feed(data, n);
        } else {
            body.append(data, n);
        }
        return true;
    };

    httplib::Response res;
    httplib::Error err = httplib::Error::Success;
    const auto sent_at = steady::now();
    if (!client.send(req, res, err)) throw transport_error(err, sent_at, config);

    if (status < 200 || status >= 300) {
        throw Error(ErrorCode::backend_status, "model server answered HTTP " + std::to_string(status))
            .with_status(status);
    }

    std::string text;
    if (request.stream) {
        parser.finish();
        text = parser.text();
    } else {
        auto j = nlohmann::json::parse(body, nullptr, false);
        auto content = content_of(j);
        if (!content) throw Error(ErrorCode::backend_bad_response, "response has no message.content");
        text = std::move(*content);
        if (on_delta && !text.empty()) on_delta(text);
    }
    if (text.empty()) throw Error(ErrorCode::backend_bad_response, "model returned an empty answer");
    return text;
}

}  // namespace

GenerationResult HttpChatBackend::generate(const GenerationRequest& request, CallCounter& calls,
                                           const DeltaCallback& on_delta) {
    check_budget(request);
    const auto start = steady::now();
    for (int tries_left = std::max(request.config.retries, 0);; --tries_left) {
        const auto token = calls.increment();
        try {
            GenerationResult result;
            result.text = attempt(request, on_delta);
            result.backend_calls_token = token;
            result.latency_ms = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::milliseconds>(steady::now() - start).count());
            return result;
        } catch (const Error& e) {
            if (tries_left <= 0 || !transient(e)) throw;
        }
    }
}

Health HttpChatBackend::health_check(const ModelConfig& config) {
    auto client = make_client(config);
    const auto sent_at = steady::now();
    auto res = client.Get(base_path(config) + config.tags_path);
    if (!res) {
        auto e = transport_error(res.error(), sent_at, config);
        if (e.code() == ErrorCode::backend_timeout) throw e;
        throw Error(ErrorCode::backend_unreachable, "model server unreachable at " + config.endpoint);
    }
    Health health;
    health.ok = res->status >= 200 && res->status < 300;
    if (!health.ok) return health;
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_object() && j.contains("models") && j["models"].is_array()) {
        for (const auto& m : j["models"]) {
            for (const char* key : {"name", "model"}) {
                if (m.is_object() && m.contains(key) && m[key].is_string() && m[key] == config.model_name) {
                    health.model_present = true;
                }
            }
        }
    }
    return health;
}

}  // namespace groundchat::backend
