#include <algorithm>
#include <cctype>

#include <httplib.h>

#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"

namespace groundchat::ingest {

namespace {

bool is_redirect(int status) {
    return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

std::string origin(const HttpUrl& u) {
    return u.scheme + "://" + u.host + ":" + std::to_string(u.port);
}

// Resolves a Location header against the URL that produced it.
std::string resolve_location(const HttpUrl& base, const std::string& location) {
    if (is_http_url(location)) return location;
    if (location.rfind("//", 0) == 0) return base.scheme + ":" + location;
    if (!location.empty() && location.front() == '/') return origin(base) + location;
    std::string dir = base.path.substr(0, base.path.find('?'));
    dir = dir.substr(0, dir.rfind('/') + 1);
    return origin(base) + dir + location;
}

enum class Abort { none, too_large, timeout };

}  // namespace

Media media_from_content_type(std::string_view content_type) {
    std::string ct(content_type.substr(0, content_type.find(';')));
    ct.erase(std::remove_if(ct.begin(), ct.end(), [](unsigned char c) { return std::isspace(c); }), ct.end());
    std::transform(ct.begin(), ct.end(), ct.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ct == "text/html" || ct == "application/xhtml+xml") return Media::html;
    if (ct == "application/pdf") return Media::pdf;
    return Media::plain;
}

RawDocument fetch_url(const std::string& url, const FetchOptions& options) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + options.timeout;
    std::string current = url;

    for (int hop = 0;; ++hop) {
        auto parsed = parse_http_url(current);
        if (!parsed) throw Error(ErrorCode::invalid_url, "not an absolute http/https URL: " + current);

        httplib::Client client(origin(*parsed));
        const auto remaining = std::max(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()),
                                        std::chrono::milliseconds(1));
        client.set_connection_timeout(remaining);
        client.set_read_timeout(remaining);
        client.set_write_timeout(remaining);
        client.set_follow_location(false);

        const auto sent_at = clock::now();
        Abort abort = Abort::none;
        int status = 0;
        std::string location;
        std::string content_type;
        std::string body;

        auto result = client.Get(
            parsed->path,
            [&](const httplib::Response& res) {
                status = res.status;
                location = res.get_header_value("Location");
                content_type = res.get_header_value("Content-Type");
                if (is_redirect(status) || status < 200 || status >= 300) return false;
                if (res.has_header("Content-Length")) {
                    const auto declared = res.get_header_value_u64("Content-Length");
                    if (declared > options.max_bytes) {
                        abort = Abort::too_large;
                        return false;
                    }
                }
                return true;
            },
            [&](const char* data, std::size_t len) {
                if (body.size() + len > options.max_bytes) {
                    abort = Abort::too_large;
                    return false;
                }
                if (clock::now() > deadline) {
                    abort = Abort::timeout;
                    return false;
                }
                body.append(data, len);
                return true;
            });

        if (abort == Abort::too_large) {
            throw Error(ErrorCode::fetch_too_large,
                        current + " exceeds the " + std::to_string(options.max_bytes) + " byte limit");
        }
        // A socket read that gave up after (roughly) the whole allowance is a timeout.
        const bool waited_out = clock::now() - sent_at + std::chrono::milliseconds(20) >= remaining;
        if (abort == Abort::timeout ||
            (!result && (result.error() == httplib::Error::ConnectionTimeout ||
                         (result.error() == httplib::Error::Read && waited_out)))) {
            throw Error(ErrorCode::fetch_timeout, current + " did not respond in time");
        }
        if (is_redirect(status)) {
            if (hop >= options.max_redirects) {
                throw Error(ErrorCode::fetch_too_many_redirects,
                            url + " redirected more than " + std::to_string(options.max_redirects) + " times");
            }
            if (location.empty()) {
                throw Error(ErrorCode::fetch_status, current + " redirected without a Location").with_status(status);
            }
            current = resolve_location(*parsed, location);
            continue;
        }
        if (status != 0 && (status < 200 || status >= 300)) {
            throw Error(ErrorCode::fetch_status, current + " returned HTTP " + std::to_string(status)).with_status(status);
        }
        if (!result) {
            throw Error(ErrorCode::fetch_failed, current + ": " + httplib::to_string(result.error()));
        }
        if (body.empty()) throw Error(ErrorCode::empty_document, current + " returned an empty body");

        RawDocument doc;
        doc.media = media_from_content_type(content_type);
        doc.bytes = std::move(body);
        return doc;
    }
}

}  // namespace groundchat::ingest
