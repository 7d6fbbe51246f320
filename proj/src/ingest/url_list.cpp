#include <algorithm>
#include <cctype>

#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"

namespace groundchat::ingest {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view to_string(SourceKind kind) { return kind == SourceKind::url ? "url" : "pdf"; }

SourceKind parse_source_kind(std::string_view s) {
    if (s == "url") return SourceKind::url;
    if (s == "pdf") return SourceKind::pdf;
    throw Error(ErrorCode::invalid_argument, "unknown source kind '" + std::string(s) + "'");
}

std::string_view to_string(Media media) {
    switch (media) {
        case Media::html: return "html";
        case Media::pdf: return "pdf";
        case Media::plain: return "plain";
    }
    return "plain";
}

std::optional<HttpUrl> parse_http_url(std::string_view url) {
    const auto sep = url.find("://");
    if (sep == std::string_view::npos) return std::nullopt;
    HttpUrl out;
    out.scheme = lower(url.substr(0, sep));
    if (out.scheme != "http" && out.scheme != "https") return std::nullopt;

    std::string_view rest = url.substr(sep + 3);
    const auto auth_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, auth_end);
    std::string_view tail = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
    if (authority.empty()) return std::nullopt;
    for (unsigned char c : authority) {
        if (c <= 0x20 || c == 0x7F || c == '\\') return std::nullopt;
    }

    std::string_view host = authority;
    std::string_view port;
    if (authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        host = authority.substr(0, close + 1);
        std::string_view after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after.front() != ':') return std::nullopt;
            port = after.substr(1);
        }
    } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port = authority.substr(colon + 1);
    }
    if (host.empty() || host == "[]") return std::nullopt;
    out.host = lower(host);

    out.port = out.scheme == "https" ? 443 : 80;
    if (!port.empty()) {
        if (port.size() > 5 || !std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); })) {
            return std::nullopt;
        }
        out.port = std::stoi(std::string(port));
        if (out.port < 1 || out.port > 65535) return std::nullopt;
    }

    if (auto hash = tail.find('#'); hash != std::string_view::npos) tail = tail.substr(0, hash);
    for (unsigned char c : tail) {
        if (c <= 0x20 || c == 0x7F) return std::nullopt;
    }
    out.path = tail.empty() || tail.front() != '/' ? "/" + std::string(tail) : std::string(tail);
    return out;
}

bool is_http_url(std::string_view url) { return parse_http_url(url).has_value(); }

std::vector<std::string> parse_url_list(std::string_view input) {
    std::vector<std::string> urls;
    std::size_t pos = 0;
    while (pos <= input.size()) {
        const auto comma = input.find(',', pos);
        const auto end = comma == std::string_view::npos ? input.size() : comma;
        const auto piece = trim(input.substr(pos, end - pos));
        if (!piece.empty()) {
            if (!is_http_url(piece)) {
                throw Error(ErrorCode::invalid_url, "not an absolute http/https URL: " + std::string(piece));
            }
            urls.emplace_back(piece);
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return urls;
}

}  // namespace groundchat::ingest
