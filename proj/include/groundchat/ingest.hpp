#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundchat/clock.hpp"

namespace groundchat::ingest {

enum class SourceKind { url, pdf };

std::string_view to_string(SourceKind kind);
SourceKind parse_source_kind(std::string_view s);

struct SourceRef {
    std::string id;
    SourceKind kind = SourceKind::url;
    // The URL for url sources, the uploaded filename for pdf sources.
    std::string locator;
    Timestamp added_at = 0;

    friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

enum class Media { html, pdf, plain };

std::string_view to_string(Media media);

struct RawDocument {
    std::string source_id;
    Media media = Media::plain;
    std::string bytes;
};

struct ExtractedDocument {
    std::string source_id;
    std::string normalized_text;
    std::size_t char_count = 0;
    std::size_t token_estimate = 0;
    Timestamp extracted_at = 0;
};

// --- URL lists ---------------------------------------------------------

struct HttpUrl {
    std::string scheme;  // "http" or "https"
    std::string host;
    int port = 0;
    std::string path;  // always starts with '/', includes the query
};

// Absolute http(s) URL with a non-empty host, or nullopt.
std::optional<HttpUrl> parse_http_url(std::string_view url);

bool is_http_url(std::string_view url);

// Splits on commas, trims, drops empty pieces. Throws Error(invalid_url)
// naming the first piece that is not an absolute http/https URL.
std::vector<std::string> parse_url_list(std::string_view input);

// --- Fetching ----------------------------------------------------------

struct FetchOptions {
    std::size_t max_bytes = 10 * 1024 * 1024;
    std::chrono::milliseconds timeout{20'000};
    int max_redirects = 5;
};

// text/html -> html, application/pdf -> pdf, everything else -> plain.
Media media_from_content_type(std::string_view content_type);

// Throws Error with fetch_status (status attached), fetch_timeout,
// fetch_too_large, fetch_too_many_redirects, fetch_failed or empty_document.
RawDocument fetch_url(const std::string& url, const FetchOptions& options = {});

class Fetcher {
public:
    virtual ~Fetcher() = default;
    virtual RawDocument fetch(const std::string& url) = 0;
};

class HttpFetcher final : public Fetcher {
public:
    explicit HttpFetcher(FetchOptions options = {}) : options_(options) {}
    RawDocument fetch(const std::string& url) override { return fetch_url(url, options_); }

private:
    FetchOptions options_;
};

// --- Text extraction ---------------------------------------------------

std::vector<std::string> default_strip_elements();

// Visible text of an HTML document. Elements named in `strip` are dropped
// with their contents; block-level tags become whitespace; entities are
// decoded. Throws Error(html_parse) only when the bytes are neither UTF-8
// nor in a declared single-byte charset we can transcode.
std::string extract_html(std::string_view bytes, const std::vector<std::string>& strip = default_strip_elements());

// Text layer of a PDF in page order. Throws Error(pdf_parse) for corrupt or
// encrypted files and Error(no_text_layer) when no page yields a character.
std::string extract_pdf(std::string_view bytes);

// Collapses every whitespace run to one space, trims, drops control
// characters and ill-formed UTF-8.
std::string normalize(std::string_view raw);

bool is_normalized(std::string_view text);

struct ExtractOptions {
    std::vector<std::string> strip_elements = default_strip_elements();
};

// Dispatches on media, normalizes and counts. One per knowledge base; the
// counter only moves inside extract().
class Extractor {
public:
    Extractor(ExtractOptions options, const Clock& clock) : options_(std::move(options)), clock_(&clock) {}

    // Throws extractor errors or Error(empty_after_extraction).
    ExtractedDocument extract(const SourceRef& source, const RawDocument& raw);

    std::uint64_t extraction_count() const noexcept { return count_.load(); }

private:
    ExtractOptions options_;
    const Clock* clock_;
    std::atomic<std::uint64_t> count_{0};
};

}  // namespace groundchat::ingest
