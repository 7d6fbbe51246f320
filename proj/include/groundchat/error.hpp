#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace groundchat {

// Every failure that can cross a module boundary carries one of these codes.
// The snake_case names are part of the HTTP contract and must stay stable.
enum class ErrorCode {
    invalid_argument,
    invalid_config,
    invalid_url,
    fetch_status,
    fetch_timeout,
    fetch_too_large,
    fetch_too_many_redirects,
    fetch_failed,
    empty_document,
    html_parse,
    pdf_parse,
    no_text_layer,
    empty_after_extraction,
    empty_upload,
    upload_too_large,
    unsplittable,
    unknown_source,
    empty_system_message,
    unresolved_placeholder,
    bundle_too_large,
    backend_unreachable,
    backend_status,
    backend_timeout,
    backend_bad_response,
    no_sources,
    busy,
    empty_question,
    question_too_long,
    unknown_session,
    unknown_level,
    unknown_questionnaire,
    unknown_item,
    out_of_range,
    duplicate_submission,
    bad_window,
    weak_passphrase,
    outside_window,
    bad_passphrase,
    forbidden,
    bad_request,
    not_found,
    internal,
};

std::string_view code_name(ErrorCode code);

// HTTP status the service answers with for a given code.
int http_status(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_str() const noexcept { return code_name(code_); }

    // Upstream HTTP status for fetch_status / backend_status.
    std::optional<int> status() const noexcept { return status_; }
    Error& with_status(int status) {
        status_ = status;
        return *this;
    }

    // Number of refine steps finished before a backend failure.
    std::optional<std::size_t> completed_chunks() const noexcept { return completed_chunks_; }
    Error& with_completed_chunks(std::size_t n) {
        completed_chunks_ = n;
        return *this;
    }

private:
    ErrorCode code_;
    std::optional<int> status_;
    std::optional<std::size_t> completed_chunks_;
};

}  // namespace groundchat
